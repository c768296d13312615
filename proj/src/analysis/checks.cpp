#include "fsw/analysis/checks.hpp"

#include <cmath>
#include <limits>

#include "fsw/dg/quadrature.hpp"
#include "fsw/la/factor.hpp"

namespace fsw::analysis {

using la::DenseMatrix;
using la::Vector;
using model::ParamPoint;
using model::SpacePoint;

nlohmann::json CoercivityReport::to_json() const {
  return {{"min_quotient", min_quotient},
          {"epsilon_declared", epsilon_declared},
          {"pass", pass}};
}

CoercivityReport coercivity_estimate(const dg::AssembledProblem& ap, double epsilon_declared,
                                     std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw Error("coercivity_estimate: need at least one trial");
  CoercivityReport rep;
  rep.epsilon_declared = epsilon_declared;
  rep.min_quotient = std::numeric_limits<double>::infinity();
  Rng rng(seed);
  const std::size_t n = ap.system.rows();
  for (std::size_t t = 0; t < trials; ++t) {
    Vector u(n);
    for (auto& v : u) v = rng.normal();
    const double uu = la::dot(u, ap.mass.apply(u));
    if (uu <= 0.0) continue;
    const double bu = la::dot(u, ap.system.apply(u));
    rep.min_quotient = std::min(rep.min_quotient, bu / uu);
  }
  rep.pass = rep.min_quotient >= 0.9 * epsilon_declared;
  return rep;
}

nlohmann::json AdmissibilityReport::to_json() const {
  return {{"m1_min_eigenvalue", m1_min_eigenvalue}, {"m1_pass", m1_pass},
          {"boundary_trace_dofs", boundary_trace_dofs}, {"m2_rank", m2_rank},
          {"m2_pass", m2_pass}, {"m2_skipped", m2_skipped}};
}

namespace {

// orthonormal kernel basis (columns) of a square matrix via SVD
DenseMatrix null_space(const DenseMatrix& a) {
  const auto f = la::svd(a);
  const double smax = f.s.empty() ? 0.0 : f.s.front();
  const double tol = smax * 1e-8;
  std::size_t rank = 0;
  for (double s : f.s)
    if (s > tol) ++rank;
  const std::size_t nullity = a.cols() - rank;
  DenseMatrix k(a.cols(), nullity);
  for (std::size_t j = 0; j < nullity; ++j)
    for (std::size_t i = 0; i < a.cols(); ++i) k(i, j) = f.vt(rank + j, i);
  return k;
}

std::size_t column_rank(const DenseMatrix& a) {
  if (a.cols() == 0) return 0;
  const auto f = la::svd(a);
  const double smax = f.s.empty() ? 0.0 : f.s.front();
  std::size_t rank = 0;
  for (double s : f.s)
    if (s > 1e-8 * std::max(1.0, smax)) ++rank;
  return rank;
}

} // namespace

AdmissibilityReport m_admissibility_check(const model::FriedrichsSystem& sys,
                                          const dg::DGSpace& space, const ParamPoint& mu) {
  AdmissibilityReport rep;
  rep.m1_min_eigenvalue = std::numeric_limits<double>::infinity();
  const auto& mesh = space.mesh();
  const std::size_t dim = mesh.dim;
  const std::size_t m = space.state_dim();
  const std::size_t tb = dim == 1 ? 1 : space.order() + 1; // scalar trace basis per face
  const std::size_t tdofs = tb * m;

  std::size_t total_rank = 0, total_dofs = 0;
  const std::size_t nq = space.order() + 2;
  const auto& rule = dg::gauss_legendre(nq);
  const auto h = mesh.cell_size();

  for (std::size_t axis = 0; axis < dim; ++axis) {
    if (mesh.periodic[axis]) continue;
    const std::size_t nt = dim > 1 ? mesh.cells[1 - axis] : 1;
    for (int side = 0; side < 2; ++side) {
      SpacePoint n{0.0, 0.0};
      n[axis] = side == 0 ? -1.0 : 1.0;
      const double xa = side == 0 ? mesh.box.lo[axis] : mesh.box.hi[axis];
      for (std::size_t it = 0; it < nt; ++it) {
        // assemble D and M on the face trace space (orthonormal tangential
        // Legendre basis x state components)
        DenseMatrix df(tdofs, tdofs), mf(tdofs, tdofs);
        const std::size_t nqf = dim == 1 ? 1 : nq;
        for (std::size_t q = 0; q < nqf; ++q) {
          SpacePoint x{0.0, 0.0};
          x[axis] = xa;
          double w = 1.0;
          std::vector<double> tval(tb, 1.0);
          if (dim > 1) {
            const double t = rule.points[q];
            x[1 - axis] = mesh.box.lo[1 - axis] +
                          (static_cast<double>(it) + 0.5 * (1.0 + t)) * h[1 - axis];
            w = rule.weights[q] * 0.5; // orthonormal basis on the reference face
            for (std::size_t b = 0; b < tb; ++b)
              tval[b] = std::sqrt(2.0 * b + 1.0) * (b == 0 ? 1.0 : t);
          }
          const DenseMatrix dmat = sys.face_matrix(mu, x, n);
          const DenseMatrix mmat = sys.boundary_matrix(mu, x, n);
          for (std::size_t bi = 0; bi < tb; ++bi)
            for (std::size_t bj = 0; bj < tb; ++bj) {
              const double t2 = w * tval[bi] * tval[bj];
              for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < m; ++c) {
                  df(bi * m + r, bj * m + c) += t2 * dmat(r, c);
                  mf(bi * m + r, bj * m + c) += t2 * mmat(r, c);
                }
            }
        }

        // M1 on this face
        DenseMatrix sym(tdofs, tdofs);
        for (std::size_t r = 0; r < tdofs; ++r)
          for (std::size_t c = 0; c < tdofs; ++c) sym(r, c) = 0.5 * (mf(r, c) + mf(c, r));
        const double lmin = la::sym_eig(sym).values.front();
        rep.m1_min_eigenvalue =
            std::min(rep.m1_min_eigenvalue, lmin / std::max(1.0, la::frobenius_norm(mf)));

        // M2 on this face: ker(D-M) + ker(D+M) must span the trace space
        DenseMatrix dminus(tdofs, tdofs), dplus(tdofs, tdofs);
        for (std::size_t r = 0; r < tdofs; ++r)
          for (std::size_t c = 0; c < tdofs; ++c) {
            dminus(r, c) = df(r, c) - mf(r, c);
            dplus(r, c) = df(r, c) + mf(r, c);
          }
        const DenseMatrix k1 = null_space(dminus);
        const DenseMatrix k2 = null_space(dplus);
        DenseMatrix stacked(tdofs, k1.cols() + k2.cols());
        for (std::size_t i = 0; i < tdofs; ++i) {
          for (std::size_t j = 0; j < k1.cols(); ++j) stacked(i, j) = k1(i, j);
          for (std::size_t j = 0; j < k2.cols(); ++j) stacked(i, k1.cols() + j) = k2(i, j);
        }
        total_rank += column_rank(stacked);
        total_dofs += tdofs;
      }
    }
  }

  rep.boundary_trace_dofs = total_dofs;
  rep.m1_pass = rep.m1_min_eigenvalue >= -1e-10;
  if (total_dofs > 200) {
    rep.m2_skipped = true;
    rep.m2_pass = true; // not evaluated
    rep.m2_rank = 0;
  } else {
    rep.m2_rank = total_rank;
    rep.m2_pass = total_rank == total_dofs;
  }
  return rep;
}

nlohmann::json NormEquivalenceReport::to_json() const {
  return {{"lower_empirical", lower_empirical}, {"upper_empirical", upper_empirical},
          {"lower_theory", lower_theory},       {"upper_theory", upper_theory},
          {"violations", violations},           {"pass", pass},
          {"worst_mu", worst_mu}};
}

NormEquivalenceReport norm_equivalence(const model::FriedrichsSystem& sys,
                                       const dg::DGSpace& space,
                                       const std::vector<ParamPoint>& mus, std::size_t trials,
                                       std::uint64_t seed) {
  if (!sys.n1)
    throw Error("norm_equivalence: system lacks the N1 structure, the two-sided bound with "
                "explicit constants does not apply");
  const double kappa = sys.n1->kappa;
  if (!(kappa > 0.0)) throw Error("norm_equivalence: declared kappa must be positive");

  NormEquivalenceReport rep;
  rep.lower_empirical = std::numeric_limits<double>::infinity();
  rep.upper_empirical = 0.0;
  rep.lower_theory = std::numeric_limits<double>::infinity();
  rep.upper_theory = 0.0;

  const dg::BlockDiagMatrix g0 = dg::reference_gram(sys, space);
  Rng rng(seed);

  // sample points for the sup-norms
  std::vector<SpacePoint> xs;
  const std::size_t grid = 5;
  const std::size_t ny = sys.space_dim > 1 ? grid : 1;
  for (std::size_t i = 0; i < grid; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      SpacePoint x{0.0, 0.0};
      x[0] = sys.domain.lo[0] +
             (sys.domain.hi[0] - sys.domain.lo[0]) * static_cast<double>(i) / (grid - 1);
      if (sys.space_dim > 1)
        x[1] = sys.domain.lo[1] +
               (sys.domain.hi[1] - sys.domain.lo[1]) * static_cast<double>(j) / (ny - 1);
      xs.push_back(x);
    }
  for (int r = 0; r < 64; ++r) {
    SpacePoint x{0.0, 0.0};
    for (std::size_t i = 0; i < sys.space_dim; ++i)
      x[i] = rng.uniform(sys.domain.lo[i], sys.domain.hi[i]);
    xs.push_back(x);
  }

  for (const auto& mu : mus) {
    double a0_sup = 0.0, ahat_sup = 0.0;
    for (const auto& x : xs) {
      const DenseMatrix a0 = sys.a0.eval(mu, x);
      a0_sup = std::max(a0_sup, la::svd(a0).s.front());
      ahat_sup = std::max(ahat_sup, std::abs(sys.n1->a_hat(mu, x)));
    }
    const double upper2 = std::max(2.0 * ahat_sup * ahat_sup, 1.0 + 2.0 * a0_sup * a0_sup);
    const double lower2 =
        1.0 / std::max(2.0 / (kappa * kappa), 1.0 + 2.0 * a0_sup * a0_sup / (kappa * kappa));
    rep.upper_theory = std::max(rep.upper_theory, std::sqrt(upper2));
    rep.lower_theory = std::min(rep.lower_theory, std::sqrt(lower2));

    const dg::BlockDiagMatrix gmu = dg::graph_gram(sys, space, mu);
    for (std::size_t t = 0; t < trials; ++t) {
      Vector u(space.dof_count());
      for (auto& v : u) v = rng.normal();
      const double n0 = la::dot(u, g0.apply(u));
      const double nmu = la::dot(u, gmu.apply(u));
      if (n0 <= 0.0) continue;
      const double ratio = nmu / n0;
      rep.lower_empirical = std::min(rep.lower_empirical, std::sqrt(ratio));
      rep.upper_empirical = std::max(rep.upper_empirical, std::sqrt(ratio));
      const double slack = 1e-8;
      if (ratio < lower2 * (1.0 - slack) || ratio > upper2 * (1.0 + slack)) {
        ++rep.violations;
        rep.worst_mu = mu;
      }
    }
  }
  rep.pass = rep.violations == 0;
  return rep;
}

nlohmann::json InfSupReport::to_json() const {
  return {{"mu", mu},           {"beta", beta},           {"theoretical_bound", theoretical_bound},
          {"pass", pass},       {"converged", converged}, {"iterations", iterations}};
}

namespace {

// largest eigenvalue of S = L_X^T B^{-1} G_Y B^{-T} L_X by power iteration
struct PowerResult {
  double lambda = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

PowerResult inverse_normal_power(const la::SparseLU& lu, const dg::GramFactor& fx,
                                 const dg::GramFactor& fy, std::size_t n) {
  Rng rng(0x1f5b000 + n);
  Vector z(n);
  for (auto& v : z) v = rng.normal();
  double lambda = 0.0, prev = -1.0;
  PowerResult out;
  const std::size_t max_iters = 600;
  for (std::size_t it = 0; it < max_iters; ++it) {
    const double zn = la::norm2(z);
    if (zn == 0.0) break;
    la::scale(z, 1.0 / zn);
    Vector w = fx.apply_l(z);
    w = lu.solve_transposed(w);
    w = fy.apply_g(w);
    w = lu.solve(w);
    w = fx.apply_lt(w);
    lambda = la::dot(z, w);
    out.iterations = it + 1;
    if (prev >= 0.0 && std::abs(lambda - prev) <= 1e-10 * std::max(1.0, lambda)) {
      out.converged = true;
      z = std::move(w);
      break;
    }
    prev = lambda;
    z = std::move(w);
  }
  out.lambda = lambda;
  return out;
}

} // namespace

namespace {

InfSupReport infsup_one(const dg::AssembledProblem& ap, InfSupForm form,
                        const la::SparseLU& lu, const dg::GramFactor& fmass,
                        const dg::GramFactor& fgraph, const dg::GramFactor& fadj,
                        double theoretical_bound) {
  InfSupReport rep;
  rep.mu = ap.mu;
  const dg::GramFactor& fx = form == InfSupForm::Weak ? fgraph : fmass;
  const dg::GramFactor& fy = form == InfSupForm::Weak ? fmass : fadj;
  const PowerResult pr = inverse_normal_power(lu, fx, fy, ap.system.rows());
  rep.converged = pr.converged;
  rep.iterations = pr.iterations;
  rep.beta = pr.lambda > 0.0 ? 1.0 / std::sqrt(pr.lambda) : 0.0;
  rep.theoretical_bound = theoretical_bound;
  rep.pass = rep.beta > 1e-10;
  return rep;
}

double infsup_bound(const dg::AssembledProblem& ap, const la::SparseLU& lu,
                    const dg::GramFactor& fmass) {
  // surrogate for the continuous bound: operator inverse norm in L2
  const PowerResult inv = inverse_normal_power(lu, fmass, fmass, ap.system.rows());
  const double op_inv_norm = inv.lambda > 0.0 ? std::sqrt(inv.lambda) : 0.0;
  return 1.0 / std::sqrt(1.0 + op_inv_norm * op_inv_norm);
}

void infsup_precheck(const dg::AssembledProblem& ap) {
  if (ap.system.rows() == 0) throw Error("discrete_infsup: assembled problem lacks the system");
  if (ap.graph_gram.empty() || ap.adjoint_gram.empty() || ap.mass.empty())
    throw Error("discrete_infsup: assembled problem lacks Gram matrices");
}

} // namespace

InfSupReport discrete_infsup(const dg::AssembledProblem& ap, InfSupForm form) {
  infsup_precheck(ap);
  const dg::GramFactor fmass(ap.mass);
  const dg::GramFactor fgraph(ap.graph_gram);
  const dg::GramFactor fadj(ap.adjoint_gram);
  const la::SparseLU lu(ap.system);
  return infsup_one(ap, form, lu, fmass, fgraph, fadj, infsup_bound(ap, lu, fmass));
}

std::pair<InfSupReport, InfSupReport> discrete_infsup_pair(const dg::AssembledProblem& ap) {
  infsup_precheck(ap);
  const dg::GramFactor fmass(ap.mass);
  const dg::GramFactor fgraph(ap.graph_gram);
  const dg::GramFactor fadj(ap.adjoint_gram);
  const la::SparseLU lu(ap.system);
  const double bound = infsup_bound(ap, lu, fmass);
  return {infsup_one(ap, InfSupForm::Weak, lu, fmass, fgraph, fadj, bound),
          infsup_one(ap, InfSupForm::Ultraweak, lu, fmass, fgraph, fadj, bound)};
}

nlohmann::json FellReport::to_json() const {
  return {{"max_rate", max_rate}, {"norms", norms}};
}

FellReport fell_continuity_diagnostic(
    const std::function<Vector(const ParamPoint&)>& section,
    const std::function<double(const ParamPoint&, const Vector&)>& norm,
    const std::vector<ParamPoint>& path) {
  if (path.size() < 3) throw Error("fell_continuity_diagnostic: need at least 3 path samples");
  FellReport rep;
  for (const auto& mu : path) rep.norms.push_back(norm(mu, section(mu)));
  for (std::size_t j = 0; j + 1 < path.size(); ++j) {
    double step = 0.0;
    for (std::size_t i = 0; i < path[j].size(); ++i) {
      const double d = path[j + 1][i] - path[j][i];
      step += d * d;
    }
    step = std::sqrt(step);
    if (step == 0.0) continue;
    rep.max_rate = std::max(rep.max_rate, std::abs(rep.norms[j + 1] - rep.norms[j]) / step);
  }
  return rep;
}

} // namespace fsw::analysis
