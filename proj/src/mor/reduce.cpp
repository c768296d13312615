#include "fsw/mor/reduce.hpp"

#include <cmath>
#include <limits>

#include "fsw/la/factor.hpp"

namespace fsw::mor {

using la::DenseMatrix;
using la::Vector;
using model::ParamPoint;

namespace {

dg::GramFactor make_ref_factor(const model::FriedrichsSystem& sys, const dg::DGSpace& space,
                               RefNorm ref) {
  switch (ref) {
    case RefNorm::L2: return dg::GramFactor(dg::l2_gram(space));
    case RefNorm::X0: return dg::GramFactor(dg::reference_gram(sys, space));
    case RefNorm::Auto:
      return sys.n1 ? dg::GramFactor(dg::reference_gram(sys, space))
                    : dg::GramFactor(dg::l2_gram(space));
  }
  throw Error("make_ref_factor: unknown reference norm");
}

} // namespace

SnapshotSet sweep(const model::FriedrichsSystem& sys, const dg::DGSpace& space,
                  const std::vector<ParamPoint>& mus, const SweepOptions& opts) {
  if (mus.empty()) throw Error("sweep: empty parameter sample set");
  if (!sys.solve_supported)
    throw Error("sweep: system '" + sys.id + "' does not support solves");
  for (const auto& mu : mus)
    if (!sys.params.contains(mu)) throw Error("sweep: parameter outside the box");

  SnapshotSet out;
  out.mus = mus;
  out.dofs = space.dof_count();
  out.solutions.assign(mus.size(), {});
  out.residuals.assign(mus.size(), 0.0);
  out.gram_factors.resize(mus.size());
  out.ref_factor = make_ref_factor(sys, space, opts.ref);

  std::optional<dg::AffineOperator> affine;
  if (sys.expansion) affine.emplace(sys, space);

  std::vector<std::string> failures(mus.size());
  parallel_for(mus.size(), opts.threads, [&](std::size_t j) {
    try {
      const ParamPoint& mu = mus[j];
      la::SparseMatrix b;
      Vector f;
      dg::AssembleParts parts;
      parts.grams = true;
      if (affine) {
        parts.system = false;
        b = affine->system_matrix(mu);
        f = affine->rhs(mu);
      }
      dg::check_positivity(sys, mu);
      dg::AssembledProblem ap = dg::assemble(sys, space, mu, parts);
      if (!affine) {
        b = std::move(ap.system);
        f = std::move(ap.rhs);
      }
      Vector u = la::sparse_solve(b, f);
      Vector r = b.apply(u);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] -= f[i];
      const double fn = la::norm2(f);
      out.residuals[j] = fn > 0.0 ? la::norm2(r) / fn : la::norm2(r);
      out.solutions[j] = std::move(u);
      out.gram_factors[j] = opts.reference_norm_only
                                ? out.ref_factor
                                : dg::GramFactor(ap.graph_gram);
    } catch (const std::exception& e) {
      std::string at = "mu = (";
      for (std::size_t i = 0; i < mus[j].size(); ++i)
        at += (i ? ", " : "") + format_double(mus[j][i]);
      failures[j] = "sweep failed at " + at + "): " + e.what();
    }
  });
  for (const auto& f : failures)
    if (!f.empty()) throw Error(f);
  return out;
}

PodResult pod(const SnapshotSet& snaps, std::size_t n_modes) {
  if (n_modes > snaps.size()) throw Error("pod: more modes requested than snapshots");
  const std::size_t s = snaps.size();
  DenseMatrix weighted(snaps.dofs, s);
  for (std::size_t j = 0; j < s; ++j) {
    const Vector w = snaps.ref_factor.apply_lt(snaps.solutions[j]);
    for (std::size_t i = 0; i < snaps.dofs; ++i) weighted(i, j) = w[i];
  }
  const la::SvdResult f = la::svd(weighted);

  PodResult out;
  out.singular_values = f.s;
  const double smax = f.s.empty() ? 0.0 : f.s.front();
  const double tol = static_cast<double>(std::max(snaps.dofs, s)) *
                     std::numeric_limits<double>::epsilon() * smax;
  std::size_t rank = 0;
  for (double sv : f.s)
    if (sv > tol) ++rank;
  out.modes = std::min(n_modes, rank);
  out.truncated_by_rank = out.modes < n_modes;
  out.basis = DenseMatrix(snaps.dofs, out.modes);
  for (std::size_t k = 0; k < out.modes; ++k) {
    Vector col(snaps.dofs);
    for (std::size_t i = 0; i < snaps.dofs; ++i) col[i] = f.u(i, k);
    const Vector v = snaps.ref_factor.solve_lt(col);
    for (std::size_t i = 0; i < snaps.dofs; ++i) out.basis(i, k) = v[i];
  }
  return out;
}

namespace {

// best-approximation error of u in the span of the first n columns of w
// (all vectors pre-weighted by the relevant Cholesky transpose)
double weighted_bestfit_error(const DenseMatrix& w, std::size_t n, const Vector& b) {
  if (n == 0) return la::norm2(b);
  DenseMatrix a(w.rows(), n);
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = w(i, j);
  return la::least_squares(a, b).residual_norm;
}

} // namespace

GreedyResult strong_greedy(const SnapshotSet& snaps, std::size_t n_max, double tol) {
  if (n_max > snaps.size()) throw Error("strong_greedy: n_max exceeds the snapshot count");
  GreedyResult out;
  const std::size_t s = snaps.size();
  const std::size_t dofs = snaps.dofs;

  out.e0 = 0.0;
  for (std::size_t j = 0; j < s; ++j)
    out.e0 = std::max(out.e0, snaps.gram_factors[j].norm(snaps.solutions[j]));
  if (out.e0 == 0.0) {
    out.basis = DenseMatrix(dofs, 0);
    return out;
  }

  std::vector<Vector> basis; // reference-orthonormal columns
  std::vector<double> errs;
  std::vector<std::size_t> selected;
  // per-sample weighted basis columns L_mu^T v and weighted snapshots
  std::vector<DenseMatrix> wbasis(s);
  std::vector<Vector> wsnap(s);
  for (std::size_t j = 0; j < s; ++j) {
    wbasis[j] = DenseMatrix(dofs, n_max);
    wsnap[j] = snaps.gram_factors[j].apply_lt(snaps.solutions[j]);
  }

  while (basis.size() < n_max) {
    // worst snapshot under the current space
    double worst = -1.0;
    std::size_t pick = 0;
    for (std::size_t j = 0; j < s; ++j) {
      const double e = weighted_bestfit_error(wbasis[j], basis.size(), wsnap[j]);
      if (e > worst) {
        worst = e;
        pick = j;
      }
    }
    // orthonormalize the picked snapshot in the reference norm
    Vector v = snaps.solutions[pick];
    const double pre = snaps.ref_factor.norm(v);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) {
        const double c = snaps.ref_factor.inner(q, v);
        la::axpy(-c, q, v);
      }
      if (snaps.ref_factor.norm(v) > 1e-8 * std::max(1.0, pre)) break;
    }
    const double post = snaps.ref_factor.norm(v);
    if (post <= 1e-14 * std::max(1.0, pre)) break; // dependent snapshot, span exhausted
    la::scale(v, 1.0 / post);
    basis.push_back(v);
    selected.push_back(pick);
    for (std::size_t j = 0; j < s; ++j) {
      const Vector w = snaps.gram_factors[j].apply_lt(v);
      for (std::size_t i = 0; i < dofs; ++i) wbasis[j](i, basis.size() - 1) = w[i];
    }
    // error after adding
    double enew = 0.0;
    for (std::size_t j = 0; j < s; ++j)
      enew = std::max(enew, weighted_bestfit_error(wbasis[j], basis.size(), wsnap[j]));
    errs.push_back(enew);
    if (enew <= tol * out.e0) break;
  }

  out.basis = DenseMatrix(dofs, basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k)
    for (std::size_t i = 0; i < dofs; ++i) out.basis(i, k) = basis[k][i];
  out.selected = std::move(selected);
  out.errors = Vector(errs.begin(), errs.end());
  out.rel_errors = out.errors;
  la::scale(out.rel_errors, 1.0 / out.e0);
  return out;
}

nlohmann::json DecayReport::to_json() const {
  return {{"n", n_values},   {"errors", errors},           {"alpha", alpha},
          {"beta", beta},    {"r_squared", r_squared},     {"q_b", q_b},
          {"beta_infinite", beta_infinite}};
}

DecayFit fit_decay(const std::vector<std::size_t>& ns, const la::Vector& errors,
                   std::size_t q_b) {
  DecayFit out;
  if (q_b < 1) throw Error("fit_decay: q_b must be positive");
  // relative errors at roundoff level count as exact zeros
  const double zero_floor = 1e-14;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (errors[i] > zero_floor) {
      xs.push_back(std::pow(static_cast<double>(ns[i]), 1.0 / static_cast<double>(q_b)));
      ys.push_back(std::log(errors[i]));
    }
  }
  if (xs.size() < ns.size()) out.beta_infinite = true;
  if (xs.size() < 2) {
    out.beta_infinite = true;
    out.beta = std::numeric_limits<double>::infinity();
    out.alpha = 0.0;
    out.r_squared = 1.0;
    return out;
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw Error("fit_decay: degenerate abscissae");
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  out.beta = -slope;
  out.alpha = std::exp(intercept);
  double ss_res = 0.0, ss_tot = 0.0;
  const double ymean = sy / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double fit = intercept + slope * xs[i];
    ss_res += (ys[i] - fit) * (ys[i] - fit);
    ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
  }
  out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res < 1e-24 ? 1.0 : 0.0);
  return out;
}

DecayReport nwidth_estimate(const SnapshotSet& snaps, std::size_t n_max, std::size_t q_b) {
  if (n_max > snaps.size()) throw Error("nwidth_estimate: range exceeds the snapshot count");
  const PodResult p = pod(snaps, n_max);
  const std::size_t s = snaps.size();
  const std::size_t modes = p.modes;

  DecayReport rep;
  rep.q_b = std::max<std::size_t>(1, q_b);
  rep.errors.assign(n_max, 0.0);
  for (std::size_t n = 1; n <= n_max; ++n) rep.n_values.push_back(n);

  for (std::size_t j = 0; j < s; ++j) {
    const Vector b = snaps.gram_factors[j].apply_lt(snaps.solutions[j]);
    const double bn = la::norm2(b);
    if (bn == 0.0) continue;
    // incremental orthonormalization of the weighted basis columns gives the
    // best-approximation errors for every N in one pass; the residual vector
    // is carried explicitly so tiny residuals do not cancel away
    std::vector<Vector> q;
    Vector resid = b;
    for (std::size_t k = 0; k < n_max; ++k) {
      if (k < modes) {
        Vector col(snaps.dofs);
        for (std::size_t i = 0; i < snaps.dofs; ++i) col[i] = p.basis(i, k);
        Vector w = snaps.gram_factors[j].apply_lt(col);
        const double pre = la::norm2(w);
        for (int pass = 0; pass < 2; ++pass)
          for (const auto& qq : q) la::axpy(-la::dot(qq, w), qq, w);
        const double post = la::norm2(w);
        if (post > 1e-12 * std::max(1.0, pre)) {
          la::scale(w, 1.0 / post);
          la::axpy(-la::dot(w, resid), w, resid);
          q.push_back(std::move(w));
        }
      }
      rep.errors[k] = std::max(rep.errors[k], la::norm2(resid) / bn);
    }
  }

  const DecayFit fit = fit_decay(rep.n_values, rep.errors, rep.q_b);
  rep.alpha = fit.alpha;
  rep.beta = fit.beta;
  rep.r_squared = fit.r_squared;
  rep.beta_infinite = fit.beta_infinite;
  return rep;
}

double mean_square_projection_error(const SnapshotSet& snaps, const DenseMatrix& basis) {
  double acc = 0.0;
  for (std::size_t j = 0; j < snaps.size(); ++j) {
    const Vector b = snaps.ref_factor.apply_lt(snaps.solutions[j]);
    Vector r = b;
    for (std::size_t k = 0; k < basis.cols(); ++k) {
      Vector col(snaps.dofs);
      for (std::size_t i = 0; i < snaps.dofs; ++i) col[i] = basis(i, k);
      const Vector w = snaps.ref_factor.apply_lt(col);
      la::axpy(-la::dot(w, b), w, r);
    }
    acc += la::dot(r, r);
  }
  return acc / static_cast<double>(snaps.size());
}

} // namespace fsw::mor
