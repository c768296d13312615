#include "fsw/model/system.hpp"

#include <cmath>
#include <limits>

#include "fsw/la/factor.hpp"

namespace fsw::model {

double Box::diameter() const {
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
  return std::sqrt(s);
}

bool ParameterDomain::contains(const ParamPoint& mu, double slack) const {
  if (mu.size() != bounds.size()) return false;
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const double width = bounds[i][1] - bounds[i][0];
    const double tol = slack * std::max(1.0, std::abs(width));
    if (mu[i] < bounds[i][0] - tol || mu[i] > bounds[i][1] + tol) return false;
  }
  return true;
}

ParamPoint ParameterDomain::midpoint() const {
  ParamPoint mu(bounds.size());
  for (std::size_t i = 0; i < bounds.size(); ++i) mu[i] = 0.5 * (bounds[i][0] + bounds[i][1]);
  return mu;
}

ParamPoint ParameterDomain::sample(Rng& rng) const {
  ParamPoint mu(bounds.size());
  for (std::size_t i = 0; i < bounds.size(); ++i) mu[i] = rng.uniform(bounds[i][0], bounds[i][1]);
  return mu;
}

void ParameterDomain::check_valid() const {
  if (bounds.empty()) throw Error("ParameterDomain: empty parameter box");
  for (const auto& b : bounds) {
    if (!std::isfinite(b[0]) || !std::isfinite(b[1]))
      throw Error("ParameterDomain: bounds must be finite (compact box)");
    if (b[0] > b[1]) throw Error("ParameterDomain: lower bound exceeds upper bound");
  }
}

CoefficientField CoefficientField::constant(std::size_t d, const DenseMatrix& value) {
  CoefficientField f;
  f.space_dim = d;
  f.state_dim = value.rows();
  f.smoothness = Smoothness::Constant;
  f.eval = [value](const ParamPoint&, const SpacePoint&) { return value; };
  return f;
}

CoefficientField CoefficientField::scalar(
    std::size_t d, std::function<double(const ParamPoint&, const SpacePoint&)> fn, Smoothness s) {
  CoefficientField f;
  f.space_dim = d;
  f.state_dim = 1;
  f.smoothness = s;
  f.eval = [fn](const ParamPoint& mu, const SpacePoint& x) {
    DenseMatrix m(1, 1);
    m(0, 0) = fn(mu, x);
    return m;
  };
  return f;
}

SourceField SourceField::constant(std::size_t d, const Vector& value) {
  SourceField f;
  f.space_dim = d;
  f.state_dim = value.size();
  f.smoothness = Smoothness::Constant;
  f.eval = [value](const ParamPoint&, const SpacePoint&) { return value; };
  return f;
}

DenseMatrix FriedrichsSystem::face_matrix(const ParamPoint& mu, const SpacePoint& x,
                                          const SpacePoint& n) const {
  double len = 0.0;
  for (std::size_t i = 0; i < space_dim; ++i) len += n[i] * n[i];
  if (std::abs(std::sqrt(len) - 1.0) > 1e-12)
    throw Error("face_matrix: normal is not a unit vector");
  DenseMatrix d(state_dim, state_dim);
  for (std::size_t i = 0; i < space_dim; ++i) {
    if (n[i] == 0.0) continue;
    const DenseMatrix ai = a[i].eval(mu, x);
    for (std::size_t r = 0; r < state_dim; ++r)
      for (std::size_t c = 0; c < state_dim; ++c) d(r, c) += n[i] * ai(r, c);
  }
  return d;
}

DenseMatrix FriedrichsSystem::boundary_matrix(const ParamPoint& mu, const SpacePoint& x,
                                              const SpacePoint& n) const {
  switch (boundary.kind) {
    case BoundaryOperatorSpec::Kind::SpectralAbs: {
      const DenseMatrix d = face_matrix(mu, x, n);
      const auto eig = la::sym_eig(d);
      DenseMatrix m(state_dim, state_dim);
      for (std::size_t k = 0; k < state_dim; ++k) {
        const double mag = std::abs(eig.values[k]);
        for (std::size_t r = 0; r < state_dim; ++r)
          for (std::size_t c = 0; c < state_dim; ++c)
            m(r, c) += mag * eig.vectors(r, k) * eig.vectors(c, k);
      }
      return m;
    }
    case BoundaryOperatorSpec::Kind::DirichletPrimal: {
      DenseMatrix m = face_matrix(mu, x, n);
      std::vector<char> primal(state_dim, 0);
      for (std::size_t p : boundary.primal_indices) primal[p] = 1;
      for (std::size_t r = 0; r < state_dim; ++r)
        for (std::size_t c = 0; c < state_dim; ++c)
          if (!primal[r] && primal[c]) m(r, c) = -m(r, c);
      return m;
    }
    case BoundaryOperatorSpec::Kind::Custom:
      if (!boundary.custom) throw Error("boundary_matrix: custom rule missing");
      return boundary.custom(mu, x, n);
  }
  throw Error("boundary_matrix: unknown kind");
}

DenseMatrix FriedrichsSystem::divergence(const ParamPoint& mu, const SpacePoint& x) const {
  if (div_a) return div_a->eval(mu, x);
  const double h = 1e-6 * domain.diameter();
  DenseMatrix out(state_dim, state_dim);
  for (std::size_t i = 0; i < space_dim; ++i) {
    SpacePoint xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const DenseMatrix ap = a[i].eval(mu, xp);
    const DenseMatrix am = a[i].eval(mu, xm);
    for (std::size_t r = 0; r < state_dim; ++r)
      for (std::size_t c = 0; c < state_dim; ++c) out(r, c) += (ap(r, c) - am(r, c)) / (2.0 * h);
  }
  return out;
}

void FriedrichsSystem::check_consistent() const {
  if (space_dim < 1 || space_dim > 2) throw Error("FriedrichsSystem: space dimension must be 1 or 2");
  if (a.size() != space_dim) throw Error("FriedrichsSystem: need one first-order field per axis");
  params.check_valid();
  if (domain.dim != space_dim) throw Error("FriedrichsSystem: domain dimension mismatch");
}

namespace {

struct SamplePlan {
  std::vector<ParamPoint> mus;
  std::vector<SpacePoint> interior;
  // boundary points with outward normals
  std::vector<std::pair<SpacePoint, SpacePoint>> boundary;
};

SamplePlan build_plan(const FriedrichsSystem& sys, const ValidationOptions& opts) {
  SamplePlan plan;
  Rng rng(opts.seed);
  for (std::size_t s = 0; s < opts.mu_samples; ++s) plan.mus.push_back(sys.params.sample(rng));

  const auto& box = sys.domain;
  const std::size_t per_axis = std::max<std::size_t>(2, opts.samples_per_axis);
  auto coord = [&](std::size_t axis, std::size_t k) {
    return box.lo[axis] + (box.hi[axis] - box.lo[axis]) *
                              (static_cast<double>(k) / static_cast<double>(per_axis - 1));
  };
  if (sys.space_dim == 1) {
    for (std::size_t i = 0; i < per_axis; ++i) plan.interior.push_back({coord(0, i), 0.0});
  } else {
    for (std::size_t i = 0; i < per_axis; ++i)
      for (std::size_t j = 0; j < per_axis; ++j)
        plan.interior.push_back({coord(0, i), coord(1, j)});
  }
  for (std::size_t s = 0; s < opts.random_samples; ++s) {
    SpacePoint x{0.0, 0.0};
    for (std::size_t i = 0; i < sys.space_dim; ++i) x[i] = rng.uniform(box.lo[i], box.hi[i]);
    plan.interior.push_back(x);
  }

  // boundary: both ends of every axis, grid + random tangential positions
  const std::size_t bnd_random = std::max<std::size_t>(8, opts.random_samples / 8);
  for (std::size_t axis = 0; axis < sys.space_dim; ++axis) {
    for (int side = 0; side < 2; ++side) {
      SpacePoint n{0.0, 0.0};
      n[axis] = side == 0 ? -1.0 : 1.0;
      const double xa = side == 0 ? box.lo[axis] : box.hi[axis];
      if (sys.space_dim == 1) {
        plan.boundary.push_back({{xa, 0.0}, n});
      } else {
        const std::size_t other = 1 - axis;
        for (std::size_t k = 0; k < per_axis; ++k) {
          SpacePoint x{0.0, 0.0};
          x[axis] = xa;
          x[other] = coord(other, k);
          plan.boundary.push_back({x, n});
        }
        for (std::size_t k = 0; k < bnd_random; ++k) {
          SpacePoint x{0.0, 0.0};
          x[axis] = xa;
          x[other] = rng.uniform(box.lo[other], box.hi[other]);
          plan.boundary.push_back({x, n});
        }
      }
    }
  }
  return plan;
}

} // namespace

ValidationReport validate_friedrichs(const FriedrichsSystem& sys, const ValidationOptions& opts) {
  sys.check_consistent();
  if (opts.samples_per_axis < 2) throw Error("validate_friedrichs: need at least 2 samples per axis");
  ValidationReport rep;
  rep.epsilon_estimate = std::numeric_limits<double>::infinity();
  rep.m1_min_eigenvalue = std::numeric_limits<double>::infinity();

  const SamplePlan plan = build_plan(sys, opts);
  const std::size_t m = sys.state_dim;

  for (const auto& mu : plan.mus) {
    for (const auto& x : plan.interior) {
      const DenseMatrix a0 = sys.a0.eval(mu, x);
      const DenseMatrix dv = sys.divergence(mu, x);
      if (!a0.all_finite() || !dv.all_finite()) {
        rep.finite_pass = false;
        rep.failures.push_back("non-finite coefficient at mu=" + format_double(mu[0]) +
                               " x=" + format_double(x[0]));
        continue;
      }
      for (std::size_t i = 0; i < sys.space_dim; ++i) {
        const DenseMatrix ai = sys.a[i].eval(mu, x);
        if (!ai.all_finite()) {
          rep.finite_pass = false;
          rep.failures.push_back("non-finite A^" + std::to_string(i + 1) + " at x=" +
                                 format_double(x[0]));
          continue;
        }
        double scale = std::max(1.0, la::frobenius_norm(ai));
        for (std::size_t r = 0; r < m; ++r)
          for (std::size_t c = r + 1; c < m; ++c) {
            const double asym = std::abs(ai(r, c) - ai(c, r)) / scale;
            if (asym > rep.max_asymmetry) rep.max_asymmetry = asym;
          }
      }
      DenseMatrix sym(m, m);
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) sym(r, c) = a0(r, c) + a0(c, r) - dv(r, c);
      // symmetrize residual asymmetry of div A before the eigensolve
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = r + 1; c < m; ++c) {
          const double v = 0.5 * (sym(r, c) + sym(c, r));
          sym(r, c) = v;
          sym(c, r) = v;
        }
      const double lmin = la::sym_eig(sym).values.front();
      if (0.5 * lmin < rep.epsilon_estimate) {
        rep.epsilon_estimate = 0.5 * lmin;
        rep.worst_mu = mu;
        rep.worst_x = x;
      }
    }

    for (const auto& [x, n] : plan.boundary) {
      DenseMatrix mb;
      try {
        mb = sys.boundary_matrix(mu, x, n);
      } catch (const Error& e) {
        rep.m1_pass = false;
        rep.failures.push_back(std::string("boundary operator evaluation failed: ") + e.what());
        continue;
      }
      if (!mb.all_finite()) {
        rep.finite_pass = false;
        rep.failures.push_back("non-finite boundary operator");
        continue;
      }
      DenseMatrix sym(m, m);
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) sym(r, c) = 0.5 * (mb(r, c) + mb(c, r));
      const double lmin = la::sym_eig(sym).values.front();
      const double rel = lmin / std::max(1.0, la::frobenius_norm(mb));
      rep.m1_min_eigenvalue = std::min(rep.m1_min_eigenvalue, rel);
    }
  }

  rep.fs1_pass = rep.max_asymmetry <= 1e-12;
  if (!rep.fs1_pass) rep.failures.push_back("FS1 symmetry violated by " + format_double(rep.max_asymmetry));
  rep.fs2_pass = rep.epsilon_estimate > 0.0;
  if (!rep.fs2_pass)
    rep.failures.push_back("FS2 positivity violated: epsilon estimate " +
                           format_double(rep.epsilon_estimate));
  rep.m1_pass = rep.m1_pass && rep.m1_min_eigenvalue >= -1e-10;
  if (!rep.m1_pass)
    rep.failures.push_back("M1 violated: min eigenvalue of sym(M) " +
                           format_double(rep.m1_min_eigenvalue));
  return rep;
}

FriedrichsSystem adjoint_coefficients(const FriedrichsSystem& sys) {
  FriedrichsSystem adj = sys;
  adj.id = sys.id + "-adjoint";

  auto a0_eval = sys.a0.eval;
  auto div_eval = [sys](const ParamPoint& mu, const SpacePoint& x) { return sys.divergence(mu, x); };

  adj.a0.eval = [a0_eval, div_eval](const ParamPoint& mu, const SpacePoint& x) {
    const DenseMatrix a0 = a0_eval(mu, x);
    const DenseMatrix dv = div_eval(mu, x);
    DenseMatrix out(a0.rows(), a0.cols());
    for (std::size_t r = 0; r < a0.rows(); ++r)
      for (std::size_t c = 0; c < a0.cols(); ++c) out(r, c) = a0(c, r) - dv(r, c);
    return out;
  };
  adj.a0.smoothness = std::max(sys.a0.smoothness, sys.a.front().smoothness);

  for (std::size_t i = 0; i < sys.space_dim; ++i) {
    auto ai_eval = sys.a[i].eval;
    adj.a[i].eval = [ai_eval](const ParamPoint& mu, const SpacePoint& x) {
      const DenseMatrix ai = ai_eval(mu, x);
      DenseMatrix out(ai.rows(), ai.cols());
      for (std::size_t r = 0; r < ai.rows(); ++r)
        for (std::size_t c = 0; c < ai.cols(); ++c) out(r, c) = -ai(c, r);
      return out;
    };
  }
  if (sys.div_a) {
    auto dv_eval = sys.div_a->eval;
    adj.div_a->eval = [dv_eval](const ParamPoint& mu, const SpacePoint& x) {
      const DenseMatrix dv = dv_eval(mu, x);
      DenseMatrix out(dv.rows(), dv.cols());
      for (std::size_t r = 0; r < dv.rows(); ++r)
        for (std::size_t c = 0; c < dv.cols(); ++c) out(r, c) = -dv(c, r);
      return out;
    };
  }

  // adjoint boundary operator: M^T
  BoundaryOperatorSpec bnd;
  bnd.kind = BoundaryOperatorSpec::Kind::Custom;
  bnd.param_independent = sys.boundary.param_independent;
  FriedrichsSystem primal_copy = sys;
  bnd.custom = [primal_copy](const ParamPoint& mu, const SpacePoint& x, const SpacePoint& n) {
    return primal_copy.boundary_matrix(mu, x, n).transposed();
  };
  adj.boundary = bnd;

  // expansion/N1 metadata describes the primal operator; drop it here
  adj.expansion.reset();
  adj.n1.reset();
  return adj;
}

} // namespace fsw::model
