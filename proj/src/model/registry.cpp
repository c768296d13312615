#include "fsw/model/registry.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "fsw/la/factor.hpp"

namespace fsw::model {

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

void check_override_keys(const json& overrides, const std::set<std::string>& allowed,
                         const std::string& id) {
  if (!overrides.is_object()) throw Error("registry_get: overrides must be a JSON object");
  for (auto it = overrides.begin(); it != overrides.end(); ++it) {
    if (!allowed.count(it.key()))
      throw Error("registry_get(" + id + "): unknown override key '" + it.key() + "'");
  }
}

void apply_param_box(FriedrichsSystem& sys, const json& overrides) {
  if (!overrides.contains("param_box")) return;
  const auto& pb = overrides.at("param_box");
  if (!pb.is_array() || pb.size() != sys.params.bounds.size())
    throw Error("registry_get: param_box must have " + std::to_string(sys.params.bounds.size()) +
                " [lo,hi] pairs");
  for (std::size_t i = 0; i < sys.params.bounds.size(); ++i) {
    sys.params.bounds[i][0] = pb.at(i).at(0).get<double>();
    sys.params.bounds[i][1] = pb.at(i).at(1).get<double>();
  }
  sys.params.check_valid();
}

// FS2 margin sampled over a fine parameter grid (coefficients are constant in
// x for all registry systems), with a small safety factor.
double sampled_epsilon_bound(const FriedrichsSystem& sys, std::size_t per_axis = 17) {
  const std::size_t p = sys.params.dimension();
  std::vector<std::size_t> idx(p, 0);
  double eps = std::numeric_limits<double>::infinity();
  const SpacePoint x0{0.5 * (sys.domain.lo[0] + sys.domain.hi[0]),
                      sys.space_dim > 1 ? 0.5 * (sys.domain.lo[1] + sys.domain.hi[1]) : 0.0};
  while (true) {
    ParamPoint mu(p);
    for (std::size_t i = 0; i < p; ++i) {
      const auto& b = sys.params.bounds[i];
      mu[i] = b[0] + (b[1] - b[0]) * (static_cast<double>(idx[i]) / (per_axis - 1));
    }
    const DenseMatrix a0 = sys.a0.eval(mu, x0);
    const DenseMatrix dv = sys.divergence(mu, x0);
    // a0 + a0^T - div, symmetrized
    DenseMatrix sym(sys.state_dim, sys.state_dim);
    for (std::size_t r = 0; r < sys.state_dim; ++r)
      for (std::size_t c = 0; c < sys.state_dim; ++c) sym(r, c) = a0(r, c) + a0(c, r) - dv(r, c);
    for (std::size_t r = 0; r < sys.state_dim; ++r)
      for (std::size_t c = r + 1; c < sys.state_dim; ++c) {
        const double v = 0.5 * (sym(r, c) + sym(c, r));
        sym(r, c) = sym(c, r) = v;
      }
    eps = std::min(eps, 0.5 * la::sym_eig(sym).values.front());

    std::size_t axis = 0;
    while (axis < p && ++idx[axis] == per_axis) idx[axis++] = 0;
    if (axis == p) break;
  }
  return 0.99 * eps;
}

CoefficientField zero_matrix_field(std::size_t d, std::size_t m) {
  return CoefficientField::constant(d, DenseMatrix(m, m, 0.0));
}

// ---- scalar advection-reaction -------------------------------------------

FriedrichsSystem make_advection_reaction(std::size_t d, const std::vector<double>& b_fixed,
                                         double f_value) {
  FriedrichsSystem sys;
  sys.space_dim = d;
  sys.state_dim = 1;
  sys.domain.dim = d;
  sys.domain.lo = {0.0, 0.0};
  sys.domain.hi = {1.0, 1.0};
  sys.params.bounds = {{1.0, 10.0}};
  sys.params.names = {"c"};

  sys.a0 = CoefficientField::scalar(
      d, [](const ParamPoint& mu, const SpacePoint&) { return mu[0]; }, Smoothness::Constant);
  for (std::size_t i = 0; i < d; ++i) {
    DenseMatrix bi(1, 1);
    bi(0, 0) = b_fixed[i];
    sys.a.push_back(CoefficientField::constant(d, bi));
  }
  sys.div_a = zero_matrix_field(d, 1);
  sys.rhs = SourceField::constant(d, Vector{f_value});
  sys.boundary.kind = BoundaryOperatorSpec::Kind::SpectralAbs;
  sys.boundary.param_independent = true;
  sys.denseness_d1_d2 = true;

  N1Structure n1;
  n1.kappa = 1.0;
  n1.a_hat = [](const ParamPoint&, const SpacePoint&) { return 1.0; };
  n1.tilde = sys.a;
  sys.n1 = n1;

  SeparableExpansion exp;
  ExpansionTerm transport;
  transport.piece = ExpansionTerm::Piece::Transport;
  transport.theta = [](const ParamPoint&) { return 1.0; };
  exp.terms.push_back(transport);
  ExpansionTerm react;
  react.piece = ExpansionTerm::Piece::Reaction;
  react.theta = [](const ParamPoint& mu) { return mu[0]; };
  react.a0 = CoefficientField::constant(d, DenseMatrix::identity(1));
  exp.terms.push_back(react);
  RhsTerm rt;
  rt.theta = [](const ParamPoint&) { return 1.0; };
  rt.f = sys.rhs;
  exp.rhs_terms.push_back(rt);
  sys.expansion = exp;
  return sys;
}

FriedrichsSystem make_rotating_advection(double mu_lo, double mu_hi, double c_fixed,
                                         bool denseness) {
  FriedrichsSystem sys;
  sys.space_dim = 2;
  sys.state_dim = 1;
  sys.domain.dim = 2;
  sys.domain.lo = {0.0, 0.0};
  sys.domain.hi = {1.0, 1.0};
  sys.params.bounds = {{mu_lo, mu_hi}};
  sys.params.names = {"angle"};

  sys.a0 = CoefficientField::scalar(
      2, [c_fixed](const ParamPoint&, const SpacePoint&) { return c_fixed; },
      Smoothness::Constant);
  sys.a.push_back(CoefficientField::scalar(
      2, [](const ParamPoint& mu, const SpacePoint&) { return std::cos(mu[0]); },
      Smoothness::Constant));
  sys.a.push_back(CoefficientField::scalar(
      2, [](const ParamPoint& mu, const SpacePoint&) { return std::sin(mu[0]); },
      Smoothness::Constant));
  sys.div_a = zero_matrix_field(2, 1);
  sys.rhs = SourceField::constant(2, Vector{1.0});
  sys.boundary.kind = BoundaryOperatorSpec::Kind::SpectralAbs;
  sys.boundary.param_independent = false;
  sys.denseness_d1_d2 = denseness;
  return sys;
}

// ---- convection-diffusion-reaction in total-flux form ---------------------

FriedrichsSystem make_cdr(std::size_t d, const std::vector<double>& direction) {
  FriedrichsSystem sys;
  const std::size_t m = d + 1;
  sys.space_dim = d;
  sys.state_dim = m;
  sys.domain.dim = d;
  sys.domain.lo = {0.0, 0.0};
  sys.domain.hi = {1.0, 1.0};
  sys.params.bounds = {{0.5, 2.0}, {0.0, 1.0}, {1.0, 2.0}};
  sys.params.names = {"diffusivity", "advection", "reaction"};

  CoefficientField a0;
  a0.space_dim = d;
  a0.state_dim = m;
  a0.smoothness = Smoothness::Constant;
  a0.eval = [d, m, direction](const ParamPoint& mu, const SpacePoint&) {
    const double diff = mu[0], adv = mu[1], reac = mu[2];
    DenseMatrix out(m, m);
    for (std::size_t i = 0; i < d; ++i) {
      out(i, i) = 1.0 / diff;
      out(i, d) = -adv * direction[i] / diff;
    }
    out(d, d) = reac;
    return out;
  };
  sys.a0 = a0;

  for (std::size_t i = 0; i < d; ++i) {
    DenseMatrix ai(m, m);
    ai(i, d) = 1.0;
    ai(d, i) = 1.0;
    sys.a.push_back(CoefficientField::constant(d, ai));
  }
  sys.div_a = zero_matrix_field(d, m);
  Vector f(m, 0.0);
  f[d] = 1.0;
  sys.rhs = SourceField::constant(d, f);
  sys.boundary.kind = BoundaryOperatorSpec::Kind::DirichletPrimal;
  sys.boundary.primal_indices = {d};
  sys.boundary.param_independent = true;
  sys.denseness_d1_d2 = true;

  N1Structure n1;
  n1.kappa = 1.0;
  n1.a_hat = [](const ParamPoint&, const SpacePoint&) { return 1.0; };
  n1.tilde = sys.a;
  sys.n1 = n1;

  SeparableExpansion exp;
  ExpansionTerm transport;
  transport.piece = ExpansionTerm::Piece::Transport;
  transport.theta = [](const ParamPoint&) { return 1.0; };
  exp.terms.push_back(transport);
  // A0(mu) = (1/D) P_flux + (-b/D) P_coupling + c P_primal
  {
    ExpansionTerm t;
    t.piece = ExpansionTerm::Piece::Reaction;
    t.theta = [](const ParamPoint& mu) { return 1.0 / mu[0]; };
    DenseMatrix p(m, m);
    for (std::size_t i = 0; i < d; ++i) p(i, i) = 1.0;
    t.a0 = CoefficientField::constant(d, p);
    exp.terms.push_back(t);
  }
  {
    ExpansionTerm t;
    t.piece = ExpansionTerm::Piece::Reaction;
    t.theta = [](const ParamPoint& mu) { return -mu[1] / mu[0]; };
    DenseMatrix p(m, m);
    for (std::size_t i = 0; i < d; ++i) p(i, d) = direction[i];
    t.a0 = CoefficientField::constant(d, p);
    exp.terms.push_back(t);
  }
  {
    ExpansionTerm t;
    t.piece = ExpansionTerm::Piece::Reaction;
    t.theta = [](const ParamPoint& mu) { return mu[2]; };
    DenseMatrix p(m, m);
    p(d, d) = 1.0;
    t.a0 = CoefficientField::constant(d, p);
    exp.terms.push_back(t);
  }
  RhsTerm rt;
  rt.theta = [](const ParamPoint&) { return 1.0; };
  rt.f = sys.rhs;
  exp.rhs_terms.push_back(rt);
  sys.expansion = exp;
  return sys;
}

// ---- linear elasticity (stress/displacement first-order form) -------------

FriedrichsSystem make_elasticity(double gamma) {
  // state: (s11, sqrt(2) s12, s22, rho, u1, u2); rho = -lambda div(u),
  // displacements carry a reaction term gamma*u so the positivity condition
  // holds strictly.
  FriedrichsSystem sys;
  const std::size_t m = 6;
  sys.space_dim = 2;
  sys.state_dim = m;
  sys.domain.dim = 2;
  sys.domain.lo = {0.0, 0.0};
  sys.domain.hi = {1.0, 1.0};
  sys.params.bounds = {{1.0, 2.0}, {1.0, 2.0}};
  sys.params.names = {"lame_lambda", "lame_mu"};
  sys.solve_supported = false;

  CoefficientField a0;
  a0.space_dim = 2;
  a0.state_dim = m;
  a0.smoothness = Smoothness::Constant;
  a0.eval = [gamma](const ParamPoint& mu, const SpacePoint&) {
    const double q = 2.0 + 2.0 * mu[1] / mu[0];
    DenseMatrix out(6, 6);
    out(0, 0) = 1.0;
    out(0, 3) = 1.0;
    out(1, 1) = 1.0;
    out(2, 2) = 1.0;
    out(2, 3) = 1.0;
    out(3, 0) = 1.0;
    out(3, 2) = 1.0;
    out(3, 3) = q;
    out(4, 4) = gamma;
    out(5, 5) = gamma;
    return out;
  };
  sys.a0 = a0;

  const double r2 = 1.0 / std::sqrt(2.0);
  DenseMatrix a1(m, m), a2(m, m);
  a1(0, 4) = a1(4, 0) = -1.0;
  a1(1, 5) = a1(5, 1) = -r2;
  a2(1, 4) = a2(4, 1) = -r2;
  a2(2, 5) = a2(5, 2) = -1.0;
  sys.a.push_back(CoefficientField::constant(2, a1));
  sys.a.push_back(CoefficientField::constant(2, a2));
  sys.div_a = zero_matrix_field(2, m);
  sys.rhs = SourceField::constant(2, Vector{0.0, 0.0, 0.0, 0.0, 1.0, 0.0});
  sys.boundary.kind = BoundaryOperatorSpec::Kind::DirichletPrimal;
  sys.boundary.primal_indices = {4, 5};
  sys.boundary.param_independent = true;
  sys.denseness_d1_d2 = true;

  N1Structure n1;
  n1.kappa = 1.0;
  n1.a_hat = [](const ParamPoint&, const SpacePoint&) { return 1.0; };
  n1.tilde = sys.a;
  sys.n1 = n1;

  SeparableExpansion exp;
  ExpansionTerm transport;
  transport.piece = ExpansionTerm::Piece::Transport;
  transport.theta = [](const ParamPoint&) { return 1.0; };
  exp.terms.push_back(transport);
  {
    ExpansionTerm t;
    t.piece = ExpansionTerm::Piece::Reaction;
    t.theta = [](const ParamPoint&) { return 1.0; };
    DenseMatrix c(m, m);
    c(0, 0) = 1.0;
    c(0, 3) = 1.0;
    c(1, 1) = 1.0;
    c(2, 2) = 1.0;
    c(2, 3) = 1.0;
    c(3, 0) = 1.0;
    c(3, 2) = 1.0;
    c(3, 3) = 2.0;
    c(4, 4) = gamma;
    c(5, 5) = gamma;
    t.a0 = CoefficientField::constant(2, c);
    exp.terms.push_back(t);
  }
  {
    ExpansionTerm t;
    t.piece = ExpansionTerm::Piece::Reaction;
    t.theta = [](const ParamPoint& mu) { return 2.0 * mu[1] / mu[0]; };
    DenseMatrix c(m, m);
    c(3, 3) = 1.0;
    t.a0 = CoefficientField::constant(2, c);
    exp.terms.push_back(t);
  }
  RhsTerm rt;
  rt.theta = [](const ParamPoint&) { return 1.0; };
  rt.f = sys.rhs;
  exp.rhs_terms.push_back(rt);
  sys.expansion = exp;
  return sys;
}

} // namespace

std::vector<std::string> registry_ids() {
  return {"advection-reaction-1d",       "advection-reaction-2d-case1",
          "advection-reaction-2d-case2", "advection-reaction-2d-case3",
          "cdr-1d",                      "cdr-2d",
          "elasticity-2d"};
}

FriedrichsSystem registry_get(const std::string& id, const json& overrides) {
  FriedrichsSystem sys;
  if (id == "advection-reaction-1d") {
    check_override_keys(overrides, {"param_box", "b", "f"}, id);
    const double b = overrides.value("b", 1.0);
    const double f = overrides.value("f", 1.0);
    sys = make_advection_reaction(1, {b}, f);
  } else if (id == "advection-reaction-2d-case1") {
    check_override_keys(overrides, {"param_box", "bx", "by", "f"}, id);
    const double bx = overrides.value("bx", 1.0);
    const double by = overrides.value("by", 0.5);
    const double f = overrides.value("f", 1.0);
    sys = make_advection_reaction(2, {bx, by}, f);
  } else if (id == "advection-reaction-2d-case2") {
    check_override_keys(overrides, {"param_box", "c"}, id);
    sys = make_rotating_advection(0.1, 0.5 * kPi - 0.1, overrides.value("c", 1.0), true);
  } else if (id == "advection-reaction-2d-case3") {
    check_override_keys(overrides, {"param_box", "c"}, id);
    sys = make_rotating_advection(0.0, 2.0 * kPi, overrides.value("c", 1.0), false);
  } else if (id == "cdr-1d") {
    check_override_keys(overrides, {"param_box"}, id);
    sys = make_cdr(1, {1.0});
  } else if (id == "cdr-2d") {
    check_override_keys(overrides, {"param_box"}, id);
    sys = make_cdr(2, {0.6, 0.8});
  } else if (id == "elasticity-2d") {
    check_override_keys(overrides, {"param_box", "gamma"}, id);
    sys = make_elasticity(overrides.value("gamma", 1.0));
  } else {
    std::string msg = "registry_get: unknown system '" + id + "'; available:";
    for (const auto& known : registry_ids()) msg += " " + known;
    throw Error(msg);
  }
  sys.id = id;
  apply_param_box(sys, overrides);
  // declared FS2 margin; non-positive values surface later through
  // validate_friedrichs / assembly rather than here
  sys.epsilon_bound = sampled_epsilon_bound(sys);
  sys.check_consistent();
  return sys;
}

json system_to_json(const FriedrichsSystem& sys) {
  json doc;
  doc["id"] = sys.id;
  doc["d"] = sys.space_dim;
  doc["m"] = sys.state_dim;
  json pb = json::array();
  for (const auto& b : sys.params.bounds) pb.push_back({b[0], b[1]});
  doc["parameter_box"] = pb;
  doc["flags"] = {{"n1_structure", sys.n1.has_value()},
                  {"kappa", sys.n1 ? sys.n1->kappa : 0.0},
                  {"denseness_d1_d2", sys.denseness_d1_d2},
                  {"param_independent_boundary", sys.boundary.param_independent},
                  {"separable", sys.expansion.has_value()},
                  {"solve_supported", sys.solve_supported},
                  {"epsilon_bound", sys.epsilon_bound}};
  json coeffs;
  coeffs["a0"] = {{"tag", "registry"}, {"constant_in_x", true}};
  coeffs["first_order"] = {{"tag", "registry"}, {"count", sys.a.size()}};
  doc["coefficients"] = coeffs;
  return doc;
}

FriedrichsSystem system_from_json(const json& doc) {
  if (!doc.contains("id")) throw Error("system_from_json: missing 'id'");
  json overrides = json::object();
  if (doc.contains("parameter_box")) overrides["param_box"] = doc.at("parameter_box");
  FriedrichsSystem sys = registry_get(doc.at("id").get<std::string>(), overrides);
  if (doc.contains("d") && doc.at("d").get<std::size_t>() != sys.space_dim)
    throw Error("system_from_json: dimension mismatch for id " + sys.id);
  if (doc.contains("m") && doc.at("m").get<std::size_t>() != sys.state_dim)
    throw Error("system_from_json: state dimension mismatch for id " + sys.id);
  return sys;
}

} // namespace fsw::model
