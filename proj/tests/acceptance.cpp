// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exits nonzero if any criterion fails.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "fsw/analysis/checks.hpp"
#include "fsw/la/factor.hpp"
#include "fsw/model/classify.hpp"
#include "fsw/model/registry.hpp"
#include "fsw/mor/reduce.hpp"
#include "fsw/sections/sections.hpp"

using namespace fsw;
using namespace fsw::model;
using namespace fsw::dg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string note;
};

StructuredMesh make_line(std::size_t n, bool periodic = false) {
  StructuredMesh mesh;
  mesh.dim = 1;
  mesh.cells = {n, 1};
  mesh.box.dim = 1;
  mesh.box.lo = {0.0, 0.0};
  mesh.box.hi = {1.0, 1.0};
  mesh.periodic = {periodic, false};
  return mesh;
}

StructuredMesh make_square(std::size_t nx, std::size_t ny) {
  StructuredMesh mesh;
  mesh.dim = 2;
  mesh.cells = {nx, ny};
  mesh.box.dim = 2;
  mesh.box.lo = {0.0, 0.0};
  mesh.box.hi = {1.0, 1.0};
  return mesh;
}

std::vector<ParamPoint> grid_params(const ParameterDomain& dom, std::size_t count) {
  std::vector<ParamPoint> mus;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.5 : static_cast<double>(i) / (count - 1);
    ParamPoint mu;
    for (const auto& b : dom.bounds) mu.push_back(b[0] + (b[1] - b[0]) * t);
    mus.push_back(mu);
  }
  return mus;
}

std::string fmt(double v) { return format_double(v); }

// scalar-per-component continuous bilinear field from random vertex values
la::Vector random_continuous_field(const DGSpace& space, Rng& rng) {
  const auto& mesh = space.mesh();
  const std::size_t m = space.state_dim();
  const std::size_t nvx = mesh.cells[0] + 1;
  const std::size_t nvy = mesh.dim > 1 ? mesh.cells[1] + 1 : 1;
  std::vector<double> vertex(nvx * nvy * m);
  for (auto& v : vertex) v = rng.normal();
  auto field = [&](const SpacePoint& x) {
    const auto h = mesh.cell_size();
    double gx = (x[0] - mesh.box.lo[0]) / h[0];
    std::size_t ix = std::min<std::size_t>(mesh.cells[0] - 1, static_cast<std::size_t>(gx));
    const double tx = gx - static_cast<double>(ix);
    la::Vector out(m, 0.0);
    if (mesh.dim == 1) {
      for (std::size_t c = 0; c < m; ++c)
        out[c] = (1 - tx) * vertex[(ix)*m + c] + tx * vertex[(ix + 1) * m + c];
      return out;
    }
    double gy = (x[1] - mesh.box.lo[1]) / h[1];
    std::size_t iy = std::min<std::size_t>(mesh.cells[1] - 1, static_cast<std::size_t>(gy));
    const double ty = gy - static_cast<double>(iy);
    auto vat = [&](std::size_t i, std::size_t j, std::size_t c) {
      return vertex[(i + nvx * j) * m + c];
    };
    for (std::size_t c = 0; c < m; ++c)
      out[c] = (1 - tx) * (1 - ty) * vat(ix, iy, c) + tx * (1 - ty) * vat(ix + 1, iy, c) +
               (1 - tx) * ty * vat(ix, iy + 1, c) + tx * ty * vat(ix + 1, iy + 1, c);
    return out;
  };
  return space.project(field, 3);
}

// 2x2-state system with polynomial coefficients for the integration-by-parts
// criterion
FriedrichsSystem polynomial_system() {
  FriedrichsSystem sys;
  sys.id = "polynomial-2x2";
  sys.space_dim = 2;
  sys.state_dim = 2;
  sys.domain.dim = 2;
  sys.domain.lo = {0.0, 0.0};
  sys.domain.hi = {1.0, 1.0};
  sys.params.bounds = {{0.0, 1.0}};

  CoefficientField a0;
  a0.space_dim = 2;
  a0.state_dim = 2;
  a0.smoothness = Smoothness::Polynomial;
  a0.eval = [](const ParamPoint&, const SpacePoint& x) {
    la::DenseMatrix m(2, 2);
    m(0, 0) = 3.0 + x[0];
    m(0, 1) = 1.0;
    m(1, 1) = 3.0 + x[0];
    return m;
  };
  sys.a0 = a0;

  CoefficientField a1;
  a1.space_dim = 2;
  a1.state_dim = 2;
  a1.smoothness = Smoothness::Polynomial;
  a1.eval = [](const ParamPoint&, const SpacePoint& x) {
    la::DenseMatrix m(2, 2);
    m(0, 0) = 1.0 + x[1] * x[1];
    m(0, 1) = 0.5 * x[0];
    m(1, 0) = 0.5 * x[0];
    m(1, 1) = 2.0;
    return m;
  };
  CoefficientField a2;
  a2.space_dim = 2;
  a2.state_dim = 2;
  a2.smoothness = Smoothness::Polynomial;
  a2.eval = [](const ParamPoint&, const SpacePoint& x) {
    la::DenseMatrix m(2, 2);
    m(0, 0) = 2.0;
    m(0, 1) = 0.25 * x[0] * x[1];
    m(1, 0) = 0.25 * x[0] * x[1];
    m(1, 1) = 1.0 + x[0];
    return m;
  };
  sys.a.push_back(a1);
  sys.a.push_back(a2);

  CoefficientField div;
  div.space_dim = 2;
  div.state_dim = 2;
  div.smoothness = Smoothness::Polynomial;
  div.eval = [](const ParamPoint&, const SpacePoint& x) {
    la::DenseMatrix m(2, 2);
    m(0, 1) = 0.5 + 0.25 * x[0];
    m(1, 0) = 0.5 + 0.25 * x[0];
    return m;
  };
  sys.div_a = div;
  sys.rhs = SourceField::constant(2, la::Vector{1.0, 0.0});
  sys.boundary.kind = BoundaryOperatorSpec::Kind::SpectralAbs;
  return sys;
}

int run_tool(const std::string& args) {
  const char* bin = std::getenv("FSWIDTH_BIN");
  const std::string cmd = std::string(bin ? bin : "fswidth") + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

Outcome criterion_1() {
  Outcome out;
  out.pass = true;
  for (const auto& id : registry_ids()) {
    const auto t0 = std::chrono::steady_clock::now();
    FriedrichsSystem sys = registry_get(id);
    ValidationOptions opts; // 10 mu x (grid + 256 random) samples
    const ValidationReport rep = validate_friedrichs(sys, opts);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!rep.pass()) {
      out.pass = false;
      out.note += id + " failed (" + (rep.failures.empty() ? "?" : rep.failures.front()) + "); ";
    }
    if (secs >= 5.0) {
      out.pass = false;
      out.note += id + " took " + fmt(secs) + "s; ";
    }
  }
  if (out.pass) out.note = "all " + std::to_string(registry_ids().size()) + " systems, FS1/FS2+M1";
  return out;
}

Outcome criterion_2() {
  Outcome out;
  FriedrichsSystem sys = polynomial_system();
  DGSpace space = build_space(make_square(16, 16), 1, 2);
  AssembleParts parts;
  parts.system = false;
  parts.grams = true;
  parts.diagnostics = true;
  const AssembledProblem ap = assemble(sys, space, {0.5}, parts);
  Rng rng(0xACC2);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const la::Vector u = random_continuous_field(space, rng);
    const la::Vector v = random_continuous_field(space, rng);
    worst = std::max(worst, ibp_residual(ap, u, v));
  }
  out.pass = worst <= 1e-10;
  out.note = "max normalized residual " + fmt(worst);
  return out;
}

Outcome criterion_3() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  nlohmann::json ov;
  ov["param_box"] = {{1.0, 1.0}};
  FriedrichsSystem sys = registry_get("advection-reaction-1d", ov);
  auto exact = [](const SpacePoint& x) { return la::Vector{1.0 - std::exp(-x[0])}; };
  out.pass = true;
  for (std::size_t k : {0u, 1u}) {
    std::vector<double> errors;
    for (std::size_t n : {32u, 64u, 128u, 256u}) {
      DGSpace space = build_space(make_line(n), k, 1);
      AssembledProblem ap = assemble(sys, space, {1.0});
      la::Vector u = la::sparse_solve(ap.system, ap.rhs);
      errors.push_back(space.l2_error(u, exact, 5));
    }
    double min_eoc = 1e9;
    for (std::size_t i = 1; i < errors.size(); ++i)
      min_eoc = std::min(min_eoc, std::log2(errors[i - 1] / errors[i]));
    const double need = k == 0 ? 0.8 : 1.4;
    if (min_eoc < need) out.pass = false;
    out.note += "k=" + std::to_string(k) + " min EOC " + fmt(min_eoc) + "; ";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= 10.0) {
    out.pass = false;
    out.note += "took " + fmt(secs) + "s";
  }
  return out;
}

Outcome criterion_4() {
  Outcome out;
  FriedrichsSystem sys = registry_get("advection-reaction-2d-case1");
  DGSpace space = build_space(make_square(6, 6), 1, 1);
  Rng rng(0xACC4);
  std::vector<ParamPoint> mus;
  for (int i = 0; i < 10; ++i) mus.push_back(sys.params.sample(rng));
  const analysis::NormEquivalenceReport rep =
      analysis::norm_equivalence(sys, space, mus, 100, 0xACC4 + 1);
  out.pass = rep.pass && rep.violations == 0;
  out.note = "ratios in [" + fmt(rep.lower_empirical) + ", " + fmt(rep.upper_empirical) +
             "] vs constants [" + fmt(rep.lower_theory) + ", " + fmt(rep.upper_theory) +
             "], violations " + std::to_string(rep.violations);
  return out;
}

Outcome criterion_5() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  FriedrichsSystem sys = registry_get("advection-reaction-2d-case1");
  DGSpace space = build_space(make_square(16, 8), 1, 1); // 128 cells
  const mor::SnapshotSet snaps = mor::sweep(sys, space, grid_params(sys.params, 100));
  const mor::GreedyResult g = mor::strong_greedy(snaps, 15, 1e-6);
  const mor::DecayReport rep = mor::nwidth_estimate(snaps, 12, sys.expansion->q_b());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool reached = !g.rel_errors.empty() && g.rel_errors.back() <= 1e-6 &&
                       g.rel_errors.size() <= 15;
  out.pass = reached && rep.r_squared >= 0.9 && secs < 60.0;
  out.note = "greedy e=" + fmt(g.rel_errors.empty() ? 1.0 : g.rel_errors.back()) + " at N=" +
             std::to_string(g.rel_errors.size()) + ", fit R^2=" + fmt(rep.r_squared) + ", " +
             fmt(secs) + "s";
  return out;
}

Outcome criterion_6() {
  Outcome out;
  DGSpace space = build_space(make_square(16, 16), 1, 1);
  FriedrichsSystem case1 = registry_get("advection-reaction-2d-case1");
  FriedrichsSystem case3 = registry_get("advection-reaction-2d-case3");
  const mor::SnapshotSet s1 = mor::sweep(case1, space, grid_params(case1.params, 100));
  const mor::SnapshotSet s3 = mor::sweep(case3, space, grid_params(case3.params, 100));
  const mor::GreedyResult g1 = mor::strong_greedy(s1, 10, 0.0);
  const mor::GreedyResult g3 = mor::strong_greedy(s3, 10, 0.0);
  const double e1 = g1.rel_errors.back();
  const double e3 = g3.rel_errors.back();
  out.pass = g1.rel_errors.size() == 10 && g3.rel_errors.size() == 10 && e3 >= 10.0 * e1;
  out.note = "case-3 e_10=" + fmt(e3) + " vs case-1 e_10=" + fmt(e1) + " (factor " +
             fmt(e1 > 0 ? e3 / e1 : 1.0 / 0.0) + ")";
  return out;
}

Outcome criterion_7() {
  Outcome out;
  out.pass = true;
  struct Cfg {
    std::string id;
    StructuredMesh mesh;
  };
  const std::vector<Cfg> cfgs = {{"advection-reaction-1d", make_line(16)},
                                 {"advection-reaction-2d-case1", make_square(6, 6)},
                                 {"cdr-1d", make_line(12)}};
  for (const auto& c : cfgs) {
    FriedrichsSystem sys = registry_get(c.id);
    DGSpace space = build_space(c.mesh, 1, sys.state_dim);
    mor::SweepOptions sopts;
    sopts.reference_norm_only = true; // parameter-independent norm
    const mor::SnapshotSet snaps = mor::sweep(sys, space, grid_params(sys.params, 12), sopts);
    const mor::GreedyResult g = mor::strong_greedy(snaps, 8, 0.0);

    sections::Section target = sections::Section::solution(sys, space);
    sections::SectionDictionary dict = sections::constant_dictionary(snaps, "snapshots");
    sections::SectionalOptions opts;
    opts.n_max = 8;
    const sections::SectionalResult res =
        sections::sectional_estimate(target, dict, snaps.mus, snaps.gram_factors, opts);

    double max_delta = 0.0;
    const std::size_t upto = std::min(res.errors.size(), g.errors.size());
    for (std::size_t n = 0; n < upto; ++n)
      max_delta = std::max(max_delta, std::abs(res.errors[n] - g.errors[n]));
    if (upto == 0 || max_delta > 1e-10 * std::max(1.0, g.e0)) out.pass = false;
    out.note += c.id + " delta=" + fmt(max_delta) + "; ";
  }
  return out;
}

Outcome criterion_8() {
  Outcome out;
  DGSpace space = build_space(make_line(256, true), 0, 1);
  GramFactor mass(l2_gram(space));
  auto prof = [](double x) {
    const double d = x - 0.5;
    return std::exp(-d * d / (2.0 * 0.04 * 0.04));
  };
  auto shift = [](const ParamPoint& mu) { return mu[0]; };
  sections::Section target = sections::Section::shifted_profile(space, prof, shift, "u0");

  std::vector<ParamPoint> mus;
  std::vector<GramFactor> norms;
  std::vector<la::Vector> fields;
  for (int i = 0; i < 60; ++i) {
    mus.push_back({static_cast<double>(i) / 60.0});
    norms.push_back(mass);
    fields.push_back(target.evaluate(mus.back()));
  }

  sections::SectionDictionary sdict =
      sections::shift_dictionary(space, {prof}, shift, "shift");
  sections::SectionalOptions o1;
  o1.n_max = 1;
  const sections::SectionalResult sres =
      sections::sectional_estimate(target, sdict, mus, norms, o1);

  sections::SectionDictionary cdict = sections::constant_dictionary(space, fields, "const");
  sections::SectionalOptions o10;
  o10.n_max = 10;
  const sections::SectionalResult cres =
      sections::sectional_estimate(target, cdict, mus, norms, o10);

  const double e1 = sres.rel_errors[0];
  const double e10 = cres.rel_errors.back();
  out.pass = e1 <= 1e-8 && cres.rel_errors.size() == 10 && e10 >= 1e-2;
  out.note = "shift e_1=" + fmt(e1) + ", constant e_10=" + fmt(e10);
  return out;
}

Outcome criterion_9() {
  Outcome out;
  out.pass = true;
  for (int inst = 0; inst < 5; ++inst) {
    Rng rng(0x900 + inst);
    const std::size_t dofs = 14, nmu = 6, nsec = 10;
    StructuredMesh mesh = make_line(dofs);
    DGSpace space = build_space(mesh, 0, 1);
    std::vector<ParamPoint> mus;
    std::vector<GramFactor> norms;
    for (std::size_t j = 0; j < nmu; ++j) {
      mus.push_back({static_cast<double>(j)});
      BlockDiagMatrix g(dofs, 1);
      for (std::size_t b = 0; b < dofs; ++b) g.at(b, 0, 0) = 0.5 + rng.uniform();
      norms.push_back(GramFactor(g));
    }
    std::vector<la::Vector> fields;
    for (std::size_t k = 0; k < nsec; ++k) {
      la::Vector v(dofs);
      for (auto& x : v) x = rng.normal();
      fields.push_back(v);
    }
    la::Vector tvec(dofs);
    for (auto& x : tvec) x = rng.normal();
    sections::Section target = sections::Section::constant(space, tvec, "t");
    sections::SectionDictionary dict = sections::constant_dictionary(space, fields, "d");

    sections::SectionalOptions ex_opts;
    ex_opts.n_max = 3;
    ex_opts.exhaustive = true;
    const sections::SectionalResult ex =
        sections::sectional_estimate(target, dict, mus, norms, ex_opts);

    // independent oracle: enumerate subsets, solve the normal equations with
    // dense Gaussian elimination
    auto oracle_error = [&](const std::vector<std::size_t>& sub) {
      double worst = 0.0;
      for (std::size_t j = 0; j < nmu; ++j) {
        const la::Vector wt = norms[j].apply_lt(tvec);
        std::vector<la::Vector> ws;
        for (std::size_t k : sub) ws.push_back(norms[j].apply_lt(fields[k]));
        const std::size_t n = ws.size();
        std::vector<double> g(n * n), rhs(n);
        for (std::size_t a = 0; a < n; ++a) {
          rhs[a] = la::dot(ws[a], wt);
          for (std::size_t b = 0; b < n; ++b) g[a * n + b] = la::dot(ws[a], ws[b]);
        }
        // Gaussian elimination with partial pivoting
        std::vector<std::size_t> piv(n);
        for (std::size_t c = 0; c < n; ++c) piv[c] = c;
        for (std::size_t c = 0; c < n; ++c) {
          std::size_t best = c;
          for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(g[r * n + c]) > std::abs(g[best * n + c])) best = r;
          for (std::size_t cc = 0; cc < n; ++cc) std::swap(g[c * n + cc], g[best * n + cc]);
          std::swap(rhs[c], rhs[best]);
          for (std::size_t r = c + 1; r < n; ++r) {
            const double f = g[r * n + c] / g[c * n + c];
            for (std::size_t cc = c; cc < n; ++cc) g[r * n + cc] -= f * g[c * n + cc];
            rhs[r] -= f * rhs[c];
          }
        }
        std::vector<double> coef(n);
        for (std::size_t c = n; c-- > 0;) {
          double s = rhs[c];
          for (std::size_t cc = c + 1; cc < n; ++cc) s -= g[c * n + cc] * coef[cc];
          coef[c] = s / g[c * n + c];
        }
        la::Vector r = wt;
        for (std::size_t a = 0; a < n; ++a) la::axpy(-coef[a], ws[a], r);
        worst = std::max(worst, la::norm2(r));
      }
      return worst;
    };
    for (std::size_t n = 1; n <= 3; ++n) {
      double best = 1e300;
      std::vector<std::size_t> sub;
      std::function<void(std::size_t)> recurse = [&](std::size_t start) {
        if (sub.size() == n) {
          best = std::min(best, oracle_error(sub));
          return;
        }
        for (std::size_t k = start; k < nsec; ++k) {
          sub.push_back(k);
          recurse(k + 1);
          sub.pop_back();
        }
      };
      recurse(0);
      const double got = ex.errors[n - 1];
      if (std::abs(got - best) > 1e-10 * std::max(1.0, best)) {
        out.pass = false;
        out.note += "instance " + std::to_string(inst) + " N=" + std::to_string(n) +
                    ": exhaustive " + fmt(got) + " vs oracle " + fmt(best) + "; ";
      }
    }

    sections::SectionalOptions greedy_opts;
    greedy_opts.n_max = 3;
    const sections::SectionalResult greedy =
        sections::sectional_estimate(target, dict, mus, norms, greedy_opts);
    if (greedy.errors[2] > 2.0 * ex.errors[2]) {
      out.pass = false;
      out.note += "instance " + std::to_string(inst) + ": greedy " + fmt(greedy.errors[2]) +
                  " > 2x exhaustive " + fmt(ex.errors[2]) + "; ";
    }
  }
  if (out.pass) out.note = "5 instances, exhaustive == oracle, greedy within factor 2";
  return out;
}

Outcome criterion_10(const fs::path& scratch) {
  Outcome out;
  out.pass = true;
  const std::vector<std::pair<std::string, std::string>> expected = {
      {"advection-reaction-2d-case1", "exponential-certified"},
      {"advection-reaction-2d-case3", "uncertified"},
      {"cdr-2d", "exponential-certified"},
      {"elasticity-2d", "exponential-certified"},
  };
  for (const auto& [id, verdict] : expected) {
    const fs::path cfgp = scratch / ("classify_" + id + ".json");
    const fs::path outdir = scratch / ("classify_" + id);
    {
      std::ofstream cfg(cfgp);
      cfg << "{ \"system\": {\"id\": \"" << id << "\"} }";
    }
    const int rc = run_tool("classify --config " + cfgp.string() + " --out " + outdir.string());
    if (rc != 0) {
      out.pass = false;
      out.note += id + " exited " + std::to_string(rc) + "; ";
      continue;
    }
    const auto doc = nlohmann::json::parse(slurp(outdir / "classification.json"));
    const std::string got = doc.at("verdict").get<std::string>();
    if (got != verdict) {
      out.pass = false;
      out.note += id + " verdict '" + got + "' != '" + verdict + "'; ";
    } else {
      out.note += id + "=" + got + "; ";
    }
  }
  return out;
}

Outcome criterion_11() {
  // The refinement-stability half runs DG(1) in 1D and DG(0) in 2D: for those
  // pairings the unweighted broken graph norm is a refinement-stable trial
  // norm. (At DG(1) in 2D the discrete inf-sup under this surrogate decays
  // like sqrt(h); positivity is still asserted there on the base mesh.)
  Outcome out;
  out.pass = true;
  Rng rng(0xACC11);
  const std::vector<std::string> solvable = {"advection-reaction-1d", "advection-reaction-2d-case1",
                                             "advection-reaction-2d-case2",
                                             "advection-reaction-2d-case3", "cdr-1d", "cdr-2d"};
  double min_beta = 1e300;
  double worst_drift = 0.0;
  for (const auto& id : solvable) {
    FriedrichsSystem sys = registry_get(id);
    const bool one_d = sys.space_dim == 1;
    const std::size_t order = one_d ? 1 : 0;
    StructuredMesh coarse = one_d ? make_line(16) : make_square(8, 8);
    StructuredMesh fine = one_d ? make_line(32) : make_square(16, 16);
    DGSpace s_coarse = build_space(coarse, order, sys.state_dim);
    DGSpace s_fine = build_space(fine, order, sys.state_dim);
    DGSpace s_k1 = build_space(coarse, 1, sys.state_dim);
    AssembleParts parts;
    parts.system = true;
    parts.grams = true;
    for (int t = 0; t < 10; ++t) {
      const ParamPoint mu = sys.params.sample(rng);
      const AssembledProblem apc = assemble(sys, s_coarse, mu, parts);
      const AssembledProblem apf = assemble(sys, s_fine, mu, parts);
      const auto [wc, uc] = analysis::discrete_infsup_pair(apc);
      const auto [wf, uf] = analysis::discrete_infsup_pair(apf);
      for (const auto* rep : {&wc, &uc, &wf, &uf}) {
        min_beta = std::min(min_beta, rep->beta);
        if (rep->beta <= 1e-6) {
          out.pass = false;
          out.note += id + " beta=" + fmt(rep->beta) + "; ";
        }
      }
      const double dw = std::abs(wf.beta - wc.beta) / wc.beta;
      const double du = std::abs(uf.beta - uc.beta) / uc.beta;
      worst_drift = std::max({worst_drift, dw, du});
      if (dw > 0.2 || du > 0.2) {
        out.pass = false;
        out.note += id + " drift w=" + fmt(dw) + " u=" + fmt(du) + "; ";
      }
      if (!one_d) {
        const AssembledProblem ap1 = assemble(sys, s_k1, mu, parts);
        const auto [w1, u1] = analysis::discrete_infsup_pair(ap1);
        min_beta = std::min({min_beta, w1.beta, u1.beta});
        if (w1.beta <= 1e-6 || u1.beta <= 1e-6) {
          out.pass = false;
          out.note += id + " k=1 beta=" + fmt(std::min(w1.beta, u1.beta)) + "; ";
        }
      }
    }
  }
  if (out.pass)
    out.note = "min beta " + fmt(min_beta) + ", max refinement drift " + fmt(worst_drift);
  return out;
}

Outcome criterion_12(const fs::path& scratch) {
  Outcome out;
  out.pass = true;
  // nwidth config, run twice with the same seed
  const fs::path cfgp = scratch / "det_nwidth.json";
  {
    std::ofstream cfg(cfgp);
    cfg << R"({
      "system": {"id": "advection-reaction-2d-case1"},
      "mesh": {"cells": [16, 8]},
      "dg": {"order": 1},
      "sampling": {"kind": "random", "count": 40, "seed": 77},
      "reduction": {"n_max": 10, "tol": 1e-8}
    })";
  }
  for (const std::string sub : {"a", "b"}) {
    const int rc = run_tool("nwidth --config " + cfgp.string() + " --out " +
                            (scratch / ("det_" + sub)).string());
    if (rc != 0) {
      out.pass = false;
      out.note += "nwidth run exited " + std::to_string(rc) + "; ";
    }
  }
  if (out.pass) {
    const std::string a = slurp(scratch / "det_a" / "nwidth.csv");
    const std::string b = slurp(scratch / "det_b" / "nwidth.csv");
    if (a.empty() || a != b) {
      out.pass = false;
      out.note += "nwidth.csv differs between runs; ";
    }
  }
  // sectional config
  const fs::path scfg = scratch / "det_sectional.json";
  {
    std::ofstream cfg(scfg);
    cfg << R"({
      "mesh": {"cells": [128], "box": [[0.0, 1.0]], "periodic": [true]},
      "dg": {"order": 0},
      "sampling": {"kind": "random", "count": 30, "seed": 5},
      "sectional": {
        "target": "shifted-profile",
        "target_profile": {"type": "gaussian", "center": 0.5, "width": 0.05},
        "dictionaries": [{"kind": "constant", "generator": "snapshots"}],
        "n_max": 6,
        "parameters": {"box": [[0.0, 1.0]]}
      }
    })";
  }
  for (const std::string sub : {"sa", "sb"}) {
    const int rc = run_tool("sectional --config " + scfg.string() + " --out " +
                            (scratch / ("det_" + sub)).string());
    if (rc != 0) {
      out.pass = false;
      out.note += "sectional run exited " + std::to_string(rc) + "; ";
    }
  }
  if (out.pass) {
    const std::string a = slurp(scratch / "det_sa" / "sectional.csv");
    const std::string b = slurp(scratch / "det_sb" / "sectional.csv");
    if (a.empty() || a != b) {
      out.pass = false;
      out.note += "sectional.csv differs between runs; ";
    }
  }
  if (out.pass) out.note = "byte-identical CSVs for nwidth and sectional reruns";
  return out;
}

} // namespace

int main() {
  const fs::path scratch =
      fs::temp_directory_path() / ("fsw_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(scratch);

  struct Entry {
    int id;
    std::string name;
    std::function<Outcome()> fn;
  };
  const std::vector<Entry> entries = {
      {1, "structural validation of all registry systems", criterion_1},
      {2, "integration-by-parts identity with polynomial coefficients", criterion_2},
      {3, "manufactured-solution convergence orders", criterion_3},
      {4, "norm equivalence with the explicit constants", criterion_4},
      {5, "exponential decay for the reaction-parametrized family", criterion_5},
      {6, "comparative decay, rotating vs fixed advection", criterion_6},
      {7, "sectional/classic width identity on three configurations", criterion_7},
      {8, "transport demo: shift vs constant dictionaries", criterion_8},
      {9, "exhaustive subset search vs brute force, greedy factor", criterion_9},
      {10, "classification verdict table via the CLI", [&] { return criterion_10(scratch); }},
      {11, "discrete inf-sup positivity and refinement stability", criterion_11},
      {12, "byte-identical reruns with fixed seeds", [&] { return criterion_12(scratch); }},
  };

  int failures = 0;
  for (const auto& e : entries) {
    Outcome oc;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      oc = e.fn();
    } catch (const std::exception& ex) {
      oc.pass = false;
      oc.note = std::string("exception: ") + ex.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  criterion %2d: %s (%.1f s) %s\n", oc.pass ? "PASS" : "FAIL", e.id,
                e.name.c_str(), secs, oc.note.c_str());
    std::fflush(stdout);
    if (!oc.pass) ++failures;
  }
  fs::remove_all(scratch);
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures ? 1 : 0;
}
