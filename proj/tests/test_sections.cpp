#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fsw/la/factor.hpp"
#include "fsw/model/registry.hpp"
#include "fsw/sections/sections.hpp"

using namespace fsw;
using namespace fsw::dg;
using namespace fsw::model;
using namespace fsw::mor;
using namespace fsw::sections;

namespace {

StructuredMesh periodic_line(std::size_t n) {
  StructuredMesh mesh;
  mesh.dim = 1;
  mesh.cells = {n, 1};
  mesh.box.dim = 1;
  mesh.box.lo = {0.0, 0.0};
  mesh.box.hi = {1.0, 1.0};
  mesh.periodic = {true, false};
  return mesh;
}

StructuredMesh line_mesh(std::size_t n) {
  StructuredMesh mesh = periodic_line(n);
  mesh.periodic = {false, false};
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

double gaussian(double x, double center, double width) {
  const double d = x - center;
  return std::exp(-d * d / (2.0 * width * width));
}

} // namespace

TEST_CASE("constant sections: identical values, dictionary size, oplus linearity") {
  DGSpace space = build_space(line_mesh(8), 0, 1);
  la::Vector v(space.dof_count(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  Section s = Section::constant(space, v, "phi");
  const la::Vector a = s.evaluate({0.0});
  const la::Vector b = s.evaluate({123.0});
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(a[i] == v[i]);
    CHECK(b[i] == v[i]);
  }

  std::vector<la::Vector> fields(5, v);
  SectionDictionary dict = constant_dictionary(space, fields, "snaps");
  CHECK(dict.size() == 5);
  CHECK_THROWS_AS(constant_dictionary(space, {}, "empty"), Error);

  la::Vector w(space.dof_count(), 1.0);
  Section t = Section::constant(space, w, "one");
  Section sum = SectionDictionary::oplus(s, t);
  CHECK(sum.kind() == Section::Kind::Constant);
  const la::Vector sv = sum.evaluate({0.0});
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(sv[i] == v[i] + 1.0);
}

TEST_CASE("shift sections: zero shift equals the constant projection") {
  DGSpace space = build_space(periodic_line(32), 1, 1);
  auto prof = [](double x) { return gaussian(x, 0.5, 0.1); };
  Section moving = Section::shifted_profile(space, prof, [](const ParamPoint&) { return 0.0; },
                                            "g0");
  la::Vector direct = space.project([&](const SpacePoint& x) { return la::Vector{prof(x[0])}; }, 6);
  const la::Vector got = moving.evaluate({0.3});
  for (std::size_t i = 0; i < direct.size(); ++i)
    CHECK(got[i] == doctest::Approx(direct[i]).epsilon(1e-14));
}

TEST_CASE("shift sections: one-cell shift is a cyclic permutation at k = 0") {
  const std::size_t n = 16;
  DGSpace space = build_space(periodic_line(n), 0, 1);
  auto prof = [](double x) { return gaussian(x, 0.5, 0.08); };
  Section s = Section::shifted_profile(space, prof, [](const ParamPoint& mu) { return mu[0]; },
                                       "g");
  const double h = 1.0 / n;
  const la::Vector u0 = s.evaluate({0.0});
  const la::Vector u1 = s.evaluate({h});
  for (std::size_t c = 0; c < n; ++c)
    CHECK(u1[(c + 1) % n] == doctest::Approx(u0[c]).epsilon(1e-13));
}

TEST_CASE("shift sections: L2 norm approximately invariant along the shift") {
  DGSpace space = build_space(periodic_line(256), 0, 1);
  GramFactor mass(l2_gram(space));
  auto prof = [](double x) { return gaussian(x, 0.5, 0.05); };
  Section s = Section::shifted_profile(space, prof, [](const ParamPoint& mu) { return mu[0]; },
                                       "g");
  const double base = mass.norm(s.evaluate({0.0}));
  for (double mu : {0.13, 0.377, 0.591, 0.805}) {
    const double nrm = mass.norm(s.evaluate({mu}));
    CHECK(std::abs(nrm - base) <= 1e-3 * base);
  }
}

TEST_CASE("shift sections: non-periodic mesh is rejected") {
  DGSpace space = build_space(line_mesh(8), 0, 1);
  CHECK_THROWS_AS(
      Section::shifted_profile(space, [](double) { return 1.0; },
                               [](const ParamPoint&) { return 0.0; }, "bad"),
      Error);
}

TEST_CASE("shift oplus acts on the reference profiles") {
  DGSpace space = build_space(periodic_line(32), 0, 1);
  auto p1 = [](double x) { return gaussian(x, 0.3, 0.07); };
  auto p2 = [](double x) { return gaussian(x, 0.6, 0.09); };
  SectionDictionary dict = shift_dictionary(
      space, {p1, p2}, [](const ParamPoint& mu) { return mu[0]; }, "shift");
  Section sum = SectionDictionary::oplus(dict.sections[0], dict.sections[1]);
  CHECK(sum.kind() == Section::Kind::Transformed);
  // sigma_{p1+p2}(mu) equals sigma_{p1}(mu) + sigma_{p2}(mu) for the linear
  // shift transform
  const ParamPoint mu{0.234};
  const la::Vector lhs = sum.evaluate(mu);
  la::Vector rhs = dict.sections[0].evaluate(mu);
  la::axpy(1.0, dict.sections[1].evaluate(mu), rhs);
  for (std::size_t i = 0; i < lhs.size(); ++i)
    CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-13));
}

TEST_CASE("sectional: target inside the dictionary collapses at N = 1") {
  DGSpace space = build_space(periodic_line(64), 0, 1);
  GramFactor mass(l2_gram(space));
  auto prof = [](double x) { return gaussian(x, 0.5, 0.05); };
  Section target = Section::shifted_profile(space, prof,
                                            [](const ParamPoint& mu) { return mu[0]; }, "u0");
  SectionDictionary dict = shift_dictionary(
      space, {prof}, [](const ParamPoint& mu) { return mu[0]; }, "shift");

  std::vector<ParamPoint> mus;
  std::vector<GramFactor> norms;
  for (int i = 0; i < 12; ++i) {
    mus.push_back({static_cast<double>(i) / 12.0});
    norms.push_back(mass);
  }
  SectionalOptions opts;
  opts.n_max = 3;
  SectionalResult res = sectional_estimate(target, dict, mus, norms, opts);
  CHECK(res.errors[0] <= 1e-12 * res.e0);
}

TEST_CASE("sectional: transport family favors the shift dictionary") {
  DGSpace space = build_space(periodic_line(128), 0, 1);
  GramFactor mass(l2_gram(space));
  auto prof = [](double x) { return gaussian(x, 0.5, 0.05); };
  Section target = Section::shifted_profile(space, prof,
                                            [](const ParamPoint& mu) { return mu[0]; }, "u0");
  std::vector<ParamPoint> mus;
  std::vector<GramFactor> norms;
  std::vector<la::Vector> fields;
  for (int i = 0; i < 40; ++i) {
    mus.push_back({static_cast<double>(i) / 40.0});
    norms.push_back(mass);
    fields.push_back(target.evaluate(mus.back()));
  }
  SectionDictionary cdict = constant_dictionary(space, fields, "constants");
  SectionalOptions opts;
  opts.n_max = 10;
  SectionalResult cres = sectional_estimate(target, cdict, mus, norms, opts);
  // slow linear-width decay for pure transport
  CHECK(cres.rel_errors[cres.rel_errors.size() - 1] >= 1e-2);

  SectionDictionary sdict = shift_dictionary(
      space, {prof}, [](const ParamPoint& mu) { return mu[0]; }, "shift");
  SectionalResult sres = sectional_estimate(target, sdict, mus, norms, opts);
  CHECK(sres.rel_errors[0] <= 1e-10);
}

TEST_CASE("sectional equivalence: constant dictionary matches strong greedy") {
  FriedrichsSystem sys = registry_get("advection-reaction-1d");
  DGSpace space = build_space(line_mesh(24), 1, 1);
  SweepOptions sopts;
  sopts.reference_norm_only = true;
  SnapshotSet snaps = sweep(sys, space, grid_params(sys.params, 14), sopts);

  GreedyResult g = strong_greedy(snaps, 8, 0.0);

  Section target = Section::solution(sys, space);
  SectionDictionary dict = constant_dictionary(snaps, "snapshots");
  SectionalOptions opts;
  opts.n_max = 8;
  SectionalResult res = sectional_estimate(target, dict, snaps.mus, snaps.gram_factors, opts);

  REQUIRE(res.errors.size() >= g.errors.size());
  for (std::size_t n = 0; n < g.errors.size(); ++n)
    CHECK(std::abs(res.errors[n] - g.errors[n]) <= 1e-10 * std::max(1.0, g.e0));
}

TEST_CASE("sectional: exhaustive matches a brute-force oracle, greedy within factor 2") {
  // random constant sections over a tiny space with random SPD norms
  Rng rng(2718);
  const std::size_t dofs = 12, nmu = 5, nsec = 8;
  std::vector<ParamPoint> mus;
  std::vector<GramFactor> norms;
  StructuredMesh mesh = line_mesh(dofs);
  DGSpace space = build_space(mesh, 0, 1);
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
  SectionDictionary dict = constant_dictionary(space, fields, "rand");
  la::Vector tvec(dofs);
  for (auto& x : tvec) x = rng.normal();
  Section target = Section::constant(space, tvec, "target");

  SectionalOptions opts;
  opts.n_max = 2;
  opts.exhaustive = true;
  SectionalResult ex = sectional_estimate(target, dict, mus, norms, opts);

  // independent oracle: all 28 pairs, normal-equation least squares
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < nsec; ++a)
    for (std::size_t b = a + 1; b < nsec; ++b) {
      double worst = 0.0;
      for (std::size_t j = 0; j < nmu; ++j) {
        const la::Vector wt = norms[j].apply_lt(tvec);
        const la::Vector wa = norms[j].apply_lt(fields[a]);
        const la::Vector wb = norms[j].apply_lt(fields[b]);
        // 2x2 normal equations
        const double aa = la::dot(wa, wa), ab = la::dot(wa, wb), bb = la::dot(wb, wb);
        const double at = la::dot(wa, wt), bt = la::dot(wb, wt);
        const double det = aa * bb - ab * ab;
        const double ca = (bb * at - ab * bt) / det;
        const double cb = (aa * bt - ab * at) / det;
        la::Vector r = wt;
        la::axpy(-ca, wa, r);
        la::axpy(-cb, wb, r);
        worst = std::max(worst, la::norm2(r));
      }
      best = std::min(best, worst);
    }
  CHECK(ex.errors[1] == doctest::Approx(best).epsilon(1e-10));

  SectionalOptions gopts;
  gopts.n_max = 2;
  SectionalResult greedy = sectional_estimate(target, dict, mus, norms, gopts);
  CHECK(greedy.errors[1] <= 2.0 * ex.errors[1]);
}

TEST_CASE("dictionary_compare: inclusion and the trivial cases") {
  DGSpace space = build_space(line_mesh(10), 0, 1);
  GramFactor mass(l2_gram(space));
  Rng rng(5);
  std::vector<la::Vector> fields;
  for (int k = 0; k < 4; ++k) {
    la::Vector v(space.dof_count());
    for (auto& x : v) x = rng.normal();
    fields.push_back(v);
  }
  la::Vector tvec(space.dof_count());
  for (auto& x : tvec) x = rng.normal();
  Section target = Section::constant(space, tvec, "t");

  SectionDictionary d1 = constant_dictionary(space, fields, "d1");
  SectionDictionary d2 = d1;
  d2.id = "d2";
  d2.sections.push_back(target); // shares ids with d1 plus the target itself

  std::vector<ParamPoint> mus{{0.0}, {1.0}, {2.0}};
  std::vector<GramFactor> norms{mass, mass, mass};
  SectionalOptions opts;
  opts.n_max = 2;
  opts.exhaustive = true;
  CompareReport rep = dictionary_compare(target, {d1, d2}, mus, norms, opts);
  CHECK(rep.results[1].errors[0] <= 1e-12 * rep.results[1].e0); // target included
  bool found = false;
  for (const auto& chk : rep.inclusion_checks)
    if (chk.smaller == 0 && chk.larger == 1) {
      found = true;
      CHECK(chk.satisfied);
    }
  CHECK(found);

  CompareReport same = dictionary_compare(target, {d1, d1}, mus, norms, opts);
  for (std::size_t n = 0; n < same.results[0].errors.size(); ++n)
    CHECK(same.results[0].errors[n] == same.results[1].errors[n]);

  CHECK_THROWS_AS(dictionary_compare(target, {d1}, mus, norms, opts), Error);
}

TEST_CASE("sectional: duplicated sections trigger the rank-deficiency flag") {
  DGSpace space = build_space(line_mesh(6), 0, 1);
  GramFactor mass(l2_gram(space));
  la::Vector v(space.dof_count(), 1.0);
  SectionDictionary dict = constant_dictionary(space, {v, v}, "dup");
  la::Vector t(space.dof_count(), 0.0);
  t[0] = 1.0;
  Section target = Section::constant(space, t, "t");
  SectionalOptions opts;
  opts.n_max = 2;
  opts.exhaustive = true;
  SectionalResult res =
      sectional_estimate(target, dict, {{0.0}, {1.0}}, {mass, mass}, opts);
  CHECK(res.rank_deficiency_flagged);
  // minimum-norm fallback still returns the correct best approximation
  CHECK(res.errors[1] == doctest::Approx(res.errors[0]));
}

TEST_CASE("sectional: boundedness and monotonicity") {
  DGSpace space = build_space(line_mesh(12), 0, 1);
  GramFactor mass(l2_gram(space));
  Rng rng(9);
  std::vector<la::Vector> fields;
  for (int k = 0; k < 6; ++k) {
    la::Vector v(space.dof_count());
    for (auto& x : v) x = rng.normal();
    fields.push_back(v);
  }
  la::Vector tvec(space.dof_count());
  for (auto& x : tvec) x = rng.normal();
  Section target = Section::constant(space, tvec, "t");
  SectionDictionary dict = constant_dictionary(space, fields, "d");
  std::vector<ParamPoint> mus{{0.0}, {1.0}};
  std::vector<GramFactor> norms{mass, mass};
  SectionalOptions opts;
  opts.n_max = 6;
  SectionalResult res = sectional_estimate(target, dict, mus, norms, opts);
  CHECK(res.e0 > 0.0);
  for (std::size_t n = 0; n < res.errors.size(); ++n) {
    CHECK(res.errors[n] <= res.e0 * (1.0 + 1e-12));
    if (n > 0) CHECK(res.errors[n] <= res.errors[n - 1] * (1.0 + 1e-12));
  }
  CHECK(res.exhausted); // random target is not reachable by 6 sections
}
