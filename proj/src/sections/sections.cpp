#include "fsw/sections/sections.hpp"

#include <atomic>
#include <cmath>
#include <limits>

#include "fsw/la/factor.hpp"

namespace fsw::sections {

using la::Vector;
using model::ParamPoint;
using model::SpacePoint;

namespace {
std::size_t next_section_id() {
  static std::atomic<std::size_t> counter{1};
  return counter.fetch_add(1);
}
} // namespace

Section Section::constant(const dg::DGSpace& space, Vector value, std::string name) {
  if (value.size() != space.dof_count())
    throw Error("Section::constant: field size does not match the space");
  return constant(space.dof_count(), std::move(value), std::move(name));
}

Section Section::constant(std::size_t dofs, Vector value, std::string name) {
  if (value.size() != dofs) throw Error("Section::constant: field size mismatch");
  Section s;
  s.kind_ = Kind::Constant;
  s.name_ = std::move(name);
  s.id_ = next_section_id();
  s.dofs_ = dofs;
  s.value_ = std::move(value);
  return s;
}

Section Section::shifted_profile(const dg::DGSpace& space, std::function<double(double)> profile,
                                 std::function<double(const ParamPoint&)> shift, std::string name,
                                 std::size_t proj_qpoints, std::size_t transform_id) {
  const auto& mesh = space.mesh();
  if (mesh.dim != 1 || !mesh.periodic[0])
    throw Error("Section::shifted_profile: requires a periodic 1D mesh");
  if (space.state_dim() != 1)
    throw Error("Section::shifted_profile: requires a scalar space");
  Section s;
  s.kind_ = Kind::Transformed;
  s.name_ = std::move(name);
  s.id_ = next_section_id();
  s.dofs_ = space.dof_count();
  s.shift_ = std::make_shared<ShiftData>();
  s.shift_->space = std::make_shared<dg::DGSpace>(space);
  s.shift_->profile_terms.push_back({1.0, std::move(profile)});
  s.shift_->shift = std::move(shift);
  s.shift_->transform_id = transform_id;
  s.shift_->qpoints = proj_qpoints;
  return s;
}

Section Section::solution(const model::FriedrichsSystem& sys, const dg::DGSpace& space,
                          std::string name) {
  if (!sys.solve_supported)
    throw Error("Section::solution: system '" + sys.id + "' does not support solves");
  Section s;
  s.kind_ = Kind::Solution;
  s.name_ = std::move(name);
  s.id_ = next_section_id();
  s.dofs_ = space.dof_count();
  s.solution_ = std::make_shared<SolutionData>();
  s.solution_->sys = sys;
  s.solution_->space = std::make_shared<dg::DGSpace>(space);
  if (sys.expansion) s.solution_->affine.emplace(sys, space);
  return s;
}

Vector Section::evaluate(const ParamPoint& mu) const {
  switch (kind_) {
    case Kind::Constant:
      return value_;
    case Kind::Transformed: {
      const auto& sd = *shift_;
      const auto& mesh = sd.space->mesh();
      const double lo = mesh.box.lo[0], len = mesh.box.hi[0] - mesh.box.lo[0];
      const double offset = sd.shift(mu);
      auto fn = [&](const SpacePoint& x) {
        double w = std::fmod(x[0] - offset - lo, len);
        if (w < 0.0) w += len;
        double v = 0.0;
        for (const auto& [coef, prof] : sd.profile_terms) v += coef * prof(lo + w);
        return Vector{v};
      };
      return sd.space->project(fn, sd.qpoints);
    }
    case Kind::Solution: {
      auto& sd = *solution_;
      {
        std::lock_guard<std::mutex> lock(sd.mutex);
        auto it = sd.cache.find(mu);
        if (it != sd.cache.end()) return it->second;
      }
      la::SparseMatrix b;
      Vector f;
      if (sd.affine) {
        dg::check_positivity(sd.sys, mu);
        b = sd.affine->system_matrix(mu);
        f = sd.affine->rhs(mu);
      } else {
        dg::AssembleParts parts;
        parts.system = true;
        parts.grams = false;
        dg::AssembledProblem ap = dg::assemble(sd.sys, *sd.space, mu, parts);
        b = std::move(ap.system);
        f = std::move(ap.rhs);
      }
      Vector u = la::sparse_solve(b, f);
      std::lock_guard<std::mutex> lock(sd.mutex);
      return sd.cache.emplace(mu, std::move(u)).first->second;
    }
    case Kind::Composite: {
      Vector out(dofs_, 0.0);
      for (const auto& [coef, part] : parts_) {
        const Vector v = part.evaluate(mu);
        la::axpy(coef, v, out);
      }
      return out;
    }
  }
  throw Error("Section::evaluate: unknown kind");
}

Section Section::combine(double ca, const Section& a, double cb, const Section& b) {
  if (a.dofs_ != b.dofs_) throw Error("Section::combine: incompatible sections");
  if (a.kind_ == Kind::Constant && b.kind_ == Kind::Constant) {
    Section s;
    s.kind_ = Kind::Constant;
    s.name_ = a.name_ + "+" + b.name_;
    s.id_ = next_section_id();
    s.dofs_ = a.dofs_;
    s.value_.assign(a.dofs_, 0.0);
    la::axpy(ca, a.value_, s.value_);
    la::axpy(cb, b.value_, s.value_);
    return s;
  }
  if (a.kind_ == Kind::Transformed && b.kind_ == Kind::Transformed &&
      a.shift_->transform_id == b.shift_->transform_id) {
    // common transform: combine the reference profiles
    Section s;
    s.kind_ = Kind::Transformed;
    s.name_ = a.name_ + "+" + b.name_;
    s.id_ = next_section_id();
    s.dofs_ = a.dofs_;
    s.shift_ = std::make_shared<ShiftData>(*a.shift_);
    for (auto& term : s.shift_->profile_terms) term.first *= ca;
    for (const auto& term : b.shift_->profile_terms)
      s.shift_->profile_terms.push_back({cb * term.first, term.second});
    return s;
  }
  Section s;
  s.kind_ = Kind::Composite;
  s.name_ = a.name_ + "+" + b.name_;
  s.id_ = next_section_id();
  s.dofs_ = a.dofs_;
  s.parts_ = {{ca, a}, {cb, b}};
  return s;
}

bool SectionDictionary::subset_of(const SectionDictionary& other) const {
  for (const auto& s : sections) {
    bool found = false;
    for (const auto& o : other.sections)
      if (o.id() == s.id()) found = true;
    if (!found) return false;
  }
  return true;
}

SectionDictionary constant_dictionary(const dg::DGSpace& space,
                                      const std::vector<Vector>& fields, std::string id) {
  if (fields.empty()) throw Error("constant_dictionary: empty generator");
  SectionDictionary dict;
  dict.id = std::move(id);
  for (std::size_t i = 0; i < fields.size(); ++i)
    dict.sections.push_back(
        Section::constant(space, fields[i], dict.id + "[" + std::to_string(i) + "]"));
  return dict;
}

SectionDictionary constant_dictionary(const mor::SnapshotSet& snaps, std::string id) {
  if (snaps.size() == 0) throw Error("constant_dictionary: empty snapshot set");
  SectionDictionary dict;
  dict.id = std::move(id);
  for (std::size_t i = 0; i < snaps.size(); ++i)
    dict.sections.push_back(Section::constant(snaps.dofs, snaps.solutions[i],
                                              dict.id + "[" + std::to_string(i) + "]"));
  return dict;
}

SectionDictionary shift_dictionary(const dg::DGSpace& space,
                                   const std::vector<std::function<double(double)>>& profiles,
                                   std::function<double(const ParamPoint&)> shift, std::string id,
                                   std::size_t proj_qpoints) {
  if (profiles.empty()) throw Error("shift_dictionary: empty generator");
  const auto& mesh = space.mesh();
  if (mesh.dim != 1 || !mesh.periodic[0])
    throw Error("shift_dictionary: requires a periodic 1D mesh");
  SectionDictionary dict;
  dict.id = std::move(id);
  static std::atomic<std::size_t> transform_counter{1};
  const std::size_t tid = transform_counter.fetch_add(1);
  for (std::size_t i = 0; i < profiles.size(); ++i)
    dict.sections.push_back(Section::shifted_profile(space, profiles[i], shift,
                                                     dict.id + "[" + std::to_string(i) + "]",
                                                     proj_qpoints, tid));
  return dict;
}

nlohmann::json SectionalResult::to_json() const {
  return {{"dictionary", dictionary_id},
          {"n", n_values},
          {"errors", errors},
          {"rel_errors", rel_errors},
          {"e0", e0},
          {"selected", selected},
          {"exhausted", exhausted},
          {"exhaustive", exhaustive_mode},
          {"rank_deficiency_flagged", rank_deficiency_flagged}};
}

namespace {

struct EvalCache {
  // weighted target per parameter: L_j^T t(mu_j)
  std::vector<Vector> wt;
  // weighted dictionary evaluations: [k][j] -> L_j^T sigma_k(mu_j)
  std::vector<std::vector<Vector>> wsec;
  double e0 = 0.0;
};

EvalCache build_cache(const Section& target, const SectionDictionary& dict,
                      const std::vector<ParamPoint>& mus,
                      const std::vector<dg::GramFactor>& norms) {
  if (mus.size() != norms.size())
    throw Error("sectional_estimate: need one norm factor per training parameter");
  if (mus.empty()) throw Error("sectional_estimate: empty training set");
  EvalCache cache;
  cache.wt.resize(mus.size());
  for (std::size_t j = 0; j < mus.size(); ++j) {
    const Vector t = target.evaluate(mus[j]);
    cache.wt[j] = norms[j].apply_lt(t);
    cache.e0 = std::max(cache.e0, la::norm2(cache.wt[j]));
  }
  cache.wsec.resize(dict.size());
  for (std::size_t k = 0; k < dict.size(); ++k) {
    cache.wsec[k].resize(mus.size());
    if (dict.sections[k].kind() == Section::Kind::Constant) {
      const Vector v = dict.sections[k].evaluate(mus.front());
      for (std::size_t j = 0; j < mus.size(); ++j) cache.wsec[k][j] = norms[j].apply_lt(v);
    } else {
      for (std::size_t j = 0; j < mus.size(); ++j)
        cache.wsec[k][j] = norms[j].apply_lt(dict.sections[k].evaluate(mus[j]));
    }
  }
  return cache;
}

// weighted least-squares error at one training parameter
double point_error(const EvalCache& cache, const std::vector<std::size_t>& subset, std::size_t j,
                   bool* flagged) {
  if (subset.empty()) return la::norm2(cache.wt[j]);
  const std::size_t rows = cache.wt[j].size();
  la::DenseMatrix a(rows, subset.size());
  for (std::size_t c = 0; c < subset.size(); ++c)
    for (std::size_t i = 0; i < rows; ++i) a(i, c) = cache.wsec[subset[c]][j][i];
  const la::LeastSquaresResult ls = la::least_squares(a, cache.wt[j]);
  if (ls.rank_deficient && flagged) *flagged = true;
  return ls.residual_norm;
}

// sup over training parameters of the weighted least-squares error with the
// given subset of sections
double subset_error(const EvalCache& cache, const std::vector<std::size_t>& subset,
                    bool* flagged) {
  double worst = 0.0;
  for (std::size_t j = 0; j < cache.wt.size(); ++j)
    worst = std::max(worst, point_error(cache, subset, j, flagged));
  return worst;
}

void enumerate_subsets(std::size_t k, std::size_t n, std::vector<std::size_t>& current,
                       std::size_t start, const std::function<void(const std::vector<std::size_t>&)>& fn) {
  if (current.size() == n) {
    fn(current);
    return;
  }
  for (std::size_t i = start; i < k; ++i) {
    current.push_back(i);
    enumerate_subsets(k, n, current, i + 1, fn);
    current.pop_back();
  }
}

} // namespace

SectionalResult sectional_estimate(const Section& target, const SectionDictionary& dict,
                                   const std::vector<ParamPoint>& mus,
                                   const std::vector<dg::GramFactor>& norms,
                                   const SectionalOptions& opts) {
  if (dict.size() == 0) throw Error("sectional_estimate: empty dictionary");
  const EvalCache cache = build_cache(target, dict, mus, norms);

  SectionalResult out;
  out.dictionary_id = dict.id;
  out.e0 = cache.e0;
  out.exhaustive_mode = opts.exhaustive;
  if (cache.e0 == 0.0) return out; // zero target

  if (opts.exhaustive) {
    if (opts.n_max > 3 || dict.size() > 12)
      throw Error("sectional_estimate: exhaustive mode is limited to N <= 3 and |dict| <= 12");
    std::vector<double> errs;
    for (std::size_t n = 1; n <= std::min(opts.n_max, dict.size()); ++n) {
      double best = std::numeric_limits<double>::infinity();
      std::vector<std::size_t> best_subset;
      std::vector<std::size_t> current;
      enumerate_subsets(dict.size(), n, current, 0, [&](const std::vector<std::size_t>& sub) {
        const double e = subset_error(cache, sub, &out.rank_deficiency_flagged);
        if (e < best) {
          best = e;
          best_subset = sub;
        }
      });
      errs.push_back(best);
      out.best_subsets.push_back(best_subset);
      out.n_values.push_back(n);
      if (best <= opts.tol * cache.e0) break;
    }
    out.errors = Vector(errs.begin(), errs.end());
  } else {
    std::vector<std::size_t> selected;
    std::vector<char> used(dict.size(), 0);
    std::vector<double> errs;
    while (selected.size() < std::min(opts.n_max, dict.size())) {
      std::size_t pick = dict.size();
      if (opts.selection == SectionalOptions::Selection::BestImprovement) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < dict.size(); ++k) {
          if (used[k]) continue;
          std::vector<std::size_t> trial = selected;
          trial.push_back(k);
          const double e = subset_error(cache, trial, &out.rank_deficiency_flagged);
          if (e < best) {
            best = e;
            pick = k;
          }
        }
      } else {
        // locate the worst-approximated parameter, then the candidate that
        // reduces its error the most
        double worst = -1.0;
        std::size_t jstar = 0;
        for (std::size_t j = 0; j < mus.size(); ++j) {
          const double e = point_error(cache, selected, j, nullptr);
          if (e > worst) {
            worst = e;
            jstar = j;
          }
        }
        double best_local = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < dict.size(); ++k) {
          if (used[k]) continue;
          std::vector<std::size_t> trial = selected;
          trial.push_back(k);
          const double e = point_error(cache, trial, jstar, &out.rank_deficiency_flagged);
          if (e < best_local) {
            best_local = e;
            pick = k;
          }
        }
      }
      if (pick == dict.size()) break;
      selected.push_back(pick);
      used[pick] = 1;
      errs.push_back(subset_error(cache, selected, &out.rank_deficiency_flagged));
      out.n_values.push_back(selected.size());
      if (errs.back() <= opts.tol * cache.e0) break;
    }
    out.errors = Vector(errs.begin(), errs.end());
    out.selected = std::move(selected);
    out.exhausted =
        out.selected.size() == dict.size() && !out.errors.empty() &&
        out.errors.back() > opts.tol * cache.e0;
  }

  out.rel_errors = out.errors;
  la::scale(out.rel_errors, 1.0 / cache.e0);
  return out;
}

CompareReport dictionary_compare(const Section& target,
                                 const std::vector<SectionDictionary>& dicts,
                                 const std::vector<ParamPoint>& mus,
                                 const std::vector<dg::GramFactor>& norms,
                                 const SectionalOptions& opts) {
  if (dicts.size() < 2) throw Error("dictionary_compare: need at least two dictionaries");
  CompareReport rep;
  for (const auto& d : dicts) rep.results.push_back(sectional_estimate(target, d, mus, norms, opts));

  if (opts.exhaustive) {
    for (std::size_t i = 0; i < dicts.size(); ++i) {
      for (std::size_t j = 0; j < dicts.size(); ++j) {
        if (i == j || !dicts[i].subset_of(dicts[j])) continue;
        CompareReport::InclusionCheck chk;
        chk.smaller = i;
        chk.larger = j;
        chk.satisfied = true;
        const auto& ei = rep.results[i].errors;
        const auto& ej = rep.results[j].errors;
        for (std::size_t n = 0; n < std::min(ei.size(), ej.size()); ++n)
          if (ej[n] > ei[n] + 1e-10) chk.satisfied = false;
        rep.inclusion_checks.push_back(chk);
      }
    }
  }
  return rep;
}

} // namespace fsw::sections
