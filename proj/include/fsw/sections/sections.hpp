#ifndef FSW_SECTIONS_SECTIONS_HPP
#define FSW_SECTIONS_SECTIONS_HPP

#include <map>
#include <memory>
#include <mutex>

#include "fsw/dg/assemble.hpp"
#include "fsw/mor/reduce.hpp"

namespace fsw::sections {

// A section assigns every parameter a discrete field. Kinds:
//   Constant     sigma(mu) = fixed vector
//   Transformed  sigma(mu) = projection of a reference profile shifted by a
//                parameter-dependent offset (1D periodic meshes)
//   Solution     sigma(mu) = solution of the assembled problem at mu (cached)
//   Composite    pointwise linear combination
class Section {
public:
  enum class Kind { Constant, Transformed, Solution, Composite };

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  std::size_t id() const { return id_; }
  std::size_t dofs() const { return dofs_; }

  la::Vector evaluate(const model::ParamPoint& mu) const;

  static Section constant(const dg::DGSpace& space, la::Vector value, std::string name);
  static Section constant(std::size_t dofs, la::Vector value, std::string name);
  // profile is a scalar function on the (periodic) 1D domain
  static Section shifted_profile(const dg::DGSpace& space,
                                 std::function<double(double)> profile,
                                 std::function<double(const model::ParamPoint&)> shift,
                                 std::string name, std::size_t proj_qpoints = 6,
                                 std::size_t transform_id = 0);
  static Section solution(const model::FriedrichsSystem& sys, const dg::DGSpace& space,
                          std::string name = "solution");

  // c_a * a (+) c_b * b: constants combine to a constant, shifted profiles
  // with a common transform combine on the reference profile, anything else
  // combines pointwise
  static Section combine(double ca, const Section& a, double cb, const Section& b);

private:
  Section() = default;
  Kind kind_ = Kind::Constant;
  std::string name_;
  std::size_t id_ = 0;
  std::size_t dofs_ = 0;

  la::Vector value_; // Constant

  struct ShiftData {
    std::shared_ptr<const dg::DGSpace> space;
    std::vector<std::pair<double, std::function<double(double)>>> profile_terms;
    std::function<double(const model::ParamPoint&)> shift;
    std::size_t transform_id = 0;
    std::size_t qpoints = 6;
  };
  std::shared_ptr<ShiftData> shift_;

  struct SolutionData {
    model::FriedrichsSystem sys;
    std::shared_ptr<const dg::DGSpace> space;
    std::optional<dg::AffineOperator> affine;
    mutable std::map<model::ParamPoint, la::Vector> cache;
    mutable std::mutex mutex;
  };
  std::shared_ptr<SolutionData> solution_;

  std::vector<std::pair<double, Section>> parts_; // Composite
};

struct SectionDictionary {
  std::string id;
  std::vector<Section> sections;

  std::size_t size() const { return sections.size(); }
  // dictionary vector-space operation
  static Section oplus(const Section& a, const Section& b) {
    return Section::combine(1.0, a, 1.0, b);
  }
  bool subset_of(const SectionDictionary& other) const;
};

SectionDictionary constant_dictionary(const dg::DGSpace& space,
                                      const std::vector<la::Vector>& fields, std::string id);
SectionDictionary constant_dictionary(const mor::SnapshotSet& snaps, std::string id);

SectionDictionary shift_dictionary(const dg::DGSpace& space,
                                   const std::vector<std::function<double(double)>>& profiles,
                                   std::function<double(const model::ParamPoint&)> shift,
                                   std::string id, std::size_t proj_qpoints = 6);

struct SectionalOptions {
  std::size_t n_max = 10;
  double tol = 0.0;       // relative to e0
  bool exhaustive = false; // subset search, limited to N <= 3 and |dict| <= 12
  // WorstPoint: fix the worst-approximated parameter (mirrors the strong
  // snapshot greedy exactly on constant dictionaries). BestImprovement:
  // minimize the post-insertion sup error over all candidates.
  enum class Selection { WorstPoint, BestImprovement };
  Selection selection = Selection::WorstPoint;
};

struct SectionalResult {
  std::string dictionary_id;
  std::vector<std::size_t> n_values;
  la::Vector errors;     // absolute sup-over-training errors
  la::Vector rel_errors; // errors / e0
  double e0 = 0.0;
  std::vector<std::size_t> selected; // greedy pick order
  std::vector<std::vector<std::size_t>> best_subsets; // exhaustive mode
  bool exhausted = false;          // dictionary ran out before reaching tol
  bool exhaustive_mode = false;
  bool rank_deficiency_flagged = false;
  nlohmann::json to_json() const;
};

// greedy (default) or exhaustive surrogate of the sectional width restricted
// to the training set; per-parameter errors are weighted least squares in the
// supplied norm factors.
SectionalResult sectional_estimate(const Section& target, const SectionDictionary& dict,
                                   const std::vector<model::ParamPoint>& mus,
                                   const std::vector<dg::GramFactor>& norms,
                                   const SectionalOptions& opts);

struct CompareReport {
  std::vector<SectionalResult> results;
  struct InclusionCheck {
    std::size_t smaller = 0, larger = 0;
    bool satisfied = false;
  };
  std::vector<InclusionCheck> inclusion_checks; // exhaustive runs over nested pairs
};

CompareReport dictionary_compare(const Section& target,
                                 const std::vector<SectionDictionary>& dicts,
                                 const std::vector<model::ParamPoint>& mus,
                                 const std::vector<dg::GramFactor>& norms,
                                 const SectionalOptions& opts);

} // namespace fsw::sections

#endif
