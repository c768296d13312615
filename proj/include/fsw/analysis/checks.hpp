#ifndef FSW_ANALYSIS_CHECKS_HPP
#define FSW_ANALYSIS_CHECKS_HPP

#include <json.hpp>

#include "fsw/dg/assemble.hpp"

namespace fsw::analysis {

// min over random fields of (B u, u) / (M u, u); the upwind form keeps this
// at or above the positivity margin of the operator.
struct CoercivityReport {
  double min_quotient = 0.0;
  double epsilon_declared = 0.0;
  bool pass = false; // min_quotient >= 0.9 * epsilon_declared
  nlohmann::json to_json() const;
};
CoercivityReport coercivity_estimate(const dg::AssembledProblem& ap, double epsilon_declared,
                                     std::size_t trials, std::uint64_t seed);

// M1 (positive boundary operator) and M2 (kernel splitting) checked on the
// boundary trace spaces, face by face.
struct AdmissibilityReport {
  double m1_min_eigenvalue = 0.0; // relative to the face operator norm
  bool m1_pass = false;
  std::size_t boundary_trace_dofs = 0;
  std::size_t m2_rank = 0;
  bool m2_pass = false;
  bool m2_skipped = false; // more than 200 trace dofs
  nlohmann::json to_json() const;
};
AdmissibilityReport m_admissibility_check(const model::FriedrichsSystem& sys,
                                          const dg::DGSpace& space, const model::ParamPoint& mu);

// Two-sided comparison of the parameter-dependent graph norm against the
// parameter-independent reference norm, with the explicit constants
//   upper^2 = max(2 |a_hat|^2, 1 + 2 |A0|^2)
//   lower^2 = 1 / max(2 kappa^-2, 1 + 2 kappa^-2 |A0|^2)
// (sup-norms sampled). Requires the N1 structure.
struct NormEquivalenceReport {
  double lower_empirical = 0.0;  // min observed ||u||_mu / ||u||_0
  double upper_empirical = 0.0;  // max observed
  double lower_theory = 0.0;     // min over the tested parameters
  double upper_theory = 0.0;     // max over the tested parameters
  std::size_t violations = 0;
  bool pass = false;
  model::ParamPoint worst_mu;
  nlohmann::json to_json() const;
};
NormEquivalenceReport norm_equivalence(const model::FriedrichsSystem& sys,
                                       const dg::DGSpace& space,
                                       const std::vector<model::ParamPoint>& mus,
                                       std::size_t trials, std::uint64_t seed);

enum class InfSupForm { Weak, Ultraweak };

// smallest singular value of the system matrix between the trial/test norm
// pairs (weak: graph -> L2, ultraweak: L2 -> adjoint graph), computed by
// power iteration on the inverse normal operator.
struct InfSupReport {
  model::ParamPoint mu;
  double beta = 0.0;
  double theoretical_bound = 0.0; // (1 + |op inverse|^2)^(-1/2) surrogate
  bool pass = false;              // beta > 1e-10
  bool converged = false;
  std::size_t iterations = 0;
  nlohmann::json to_json() const;
};
InfSupReport discrete_infsup(const dg::AssembledProblem& ap, InfSupForm form);

// both forms off one factorization; the surrogate bound is computed once
std::pair<InfSupReport, InfSupReport> discrete_infsup_pair(const dg::AssembledProblem& ap);

// max |  ||sigma(mu_{j+1})||_{mu_{j+1}} - ||sigma(mu_j)||_{mu_j} | / step
// along an ordered parameter path; a continuity diagnostic, not a proof.
struct FellReport {
  double max_rate = 0.0;
  std::vector<double> norms;
  nlohmann::json to_json() const;
};
FellReport fell_continuity_diagnostic(
    const std::function<la::Vector(const model::ParamPoint&)>& section,
    const std::function<double(const model::ParamPoint&, const la::Vector&)>& norm,
    const std::vector<model::ParamPoint>& path);

} // namespace fsw::analysis

#endif
