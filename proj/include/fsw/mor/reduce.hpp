#ifndef FSW_MOR_REDUCE_HPP
#define FSW_MOR_REDUCE_HPP

#include <json.hpp>

#include "fsw/dg/assemble.hpp"

namespace fsw::mor {

enum class RefNorm {
  Auto, // X0 when the N1 structure is declared, else L2
  L2,
  X0
};

struct SweepOptions {
  RefNorm ref = RefNorm::Auto;
  unsigned threads = 0;
  // replace every per-parameter Gram by the reference Gram (parameter-
  // independent norm mode, used by the width-identity cross checks)
  bool reference_norm_only = false;
};

// Parameter samples with their solutions, per-sample graph-norm factors and
// the reference-norm factor.
struct SnapshotSet {
  std::vector<model::ParamPoint> mus;
  std::vector<la::Vector> solutions;
  std::vector<double> residuals; // relative solver residuals
  std::vector<dg::GramFactor> gram_factors;
  dg::GramFactor ref_factor;
  std::size_t dofs = 0;

  std::size_t size() const { return mus.size(); }
};

SnapshotSet sweep(const model::FriedrichsSystem& sys, const dg::DGSpace& space,
                  const std::vector<model::ParamPoint>& mus, const SweepOptions& opts = {});

struct PodResult {
  la::DenseMatrix basis;       // dofs x modes, orthonormal in the reference Gram
  la::Vector singular_values;  // full spectrum
  std::size_t modes = 0;
  bool truncated_by_rank = false; // fewer modes than requested
};

// reference-norm weighted SVD of the snapshot matrix
PodResult pod(const SnapshotSet& snaps, std::size_t n_modes);

struct GreedyResult {
  la::DenseMatrix basis; // orthonormal in the reference Gram
  std::vector<std::size_t> selected;
  la::Vector errors;     // absolute worst-case error after N = 1, 2, ... picks
  la::Vector rel_errors; // errors / e0
  double e0 = 0.0;       // max_j ||u_j||_{mu_j}
};

// worst-snapshot selection, errors measured per sample in its own graph norm,
// orthonormalization in the reference Gram; stops at tol (relative) or n_max
GreedyResult strong_greedy(const SnapshotSet& snaps, std::size_t n_max, double tol);

struct DecayReport {
  std::vector<std::size_t> n_values;
  la::Vector errors; // POD projection errors, relative, per-mu norms
  double alpha = 0.0;
  double beta = 0.0;
  double r_squared = 0.0;
  std::size_t q_b = 1;
  bool beta_infinite = false; // errors hit exact zero
  nlohmann::json to_json() const;
};

// e_N = max_j min_c ||u_j - V_N c||_{mu_j} / ||u_j||_{mu_j} for the nested POD
// spaces, fitted against alpha * exp(-beta N^(1/q_b)).
DecayReport nwidth_estimate(const SnapshotSet& snaps, std::size_t n_max, std::size_t q_b);

// exponential-decay fit log e = log alpha - beta x with x = N^(1/q); returns
// {alpha, beta, r_squared}
struct DecayFit {
  double alpha = 0.0, beta = 0.0, r_squared = 0.0;
  bool beta_infinite = false;
};
DecayFit fit_decay(const std::vector<std::size_t>& ns, const la::Vector& errors, std::size_t q_b);

// mean-square reference-norm projection error onto the span of basis columns
double mean_square_projection_error(const SnapshotSet& snaps, const la::DenseMatrix& basis);

} // namespace fsw::mor

#endif
