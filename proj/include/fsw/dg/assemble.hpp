#ifndef FSW_DG_ASSEMBLE_HPP
#define FSW_DG_ASSEMBLE_HPP

#include <optional>

#include "fsw/dg/block_diag.hpp"
#include "fsw/dg/space.hpp"
#include "fsw/la/sparse.hpp"
#include "fsw/model/system.hpp"

namespace fsw::dg {

struct AssembleParts {
  bool system = true;       // upwind DG matrix and rhs
  bool grams = true;        // L2, graph and adjoint-graph Gram matrices
  bool diagnostics = false; // broken operator matrices, boundary D/M, sym. zeroth form
};

// Everything assembled for one parameter. The Gram matrices are cellwise
// (block-diagonal) by construction of the broken graph norm.
struct AssembledProblem {
  model::ParamPoint mu;
  la::SparseMatrix system;  // volume + upwind interface flux + weak boundary
  la::Vector rhs;
  BlockDiagMatrix mass;         // L2 Gram
  BlockDiagMatrix graph_gram;   // mass + cellwise (A u, A v)
  BlockDiagMatrix adjoint_gram; // mass + cellwise (A* u, A* v)
  // diagnostics
  la::SparseMatrix op_volume;     // (A phi_j, phi_i), broken
  la::SparseMatrix adj_op_volume; // (A* phi_j, phi_i), broken
  la::SparseMatrix boundary_d;    // boundary integral of v^T D u
  la::SparseMatrix boundary_m;    // boundary integral of v^T M u
  la::SparseMatrix sym_zero;      // volume integral of v^T (A0 + A0^T - div A) u
};

// Sampled FS2 gate; throws when the positivity margin is not strictly positive.
void check_positivity(const model::FriedrichsSystem& sys, const model::ParamPoint& mu);

// Throws when mu lies outside the parameter box or the positivity condition
// fails on a sample grid.
AssembledProblem assemble(const model::FriedrichsSystem& sys, const DGSpace& space,
                          const model::ParamPoint& mu, const AssembleParts& parts = {});

// Broken graph-norm Gram matrix, mass + cellwise (A u, A v). No positivity
// gate; any coefficient set yields an SPD matrix.
BlockDiagMatrix graph_gram(const model::FriedrichsSystem& sys, const DGSpace& space,
                           const model::ParamPoint& mu);

BlockDiagMatrix l2_gram(const DGSpace& space);

// Parameter-independent reference norm for N1-structured systems:
// ||u||^2 + ||sum_i tilde(A^i) d_i u||^2. Throws when the system does not
// declare the N1 factorization.
BlockDiagMatrix reference_gram(const model::FriedrichsSystem& sys, const DGSpace& space);

// |(A_h u, v) - (u, A*_h v) - v^T D_h u| / (||u||_G ||v||_G)
double ibp_residual(const model::FriedrichsSystem& sys, const DGSpace& space,
                    const model::ParamPoint& mu, const la::Vector& u, const la::Vector& v);
double ibp_residual(const AssembledProblem& ap, const la::Vector& u, const la::Vector& v);

// Precomputed affine decomposition B_mu = sum_q theta_q(mu) B_q built from the
// system's declared expansion. Assembles each component once.
class AffineOperator {
public:
  AffineOperator(const model::FriedrichsSystem& sys, const DGSpace& space);

  la::SparseMatrix system_matrix(const model::ParamPoint& mu) const;
  la::Vector rhs(const model::ParamPoint& mu) const;
  std::size_t term_count() const { return thetas_.size(); }

private:
  std::vector<std::function<double(const model::ParamPoint&)>> thetas_;
  std::vector<la::SparseMatrix> matrices_;
  std::vector<std::function<double(const model::ParamPoint&)>> rhs_thetas_;
  std::vector<la::Vector> rhs_vectors_;
};

} // namespace fsw::dg

#endif
