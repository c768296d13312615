#ifndef FSW_LA_FACTOR_HPP
#define FSW_LA_FACTOR_HPP

#include "fsw/la/dense.hpp"

namespace fsw::la {

struct SvdResult {
  DenseMatrix u;  // m x k (thin), k = min(m,n)
  Vector s;       // k singular values, non-increasing, non-negative
  DenseMatrix vt; // k x n
};

// Householder bidiagonalization followed by implicit-shift QR on the
// bidiagonal. Throws on non-convergence (with iteration diagnostics).
SvdResult svd(const DenseMatrix& m);

struct SymEigResult {
  Vector values;       // ascending
  DenseMatrix vectors; // columns are eigenvectors, orthonormal
};

// Cyclic Jacobi for symmetric matrices. Rejects asymmetric input
// (relative asymmetry above 1e-12).
SymEigResult sym_eig(const DenseMatrix& m);

// Lower-triangular L with L L^T = m. Throws naming the pivot index when a
// pivot is not positive.
DenseMatrix cholesky(const DenseMatrix& m);

struct LeastSquaresResult {
  Vector x;
  double residual_norm = 0.0;
  std::size_t rank = 0;
  bool rank_deficient = false; // minimum-norm solution was returned
};

// Minimizes ||a x - b||_2 via SVD; rank-deficient systems yield the
// minimum-norm solution with the flag set.
LeastSquaresResult least_squares(const DenseMatrix& a, const Vector& b);

} // namespace fsw::la

#endif
