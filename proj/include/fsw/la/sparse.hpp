#ifndef FSW_LA_SPARSE_HPP
#define FSW_LA_SPARSE_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "fsw/la/dense.hpp"

namespace fsw::la {

// Compressed-row sparse matrix. Assembled from (row, col, value) triplets;
// finalize() sums duplicates and sorts column indices within each row.
class SparseMatrix {
public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  bool finalized() const { return finalized_; }

  void add(std::size_t i, std::size_t j, double v);
  void finalize();

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  Vector apply(const Vector& x) const;            // A x
  Vector apply_transposed(const Vector& x) const; // A^T x
  DenseMatrix to_dense() const;

  // v += alpha * other (same dimensions; patterns may differ)
  static SparseMatrix weighted_sum(const std::vector<double>& coeffs,
                                   const std::vector<const SparseMatrix*>& terms);

private:
  std::size_t rows_ = 0, cols_ = 0;
  bool finalized_ = false;
  // triplet buffers before finalize
  std::vector<std::size_t> trip_i_, trip_j_;
  std::vector<double> trip_v_;
  // CSR after finalize
  std::vector<std::size_t> row_ptr_, col_idx_;
  std::vector<double> values_;
};

// Sparse LU with partial pivoting (Gilbert-Peierls, left-looking on columns).
// Deterministic for a fixed input. Throws on singular-to-tolerance pivots.
class SparseLU {
public:
  explicit SparseLU(const SparseMatrix& a, double pivot_tol = 1e-14);

  Vector solve(const Vector& b) const;
  Vector solve_transposed(const Vector& b) const;
  std::size_t dim() const { return n_; }

private:
  std::size_t n_ = 0;
  // column-compressed L (unit diagonal implicit) and U
  std::vector<std::size_t> l_ptr_, l_idx_, u_ptr_, u_idx_;
  std::vector<double> l_val_, u_val_, u_diag_;
  std::vector<std::size_t> perm_;     // row permutation: pivot row of column k
  std::vector<std::size_t> perm_inv_; // perm_inv_[orig row] = permuted position
};

// Solves a x = b; relative residual <= 1e-10 is verified (one step of
// iterative refinement is applied first). Throws on mismatch or singularity.
Vector sparse_solve(const SparseMatrix& a, const Vector& b);

// Matrix Market coordinate-format text dump (debugging aid).
std::string to_matrix_market(const SparseMatrix& a);

} // namespace fsw::la

#endif
