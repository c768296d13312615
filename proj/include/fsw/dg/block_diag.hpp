#ifndef FSW_DG_BLOCK_DIAG_HPP
#define FSW_DG_BLOCK_DIAG_HPP

#include "fsw/la/dense.hpp"
#include "fsw/la/sparse.hpp"

namespace fsw::dg {

// Block-diagonal matrix with uniform block size (cellwise Gram matrices).
class BlockDiagMatrix {
public:
  BlockDiagMatrix() = default;
  BlockDiagMatrix(std::size_t blocks, std::size_t block_size)
      : blocks_(blocks), bs_(block_size), data_(blocks * block_size * block_size, 0.0) {}

  std::size_t blocks() const { return blocks_; }
  std::size_t block_size() const { return bs_; }
  std::size_t dim() const { return blocks_ * bs_; }
  bool empty() const { return data_.empty(); }

  double& at(std::size_t block, std::size_t i, std::size_t j) {
    return data_[(block * bs_ + i) * bs_ + j];
  }
  double at(std::size_t block, std::size_t i, std::size_t j) const {
    return data_[(block * bs_ + i) * bs_ + j];
  }

  la::Vector apply(const la::Vector& x) const;
  la::SparseMatrix to_sparse() const;
  la::DenseMatrix block(std::size_t b) const;

  BlockDiagMatrix& add_scaled(const BlockDiagMatrix& other, double alpha);

private:
  std::size_t blocks_ = 0, bs_ = 0;
  std::vector<double> data_;
};

// Cholesky factorization of a block-diagonal SPD matrix; provides the
// weighted-norm operations used throughout (norms, weighted least squares,
// basis orthonormalization).
class GramFactor {
public:
  GramFactor() = default;
  explicit GramFactor(const BlockDiagMatrix& g); // throws if a block is not SPD

  std::size_t dim() const { return lower_.dim(); }
  la::Vector apply_lt(const la::Vector& x) const;  // L^T x
  la::Vector apply_l(const la::Vector& x) const;   // L x
  la::Vector solve_lt(const la::Vector& x) const;  // L^{-T} x
  la::Vector solve_l(const la::Vector& x) const;   // L^{-1} x
  la::Vector apply_g(const la::Vector& x) const;   // G x = L L^T x
  double norm(const la::Vector& u) const;          // sqrt(u^T G u)
  double inner(const la::Vector& u, const la::Vector& v) const;

private:
  BlockDiagMatrix lower_;
};

} // namespace fsw::dg

#endif
