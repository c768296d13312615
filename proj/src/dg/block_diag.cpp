#include "fsw/dg/block_diag.hpp"

#include "fsw/la/factor.hpp"

namespace fsw::dg {

la::Vector BlockDiagMatrix::apply(const la::Vector& x) const {
  if (x.size() != dim()) throw Error("BlockDiagMatrix::apply: dimension mismatch");
  la::Vector y(dim(), 0.0);
  for (std::size_t b = 0; b < blocks_; ++b) {
    const std::size_t off = b * bs_;
    for (std::size_t i = 0; i < bs_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < bs_; ++j) s += at(b, i, j) * x[off + j];
      y[off + i] = s;
    }
  }
  return y;
}

la::SparseMatrix BlockDiagMatrix::to_sparse() const {
  la::SparseMatrix out(dim(), dim());
  for (std::size_t b = 0; b < blocks_; ++b) {
    const std::size_t off = b * bs_;
    for (std::size_t i = 0; i < bs_; ++i)
      for (std::size_t j = 0; j < bs_; ++j)
        if (at(b, i, j) != 0.0) out.add(off + i, off + j, at(b, i, j));
  }
  out.finalize();
  return out;
}

la::DenseMatrix BlockDiagMatrix::block(std::size_t b) const {
  la::DenseMatrix m(bs_, bs_);
  for (std::size_t i = 0; i < bs_; ++i)
    for (std::size_t j = 0; j < bs_; ++j) m(i, j) = at(b, i, j);
  return m;
}

BlockDiagMatrix& BlockDiagMatrix::add_scaled(const BlockDiagMatrix& other, double alpha) {
  if (other.blocks_ != blocks_ || other.bs_ != bs_)
    throw Error("BlockDiagMatrix::add_scaled: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += alpha * other.data_[i];
  return *this;
}

GramFactor::GramFactor(const BlockDiagMatrix& g) : lower_(g.blocks(), g.block_size()) {
  const std::size_t bs = g.block_size();
  for (std::size_t b = 0; b < g.blocks(); ++b) {
    la::DenseMatrix l;
    try {
      l = la::cholesky(g.block(b));
    } catch (const Error& e) {
      throw Error("GramFactor: block " + std::to_string(b) + " is not SPD: " + e.what());
    }
    for (std::size_t i = 0; i < bs; ++i)
      for (std::size_t j = 0; j <= i; ++j) lower_.at(b, i, j) = l(i, j);
  }
}

la::Vector GramFactor::apply_lt(const la::Vector& x) const {
  if (x.size() != dim()) throw Error("GramFactor::apply_lt: dimension mismatch");
  const std::size_t bs = lower_.block_size();
  la::Vector y(dim(), 0.0);
  for (std::size_t b = 0; b < lower_.blocks(); ++b) {
    const std::size_t off = b * bs;
    for (std::size_t i = 0; i < bs; ++i) {
      double s = 0.0;
      for (std::size_t j = i; j < bs; ++j) s += lower_.at(b, j, i) * x[off + j];
      y[off + i] = s;
    }
  }
  return y;
}

la::Vector GramFactor::apply_l(const la::Vector& x) const {
  if (x.size() != dim()) throw Error("GramFactor::apply_l: dimension mismatch");
  const std::size_t bs = lower_.block_size();
  la::Vector y(dim(), 0.0);
  for (std::size_t b = 0; b < lower_.blocks(); ++b) {
    const std::size_t off = b * bs;
    for (std::size_t i = 0; i < bs; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j <= i; ++j) s += lower_.at(b, i, j) * x[off + j];
      y[off + i] = s;
    }
  }
  return y;
}

la::Vector GramFactor::solve_l(const la::Vector& x) const {
  if (x.size() != dim()) throw Error("GramFactor::solve_l: dimension mismatch");
  const std::size_t bs = lower_.block_size();
  la::Vector y(dim(), 0.0);
  for (std::size_t b = 0; b < lower_.blocks(); ++b) {
    const std::size_t off = b * bs;
    for (std::size_t i = 0; i < bs; ++i) {
      double s = x[off + i];
      for (std::size_t j = 0; j < i; ++j) s -= lower_.at(b, i, j) * y[off + j];
      y[off + i] = s / lower_.at(b, i, i);
    }
  }
  return y;
}

la::Vector GramFactor::solve_lt(const la::Vector& x) const {
  if (x.size() != dim()) throw Error("GramFactor::solve_lt: dimension mismatch");
  const std::size_t bs = lower_.block_size();
  la::Vector y(dim(), 0.0);
  for (std::size_t b = 0; b < lower_.blocks(); ++b) {
    const std::size_t off = b * bs;
    for (std::size_t ii = bs; ii-- > 0;) {
      double s = x[off + ii];
      for (std::size_t j = ii + 1; j < bs; ++j) s -= lower_.at(b, j, ii) * y[off + j];
      y[off + ii] = s / lower_.at(b, ii, ii);
    }
  }
  return y;
}

la::Vector GramFactor::apply_g(const la::Vector& x) const { return apply_l(apply_lt(x)); }

double GramFactor::norm(const la::Vector& u) const { return la::norm2(apply_lt(u)); }

double GramFactor::inner(const la::Vector& u, const la::Vector& v) const {
  return la::dot(apply_lt(u), apply_lt(v));
}

} // namespace fsw::dg
