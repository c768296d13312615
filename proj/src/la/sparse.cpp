#include "fsw/la/sparse.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "fsw/util.hpp"

namespace fsw::la {

void SparseMatrix::add(std::size_t i, std::size_t j, double v) {
  if (finalized_) throw Error("SparseMatrix::add after finalize");
  if (i >= rows_ || j >= cols_) throw Error("SparseMatrix::add: index out of bounds");
  if (v == 0.0) return;
  trip_i_.push_back(i);
  trip_j_.push_back(j);
  trip_v_.push_back(v);
}

void SparseMatrix::finalize() {
  if (finalized_) return;
  std::vector<std::size_t> count(rows_ + 1, 0);
  for (std::size_t t = 0; t < trip_i_.size(); ++t) ++count[trip_i_[t] + 1];
  for (std::size_t r = 0; r < rows_; ++r) count[r + 1] += count[r];
  std::vector<std::size_t> cols(trip_i_.size());
  std::vector<double> vals(trip_i_.size());
  {
    std::vector<std::size_t> next(count.begin(), count.end() - 1);
    for (std::size_t t = 0; t < trip_i_.size(); ++t) {
      const std::size_t pos = next[trip_i_[t]]++;
      cols[pos] = trip_j_[t];
      vals[pos] = trip_v_[t];
    }
  }
  row_ptr_.assign(rows_ + 1, 0);
  col_idx_.clear();
  values_.clear();
  col_idx_.reserve(cols.size());
  values_.reserve(cols.size());
  std::vector<std::size_t> perm;
  for (std::size_t r = 0; r < rows_; ++r) {
    const std::size_t lo = count[r], hi = count[r + 1];
    perm.resize(hi - lo);
    std::iota(perm.begin(), perm.end(), lo);
    std::sort(perm.begin(), perm.end(),
              [&](std::size_t a, std::size_t b) { return cols[a] < cols[b]; });
    for (std::size_t p = 0; p < perm.size(); ++p) {
      const std::size_t c = cols[perm[p]];
      const double v = vals[perm[p]];
      if (row_ptr_[r + 1] > 0 && col_idx_.back() == c) {
        values_.back() += v;
      } else {
        col_idx_.push_back(c);
        values_.push_back(v);
        ++row_ptr_[r + 1];
      }
    }
    row_ptr_[r + 1] += row_ptr_[r];
  }
  trip_i_.clear();
  trip_i_.shrink_to_fit();
  trip_j_.clear();
  trip_j_.shrink_to_fit();
  trip_v_.clear();
  trip_v_.shrink_to_fit();
  finalized_ = true;
}

Vector SparseMatrix::apply(const Vector& x) const {
  if (!finalized_) throw Error("SparseMatrix::apply before finalize");
  if (x.size() != cols_) throw Error("SparseMatrix::apply: dimension mismatch");
  Vector y(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) s += values_[p] * x[col_idx_[p]];
    y[r] = s;
  }
  return y;
}

Vector SparseMatrix::apply_transposed(const Vector& x) const {
  if (!finalized_) throw Error("SparseMatrix::apply_transposed before finalize");
  if (x.size() != rows_) throw Error("SparseMatrix::apply_transposed: dimension mismatch");
  Vector y(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) y[col_idx_[p]] += values_[p] * xr;
  }
  return y;
}

DenseMatrix SparseMatrix::to_dense() const {
  if (!finalized_) throw Error("SparseMatrix::to_dense before finalize");
  DenseMatrix d(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) d(r, col_idx_[p]) += values_[p];
  return d;
}

SparseMatrix SparseMatrix::weighted_sum(const std::vector<double>& coeffs,
                                        const std::vector<const SparseMatrix*>& terms) {
  if (coeffs.size() != terms.size() || terms.empty())
    throw Error("SparseMatrix::weighted_sum: bad term list");
  const std::size_t rows = terms[0]->rows(), cols = terms[0]->cols();
  SparseMatrix out(rows, cols);
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const SparseMatrix& a = *terms[t];
    if (a.rows() != rows || a.cols() != cols)
      throw Error("SparseMatrix::weighted_sum: dimension mismatch");
    if (coeffs[t] == 0.0) continue;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t p = a.row_ptr_[r]; p < a.row_ptr_[r + 1]; ++p)
        out.add(r, a.col_idx_[p], coeffs[t] * a.values_[p]);
  }
  out.finalize();
  return out;
}

SparseLU::SparseLU(const SparseMatrix& a, double pivot_tol) {
  if (a.rows() != a.cols()) throw Error("SparseLU: matrix not square");
  if (!a.finalized()) throw Error("SparseLU: matrix not finalized");
  n_ = a.rows();

  // column-compressed copy of A
  std::vector<std::size_t> cptr(n_ + 1, 0), cidx(a.nnz());
  std::vector<double> cval(a.nnz());
  {
    const auto& rp = a.row_ptr();
    const auto& ci = a.col_idx();
    const auto& v = a.values();
    for (std::size_t p = 0; p < ci.size(); ++p) ++cptr[ci[p] + 1];
    for (std::size_t c = 0; c < n_; ++c) cptr[c + 1] += cptr[c];
    std::vector<std::size_t> next(cptr.begin(), cptr.end() - 1);
    for (std::size_t r = 0; r < n_; ++r) {
      for (std::size_t p = rp[r]; p < rp[r + 1]; ++p) {
        const std::size_t pos = next[ci[p]]++;
        cidx[pos] = r;
        cval[pos] = v[p];
      }
    }
  }

  double max_abs = 0.0;
  for (double v : cval) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs == 0.0) throw Error("SparseLU: zero matrix");
  const double piv_floor = pivot_tol * max_abs;

  l_ptr_.assign(n_ + 1, 0);
  u_ptr_.assign(n_ + 1, 0);
  u_diag_.assign(n_, 0.0);
  perm_.assign(n_, static_cast<std::size_t>(-1));
  std::vector<std::ptrdiff_t> pinv(n_, -1);

  std::vector<double> x(n_, 0.0);
  std::vector<char> mark(n_, 0);
  std::vector<std::size_t> pattern, dfs_stack, dfs_pos;
  pattern.reserve(n_);

  for (std::size_t j = 0; j < n_; ++j) {
    // symbolic: reach of A(:,j) through finished columns of L
    pattern.clear();
    for (std::size_t p = cptr[j]; p < cptr[j + 1]; ++p) {
      std::size_t root = cidx[p];
      if (mark[root]) continue;
      dfs_stack.clear();
      dfs_pos.clear();
      dfs_stack.push_back(root);
      dfs_pos.push_back(pinv[root] >= 0 ? l_ptr_[pinv[root]] : l_ptr_[n_]);
      mark[root] = 1;
      while (!dfs_stack.empty()) {
        const std::size_t node = dfs_stack.back();
        const std::ptrdiff_t col = pinv[node];
        bool descended = false;
        if (col >= 0) {
          std::size_t& pos = dfs_pos.back();
          const std::size_t end = l_ptr_[col + 1];
          while (pos < end) {
            const std::size_t child = l_idx_[pos++];
            if (!mark[child]) {
              mark[child] = 1;
              dfs_stack.push_back(child);
              dfs_pos.push_back(pinv[child] >= 0 ? l_ptr_[pinv[child]] : l_ptr_[n_]);
              descended = true;
              break;
            }
          }
        }
        if (!descended) {
          pattern.push_back(node);
          dfs_stack.pop_back();
          dfs_pos.pop_back();
        }
      }
    }
    // pattern is in topological order (children first); eliminate in reverse
    for (std::size_t p = cptr[j]; p < cptr[j + 1]; ++p) x[cidx[p]] += cval[p];
    for (std::size_t q = pattern.size(); q-- > 0;) {
      const std::size_t node = pattern[q];
      const std::ptrdiff_t col = pinv[node];
      if (col < 0) continue;
      const double xk = x[node];
      if (xk == 0.0) continue;
      for (std::size_t p = l_ptr_[col]; p < l_ptr_[col + 1]; ++p)
        x[l_idx_[p]] -= xk * l_val_[p];
    }

    // pivot among uneliminated rows
    double best = -1.0;
    std::size_t piv = static_cast<std::size_t>(-1);
    for (std::size_t node : pattern) {
      if (pinv[node] >= 0) continue;
      const double mag = std::abs(x[node]);
      if (mag > best) {
        best = mag;
        piv = node;
      }
    }
    if (piv == static_cast<std::size_t>(-1) || best <= piv_floor)
      throw Error("SparseLU: matrix singular to tolerance at column " + std::to_string(j));

    const double ujj = x[piv];
    perm_[j] = piv;
    pinv[piv] = static_cast<std::ptrdiff_t>(j);
    u_diag_[j] = ujj;

    // emit U(:,j) (eliminated rows) and L(:,j) (remaining rows)
    for (std::size_t node : pattern) {
      if (pinv[node] >= 0 && node != piv) {
        const std::ptrdiff_t col = pinv[node];
        if (static_cast<std::size_t>(col) < j && x[node] != 0.0) {
          u_idx_.push_back(static_cast<std::size_t>(col));
          u_val_.push_back(x[node]);
        }
      }
    }
    for (std::size_t node : pattern) {
      if (pinv[node] < 0 && x[node] != 0.0) {
        l_idx_.push_back(node);
        l_val_.push_back(x[node] / ujj);
      }
    }
    u_ptr_[j + 1] = u_idx_.size();
    l_ptr_[j + 1] = l_idx_.size();

    for (std::size_t node : pattern) {
      x[node] = 0.0;
      mark[node] = 0;
    }
  }

  perm_inv_.assign(n_, 0);
  for (std::size_t k = 0; k < n_; ++k) perm_inv_[perm_[k]] = k;
}

Vector SparseLU::solve(const Vector& b) const {
  if (b.size() != n_) throw Error("SparseLU::solve: dimension mismatch");
  Vector work = b;
  Vector y(n_, 0.0);
  for (std::size_t k = 0; k < n_; ++k) {
    const double yk = work[perm_[k]];
    y[k] = yk;
    if (yk == 0.0) continue;
    for (std::size_t p = l_ptr_[k]; p < l_ptr_[k + 1]; ++p) work[l_idx_[p]] -= yk * l_val_[p];
  }
  for (std::size_t k = n_; k-- > 0;) {
    y[k] /= u_diag_[k];
    const double yk = y[k];
    if (yk == 0.0) continue;
    for (std::size_t p = u_ptr_[k]; p < u_ptr_[k + 1]; ++p) y[u_idx_[p]] -= yk * u_val_[p];
  }
  return y;
}

Vector SparseLU::solve_transposed(const Vector& b) const {
  if (b.size() != n_) throw Error("SparseLU::solve_transposed: dimension mismatch");
  Vector w(n_, 0.0);
  for (std::size_t k = 0; k < n_; ++k) {
    double s = b[k];
    for (std::size_t p = u_ptr_[k]; p < u_ptr_[k + 1]; ++p) s -= u_val_[p] * w[u_idx_[p]];
    w[k] = s / u_diag_[k];
  }
  for (std::size_t k = n_; k-- > 0;) {
    double s = w[k];
    for (std::size_t p = l_ptr_[k]; p < l_ptr_[k + 1]; ++p)
      s -= l_val_[p] * w[perm_inv_[l_idx_[p]]];
    w[k] = s;
  }
  Vector xvec(n_, 0.0);
  for (std::size_t k = 0; k < n_; ++k) xvec[perm_[k]] = w[k];
  return xvec;
}

Vector sparse_solve(const SparseMatrix& a, const Vector& b) {
  if (a.rows() != a.cols()) throw Error("sparse_solve: matrix not square");
  if (b.size() != a.rows()) throw Error("sparse_solve: rhs dimension mismatch");
  SparseLU lu(a);
  Vector x = lu.solve(b);
  // one step of iterative refinement
  Vector r = a.apply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  Vector dx = lu.solve(r);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];

  const double bn = norm2(b);
  if (bn > 0.0) {
    Vector res = a.apply(x);
    for (std::size_t i = 0; i < res.size(); ++i) res[i] -= b[i];
    if (norm2(res) > 1e-10 * bn)
      throw Error("sparse_solve: residual " + format_double(norm2(res) / bn) +
                  " exceeds 1e-10 (system too ill-conditioned)");
  }
  return x;
}

std::string to_matrix_market(const SparseMatrix& a) {
  std::ostringstream os;
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.rows() << " " << a.cols() << " " << a.nnz() << "\n";
  const auto& rp = a.row_ptr();
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t p = rp[r]; p < rp[r + 1]; ++p)
      os << (r + 1) << " " << (a.col_idx()[p] + 1) << " " << format_double(a.values()[p]) << "\n";
  return os.str();
}

} // namespace fsw::la
