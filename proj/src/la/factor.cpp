#include "fsw/la/factor.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace fsw::la {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// G = [[c, s], [-s, c]] with G (a,b)^T = (r, 0)^T
inline void rotg(double a, double b, double& c, double& s, double& r) {
  r = std::hypot(a, b);
  if (r == 0.0) {
    c = 1.0;
    s = 0.0;
    return;
  }
  c = a / r;
  s = b / r;
}

// columns (p,q): col_p' = c col_p + s col_q, col_q' = -s col_p + c col_q
inline void rotate_columns(DenseMatrix& m, std::size_t p, std::size_t q, double c, double s) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double vp = m(i, p), vq = m(i, q);
    m(i, p) = c * vp + s * vq;
    m(i, q) = -s * vp + c * vq;
  }
}

// LAPACK-style reflector: on return x[0] = beta, x[1..] hold v (v0 = 1
// implicit); returns tau with (I - tau v v^T) x = beta e1.
double make_householder(double* x, std::size_t len, std::size_t stride) {
  if (len <= 1) return 0.0;
  double xnorm = 0.0;
  for (std::size_t i = 1; i < len; ++i) xnorm = std::hypot(xnorm, x[i * stride]);
  if (xnorm == 0.0) return 0.0;
  const double alpha = x[0];
  const double beta = -std::copysign(std::hypot(alpha, xnorm), alpha);
  const double tau = (beta - alpha) / beta;
  const double inv = 1.0 / (alpha - beta);
  for (std::size_t i = 1; i < len; ++i) x[i * stride] *= inv;
  x[0] = beta;
  return tau;
}

// One implicit-shift Golub-Kahan step on the bidiagonal block [lo, hi].
void gk_step(std::vector<double>& d, std::vector<double>& e, DenseMatrix& u, DenseMatrix& v,
             std::size_t lo, std::size_t hi) {
  const double dm = d[hi - 1], dn = d[hi], em = e[hi - 1];
  const double emm = (hi - 1 > lo) ? e[hi - 2] : 0.0;
  const double t11 = dm * dm + emm * emm;
  const double t12 = dm * em;
  const double t22 = dn * dn + em * em;
  double mu;
  if (t12 == 0.0) {
    mu = t22;
  } else {
    const double tr2 = 0.5 * (t11 - t22);
    const double root = std::hypot(tr2, t12);
    const double denom = tr2 + std::copysign(root, tr2);
    mu = t22 - t12 * t12 / denom;
  }
  double y = d[lo] * d[lo] - mu;
  double z = d[lo] * e[lo];
  for (std::size_t k = lo; k < hi; ++k) {
    double c, s, r;
    rotg(y, z, c, s, r);
    if (k > lo) e[k - 1] = r;
    double f = c * d[k] + s * e[k];
    e[k] = -s * d[k] + c * e[k];
    d[k] = f;
    double bulge = s * d[k + 1];
    d[k + 1] = c * d[k + 1];
    rotate_columns(v, k, k + 1, c, s);

    rotg(d[k], bulge, c, s, r);
    d[k] = r;
    f = c * e[k] + s * d[k + 1];
    d[k + 1] = -s * e[k] + c * d[k + 1];
    e[k] = f;
    if (k + 1 < hi) {
      bulge = s * e[k + 1];
      e[k + 1] = c * e[k + 1];
      y = e[k];
      z = bulge;
    }
    rotate_columns(u, k, k + 1, c, s);
  }
}

SvdResult svd_tall(const DenseMatrix& input) {
  const std::size_t m = input.rows(), n = input.cols();
  DenseMatrix a = input;
  std::vector<double> d(n, 0.0), e(n > 1 ? n - 1 : 0, 0.0);
  std::vector<double> tau_l(n, 0.0), tau_r(n, 0.0);

  // Householder bidiagonalization
  for (std::size_t k = 0; k < n; ++k) {
    tau_l[k] = make_householder(&a(k, k), m - k, n);
    const double beta = a(k, k);
    if (tau_l[k] != 0.0) {
      for (std::size_t j = k + 1; j < n; ++j) {
        double w = a(k, j);
        for (std::size_t i = k + 1; i < m; ++i) w += a(i, k) * a(i, j);
        w *= tau_l[k];
        a(k, j) -= w;
        for (std::size_t i = k + 1; i < m; ++i) a(i, j) -= w * a(i, k);
      }
    }
    d[k] = beta;
    if (k + 1 < n) {
      tau_r[k] = make_householder(&a(k, k + 1), n - k - 1, 1);
      e[k] = a(k, k + 1);
      if (tau_r[k] != 0.0) {
        for (std::size_t i = k + 1; i < m; ++i) {
          double w = a(i, k + 1);
          for (std::size_t j = k + 2; j < n; ++j) w += a(k, j) * a(i, j);
          w *= tau_r[k];
          a(i, k + 1) -= w;
          for (std::size_t j = k + 2; j < n; ++j) a(i, j) -= w * a(k, j);
        }
      }
    }
  }

  // accumulate U (thin, m x n) from left reflectors
  DenseMatrix u(m, n);
  for (std::size_t j = 0; j < n; ++j) u(j, j) = 1.0;
  for (std::size_t kk = n; kk-- > 0;) {
    if (tau_l[kk] == 0.0) continue;
    for (std::size_t j = kk; j < n; ++j) {
      double w = u(kk, j);
      for (std::size_t i = kk + 1; i < m; ++i) w += a(i, kk) * u(i, j);
      w *= tau_l[kk];
      u(kk, j) -= w;
      for (std::size_t i = kk + 1; i < m; ++i) u(i, j) -= w * a(i, kk);
    }
  }

  // accumulate V (n x n) from right reflectors
  DenseMatrix v = DenseMatrix::identity(n);
  if (n > 2) {
    for (std::size_t kk = n - 2; kk-- > 0;) {
      if (tau_r[kk] == 0.0) continue;
      // reflector vector lives in a(kk, kk+2..n-1), v0 at column kk+1
      for (std::size_t j = 0; j < n; ++j) {
        double w = v(kk + 1, j);
        for (std::size_t i = kk + 2; i < n; ++i) w += a(kk, i) * v(i, j);
        w *= tau_r[kk];
        v(kk + 1, j) -= w;
        for (std::size_t i = kk + 2; i < n; ++i) v(i, j) -= w * a(kk, i);
      }
    }
  }

  double anorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double t = std::abs(d[i]) + (i + 1 < n ? std::abs(e[i]) : 0.0);
    anorm = std::max(anorm, t);
  }

  if (anorm > 0.0 && n > 1) {
    std::size_t hi = n - 1;
    std::size_t block_iters = 0;
    const std::size_t max_block_iters = 80;
    while (hi > 0) {
      if (std::abs(e[hi - 1]) <= kEps * (std::abs(d[hi - 1]) + std::abs(d[hi])) ||
          std::abs(e[hi - 1]) <= kEps * anorm) {
        e[hi - 1] = 0.0;
        --hi;
        block_iters = 0;
        continue;
      }
      std::size_t lo = hi - 1;
      while (lo > 0 && std::abs(e[lo - 1]) > kEps * (std::abs(d[lo - 1]) + std::abs(d[lo])) &&
             std::abs(e[lo - 1]) > kEps * anorm)
        --lo;

      // negligible diagonal inside the block: split it explicitly
      bool split = false;
      for (std::size_t i = lo; i <= hi; ++i) {
        if (std::abs(d[i]) > kEps * anorm) continue;
        d[i] = 0.0;
        if (i < hi) {
          // chase e[i] off to the right with left rotations
          double f = e[i];
          e[i] = 0.0;
          for (std::size_t j = i + 1; j <= hi && f != 0.0; ++j) {
            double c, s, r;
            rotg(d[j], f, c, s, r);
            d[j] = r;
            if (j < hi) {
              f = -s * e[j];
              e[j] = c * e[j];
            } else {
              f = 0.0;
            }
            // left rotation mixed rows (j, i): update U columns
            rotate_columns(u, j, i, c, s);
          }
        } else if (i > lo) {
          // d[hi] ~ 0: chase e[hi-1] upward with right rotations
          double f = e[hi - 1];
          e[hi - 1] = 0.0;
          for (std::size_t j = hi; j-- > lo;) {
            double c, s, r;
            rotg(d[j], f, c, s, r);
            d[j] = r;
            if (j > lo) {
              f = -s * e[j - 1];
              e[j - 1] = c * e[j - 1];
            }
            rotate_columns(v, j, hi, c, s);
          }
        }
        split = true;
      }
      if (split) continue;

      if (++block_iters > max_block_iters)
        throw Error("svd: QR iteration did not converge after " + std::to_string(max_block_iters) +
                    " sweeps on block [" + std::to_string(lo) + "," + std::to_string(hi) + "]");
      gk_step(d, e, u, v, lo, hi);
    }
  }

  // sign fix and descending sort
  for (std::size_t j = 0; j < n; ++j) {
    if (d[j] < 0.0) {
      d[j] = -d[j];
      for (std::size_t i = 0; i < n; ++i) v(i, j) = -v(i, j);
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a_, std::size_t b_) { return d[a_] > d[b_]; });

  SvdResult out;
  out.s.resize(n);
  out.u = DenseMatrix(m, n);
  out.vt = DenseMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.s[j] = d[src];
    for (std::size_t i = 0; i < m; ++i) out.u(i, j) = u(i, src);
    for (std::size_t i = 0; i < n; ++i) out.vt(j, i) = v(i, src);
  }
  return out;
}

} // namespace

SvdResult svd(const DenseMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw Error("svd: empty matrix");
  if (!m.all_finite()) throw Error("svd: non-finite input");
  if (m.rows() >= m.cols()) return svd_tall(m);
  SvdResult t = svd_tall(m.transposed());
  SvdResult out;
  out.s = std::move(t.s);
  out.u = DenseMatrix(m.rows(), out.s.size());
  // A = (A^T)^T = (U S V^T)^T = V S U^T
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < out.s.size(); ++j) out.u(i, j) = t.vt(j, i);
  out.vt = DenseMatrix(out.s.size(), m.cols());
  for (std::size_t i = 0; i < out.s.size(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out.vt(i, j) = t.u(j, i);
  return out;
}

SymEigResult sym_eig(const DenseMatrix& m) {
  if (m.rows() != m.cols()) throw Error("sym_eig: matrix not square");
  if (!m.all_finite()) throw Error("sym_eig: non-finite input");
  const std::size_t n = m.rows();
  const double fro = frobenius_norm(m);
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) asym = std::max(asym, std::abs(m(i, j) - m(j, i)));
  if (asym > 1e-12 * std::max(1.0, fro))
    throw Error("sym_eig: input not symmetric (max asymmetry " + format_double(asym) + ")");

  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));
  DenseMatrix v = DenseMatrix::identity(n);

  const std::size_t max_sweeps = 60;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off == 0.0 || std::sqrt(2.0 * off) <= 1e-15 * fro) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p), aqq = a(q, q);
        if (std::abs(apq) <= kEps * 0.5 * (std::abs(app) + std::abs(aqq)) &&
            std::abs(apq) <= kEps * fro)
          continue;
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(p, i) = a(i, p);
          a(i, q) = s * aip + c * aiq;
          a(q, i) = a(i, q);
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  SymEigResult out;
  out.values.resize(n);
  out.vectors = DenseMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

DenseMatrix cholesky(const DenseMatrix& m) {
  if (m.rows() != m.cols()) throw Error("cholesky: matrix not square");
  if (!m.all_finite()) throw Error("cholesky: non-finite input");
  const std::size_t n = m.rows();
  DenseMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = m(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0))
      throw Error("cholesky: non-positive pivot at index " + std::to_string(j) + " (value " +
                  format_double(diag) + ")");
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double sum = m(i, j);
      for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
      l(i, j) = sum / ljj;
    }
  }
  return l;
}

LeastSquaresResult least_squares(const DenseMatrix& a, const Vector& b) {
  if (a.rows() < a.cols()) throw Error("least_squares: fewer rows than columns");
  if (b.size() != a.rows()) throw Error("least_squares: rhs size mismatch");
  const SvdResult f = svd(a);
  const double smax = f.s.empty() ? 0.0 : f.s[0];
  const double tol = static_cast<double>(std::max(a.rows(), a.cols())) * kEps * smax;

  LeastSquaresResult out;
  out.x.assign(a.cols(), 0.0);
  for (std::size_t i = 0; i < f.s.size(); ++i) {
    if (f.s[i] > tol) ++out.rank;
  }
  out.rank_deficient = out.rank < a.cols();
  for (std::size_t i = 0; i < out.rank; ++i) {
    double uib = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) uib += f.u(r, i) * b[r];
    const double coef = uib / f.s[i];
    for (std::size_t c = 0; c < a.cols(); ++c) out.x[c] += coef * f.vt(i, c);
  }
  Vector res = matvec(a, out.x);
  for (std::size_t i = 0; i < res.size(); ++i) res[i] -= b[i];
  out.residual_norm = norm2(res);
  return out;
}

} // namespace fsw::la
