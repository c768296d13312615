#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>

#include "fsw/la/dense.hpp"
#include "fsw/la/factor.hpp"
#include "fsw/la/sparse.hpp"
#include "fsw/util.hpp"

using namespace fsw;
using namespace fsw::la;

namespace {

DenseMatrix random_matrix(Rng& rng, std::size_t m, std::size_t n) {
  DenseMatrix a(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = rng.normal();
  return a;
}

double svd_reconstruction_error(const DenseMatrix& a, const SvdResult& f) {
  const std::size_t k = f.s.size();
  DenseMatrix us(a.rows(), k);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < k; ++j) us(i, j) = f.u(i, j) * f.s[j];
  DenseMatrix rec = matmul(us, f.vt);
  double err = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double d = rec(i, j) - a(i, j);
      err += d * d;
    }
  return std::sqrt(err);
}

} // namespace

TEST_CASE("svd: identity and zero") {
  auto f = svd(DenseMatrix::identity(2));
  CHECK(f.s[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.s[1] == doctest::Approx(1.0).epsilon(1e-14));

  auto z = svd(DenseMatrix(2, 2, 0.0));
  CHECK(z.s[0] == 0.0);
  CHECK(z.s[1] == 0.0);
}

TEST_CASE("svd: diagonal matrix gives sorted absolute diagonal") {
  DenseMatrix a{{3.0, 0.0}, {0.0, 4.0}};
  auto f = svd(a);
  CHECK(f.s[0] == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(f.s[1] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("svd: reconstruction and orthogonality on random matrices") {
  Rng rng(1234);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 1 + rng.index(30);
    const std::size_t n = 1 + rng.index(30);
    DenseMatrix a = random_matrix(rng, m, n);
    auto f = svd(a);
    const double fro = std::max(1e-30, frobenius_norm(a));
    CHECK(svd_reconstruction_error(a, f) / fro < 1e-12);
    for (std::size_t i = 1; i < f.s.size(); ++i) {
      CHECK(f.s[i] <= f.s[i - 1] + 1e-14 * fro);
      CHECK(f.s[i] >= 0.0);
    }
    // U^T U = I
    for (std::size_t c1 = 0; c1 < f.s.size(); ++c1)
      for (std::size_t c2 = c1; c2 < f.s.size(); ++c2) {
        double d = 0.0;
        for (std::size_t r = 0; r < m; ++r) d += f.u(r, c1) * f.u(r, c2);
        CHECK(std::abs(d - (c1 == c2 ? 1.0 : 0.0)) < 1e-12);
      }
  }
}

TEST_CASE("svd: singular values invariant under row/column permutation") {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 4 + rng.index(8), n = 3 + rng.index(8);
    DenseMatrix a = random_matrix(rng, m, n);
    DenseMatrix b(m, n);
    // rotate rows by one, swap two columns
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) b((i + 1) % m, j) = a(i, j);
    for (std::size_t i = 0; i < m; ++i) std::swap(b(i, 0), b(i, n - 1));
    auto fa = svd(a), fb = svd(b);
    for (std::size_t i = 0; i < fa.s.size(); ++i)
      CHECK(fa.s[i] == doctest::Approx(fb.s[i]).epsilon(1e-12));
  }
}

TEST_CASE("svd: singular values match eigenvalues of A^T A") {
  Rng rng(7);
  DenseMatrix a = random_matrix(rng, 12, 7);
  auto f = svd(a);
  DenseMatrix ata = matmul(a.transposed(), a);
  auto e = sym_eig(ata);
  for (std::size_t i = 0; i < 7; ++i) {
    const double sv = std::sqrt(std::max(0.0, e.values[6 - i]));
    CHECK(f.s[i] == doctest::Approx(sv).epsilon(1e-10));
  }
}

TEST_CASE("svd: rank-deficient and tall/wide shapes") {
  Rng rng(55);
  DenseMatrix a = random_matrix(rng, 9, 4);
  // duplicate a column -> rank <= 3
  for (std::size_t i = 0; i < 9; ++i) a(i, 3) = a(i, 1);
  auto f = svd(a);
  CHECK(f.s[3] < 1e-12 * f.s[0]);

  DenseMatrix w = random_matrix(rng, 3, 10);
  auto fw = svd(w);
  CHECK(fw.s.size() == 3);
  CHECK(svd_reconstruction_error(w, fw) < 1e-12 * frobenius_norm(w));
}

TEST_CASE("svd: stress shapes and graded spectra") {
  // 1x1 and single column/row
  auto s1 = svd(DenseMatrix{{-3.0}});
  CHECK(s1.s[0] == doctest::Approx(3.0));
  auto sc = svd(DenseMatrix{{3.0}, {4.0}});
  CHECK(sc.s[0] == doctest::Approx(5.0));
  auto sr = svd(DenseMatrix{{3.0, 4.0}});
  CHECK(sr.s[0] == doctest::Approx(5.0));

  // zero rows/columns inside a matrix
  DenseMatrix z(5, 4);
  z(0, 0) = 2.0;
  z(4, 3) = 7.0;
  auto fz = svd(z);
  CHECK(fz.s[0] == doctest::Approx(7.0));
  CHECK(fz.s[1] == doctest::Approx(2.0));
  CHECK(fz.s[2] < 1e-14);

  // strongly graded singular values via D = diag(10^-k) conjugated by
  // random rotations (values must be recovered to relative precision)
  Rng rng(8080);
  const std::size_t n = 8;
  DenseMatrix q1 = DenseMatrix::identity(n), q2 = DenseMatrix::identity(n);
  for (int rot = 0; rot < 40; ++rot) {
    const std::size_t i = rng.index(n);
    std::size_t j = rng.index(n);
    if (i == j) j = (j + 1) % n;
    const double a = rng.uniform(0.0, 6.283185307179586);
    const double c = std::cos(a), s = std::sin(a);
    for (std::size_t r = 0; r < n; ++r) {
      const double vi = q1(r, i), vj = q1(r, j);
      q1(r, i) = c * vi + s * vj;
      q1(r, j) = -s * vi + c * vj;
      const double wi = q2(r, i), wj = q2(r, j);
      q2(r, i) = c * wi + s * wj;
      q2(r, j) = -s * wi + c * wj;
    }
  }
  DenseMatrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) d(i, i) = std::pow(10.0, -static_cast<double>(2 * i));
  DenseMatrix a = matmul(q1, matmul(d, q2.transposed()));
  auto f = svd(a);
  for (std::size_t i = 0; i < n; ++i) {
    const double expect = std::pow(10.0, -static_cast<double>(2 * i));
    CHECK(f.s[i] == doctest::Approx(expect).epsilon(1e-9));
  }

  // Hilbert matrix: severely ill-conditioned but reconstructible
  DenseMatrix h(9, 9);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j) h(i, j) = 1.0 / static_cast<double>(i + j + 1);
  auto fh = svd(h);
  CHECK(svd_reconstruction_error(h, fh) <= 1e-12 * frobenius_norm(h));
  CHECK_THROWS_AS(svd(DenseMatrix(0, 0)), Error);
}

TEST_CASE("finiteness guards") {
  DenseMatrix bad{{1.0, 0.0}, {0.0, std::numeric_limits<double>::quiet_NaN()}};
  CHECK_THROWS_AS(svd(bad), Error);
  CHECK_THROWS_AS(sym_eig(bad), Error);
  CHECK_THROWS_AS(cholesky(bad), Error);
}

TEST_CASE("sym_eig: examples") {
  auto d = sym_eig(DenseMatrix{{2.0, 0.0}, {0.0, 5.0}});
  CHECK(d.values[0] == doctest::Approx(2.0));
  CHECK(d.values[1] == doctest::Approx(5.0));

  auto f = sym_eig(DenseMatrix{{0.0, 1.0}, {1.0, 0.0}});
  CHECK(f.values[0] == doctest::Approx(-1.0));
  CHECK(f.values[1] == doctest::Approx(1.0));

  auto i5 = sym_eig(DenseMatrix::identity(5));
  for (double v : i5.values) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("sym_eig: rejects asymmetric input") {
  DenseMatrix a{{0.0, 1.0}, {0.0, 0.0}};
  CHECK_THROWS_AS(sym_eig(a), Error);
}

TEST_CASE("sym_eig: residual and orthogonality on random symmetric matrices") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.index(15);
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) a(i, j) = a(j, i) = rng.normal();
    auto e = sym_eig(a);
    const double nrm = frobenius_norm(a);
    for (std::size_t j = 0; j < n; ++j) {
      Vector v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = e.vectors(i, j);
      Vector av = matvec(a, v);
      for (std::size_t i = 0; i < n; ++i) av[i] -= e.values[j] * v[i];
      CHECK(norm2(av) <= 1e-10 * std::max(1.0, nrm));
    }
    for (std::size_t c1 = 0; c1 < n; ++c1)
      for (std::size_t c2 = c1; c2 < n; ++c2) {
        double d = 0.0;
        for (std::size_t r = 0; r < n; ++r) d += e.vectors(r, c1) * e.vectors(r, c2);
        CHECK(std::abs(d - (c1 == c2 ? 1.0 : 0.0)) < 1e-10);
      }
    for (std::size_t i = 1; i < n; ++i) CHECK(e.values[i] >= e.values[i - 1]);
  }
}

TEST_CASE("cholesky: examples") {
  auto i = cholesky(DenseMatrix::identity(3));
  CHECK(frobenius_norm(i) == doctest::Approx(std::sqrt(3.0)));

  auto d = cholesky(DenseMatrix{{4.0, 0.0}, {0.0, 9.0}});
  CHECK(d(0, 0) == doctest::Approx(2.0));
  CHECK(d(1, 1) == doctest::Approx(3.0));
  CHECK(d(0, 1) == 0.0);

  auto h = cholesky(DenseMatrix{{4.0, 2.0}, {2.0, 5.0}});
  CHECK(h(0, 0) == doctest::Approx(2.0));
  CHECK(h(1, 0) == doctest::Approx(1.0));
  CHECK(h(1, 1) == doctest::Approx(2.0));
}

TEST_CASE("cholesky: round trip on random lower-triangular factors") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.index(12);
    DenseMatrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) l(i, j) = rng.normal();
      l(i, i) = 0.5 + rng.uniform();
    }
    DenseMatrix m = matmul(l, l.transposed());
    DenseMatrix l2 = cholesky(m);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(l2(i, j) - l(i, j)));
    CHECK(err < 1e-10 * std::max(1.0, frobenius_norm(l)));
  }
}

TEST_CASE("cholesky: rejects indefinite matrix naming the pivot") {
  DenseMatrix a{{1.0, 2.0}, {2.0, 1.0}};
  try {
    cholesky(a);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("index 1") != std::string::npos);
  }
}

TEST_CASE("least_squares: examples") {
  auto r1 = least_squares(DenseMatrix::identity(3), Vector{1.0, 2.0, 3.0});
  CHECK(r1.x[0] == doctest::Approx(1.0));
  CHECK(r1.x[2] == doctest::Approx(3.0));
  CHECK(r1.residual_norm < 1e-13);

  // b in column span -> zero residual
  DenseMatrix a{{1.0, 0.0}, {1.0, 1.0}, {0.0, 2.0}};
  Vector b = matvec(a, Vector{2.0, -1.0});
  auto r2 = least_squares(a, b);
  CHECK(r2.residual_norm < 1e-12);
  CHECK(r2.x[0] == doctest::Approx(2.0));
  CHECK(r2.x[1] == doctest::Approx(-1.0));

  auto r3 = least_squares(DenseMatrix{{1.0}, {1.0}}, Vector{0.0, 2.0});
  CHECK(r3.x[0] == doctest::Approx(1.0));
  CHECK(r3.residual_norm == doctest::Approx(std::sqrt(2.0)));
  CHECK_FALSE(r3.rank_deficient);
}

TEST_CASE("least_squares: gradient condition and rank deficiency") {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    DenseMatrix a = random_matrix(rng, 20, 6);
    Vector b(20);
    for (auto& v : b) v = rng.normal();
    auto r = least_squares(a, b);
    // A^T (A x - b) = 0
    Vector res = matvec(a, r.x);
    for (std::size_t i = 0; i < res.size(); ++i) res[i] -= b[i];
    Vector grad = matvec_transposed(a, res);
    CHECK(norm2(grad) < 1e-10 * std::max(1.0, norm2(b)) * frobenius_norm(a));
  }

  DenseMatrix a(4, 2);
  for (std::size_t i = 0; i < 4; ++i) a(i, 0) = a(i, 1) = 1.0;
  auto r = least_squares(a, Vector{1.0, 1.0, 1.0, 1.0});
  CHECK(r.rank_deficient);
  CHECK(r.rank == 1);
  // minimum-norm solution splits the coefficient evenly
  CHECK(r.x[0] == doctest::Approx(0.5));
  CHECK(r.x[1] == doctest::Approx(0.5));
}

TEST_CASE("sparse: assembly, duplicates, apply") {
  SparseMatrix a(3, 3);
  a.add(0, 0, 1.0);
  a.add(0, 0, 2.0); // duplicate, summed on finalize
  a.add(1, 2, 5.0);
  a.add(2, 1, -1.0);
  a.finalize();
  CHECK(a.nnz() == 3);
  Vector y = a.apply(Vector{1.0, 1.0, 1.0});
  CHECK(y[0] == doctest::Approx(3.0));
  CHECK(y[1] == doctest::Approx(5.0));
  CHECK(y[2] == doctest::Approx(-1.0));
  Vector yt = a.apply_transposed(Vector{1.0, 1.0, 1.0});
  CHECK(yt[0] == doctest::Approx(3.0));
  CHECK(yt[1] == doctest::Approx(-1.0));
  CHECK(yt[2] == doctest::Approx(5.0));
}

TEST_CASE("sparse_solve: examples") {
  SparseMatrix id(2, 2);
  id.add(0, 0, 1.0);
  id.add(1, 1, 1.0);
  id.finalize();
  Vector x = sparse_solve(id, Vector{1.0, 2.0});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(2.0));

  SparseMatrix d(2, 2);
  d.add(0, 0, 2.0);
  d.add(1, 1, 4.0);
  d.finalize();
  Vector x2 = sparse_solve(d, Vector{2.0, 4.0});
  CHECK(x2[0] == doctest::Approx(1.0));
  CHECK(x2[1] == doctest::Approx(1.0));
}

TEST_CASE("sparse_solve: 4-cell upwind recursion for u' + u = 1, u(0) = 0") {
  // DG(0) upwind on (0,1), 4 cells: (1 + h) u_i - u_{i-1} = h
  const std::size_t n = 4;
  const double h = 0.25;
  SparseMatrix a(n, n);
  Vector b(n, h);
  for (std::size_t i = 0; i < n; ++i) {
    a.add(i, i, 1.0 + h);
    if (i > 0) a.add(i, i - 1, -1.0);
  }
  a.finalize();
  Vector x = sparse_solve(a, b);
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double expect = (prev + h) / (1.0 + h);
    CHECK(x[i] == doctest::Approx(expect).epsilon(1e-12));
    prev = expect;
  }
}

TEST_CASE("sparse_solve: residual bound on 100 random well-conditioned systems") {
  Rng rng(4242);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng.index(60);
    SparseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      double offsum = 0.0;
      for (int k = 0; k < 4; ++k) {
        const std::size_t j = rng.index(n);
        if (j == i) continue;
        const double v = rng.normal();
        offsum += std::abs(v);
        a.add(i, j, v);
      }
      a.add(i, i, offsum + 1.0 + rng.uniform()); // diagonally dominant
    }
    a.finalize();
    Vector b(n);
    for (auto& v : b) v = rng.normal();
    Vector x = sparse_solve(a, b);
    Vector r = a.apply(x);
    for (std::size_t i = 0; i < n; ++i) r[i] -= b[i];
    CHECK(norm2(r) <= 1e-10 * norm2(b));
  }
}

TEST_CASE("sparse_solve: singular matrix and dimension mismatch are rejected") {
  SparseMatrix s(2, 2);
  s.add(0, 0, 1.0);
  s.add(1, 0, 1.0); // second column empty -> singular
  s.finalize();
  CHECK_THROWS_AS(sparse_solve(s, Vector{1.0, 1.0}), Error);

  SparseMatrix ok(2, 2);
  ok.add(0, 0, 1.0);
  ok.add(1, 1, 1.0);
  ok.finalize();
  CHECK_THROWS_AS(sparse_solve(ok, Vector{1.0, 2.0, 3.0}), Error);
}

TEST_CASE("sparse LU: transpose solve") {
  Rng rng(11);
  const std::size_t n = 30;
  SparseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a.add(i, i, 4.0 + rng.uniform());
    a.add(i, (i + 1) % n, rng.normal());
    a.add(i, (i + 7) % n, rng.normal());
  }
  a.finalize();
  Vector b(n);
  for (auto& v : b) v = rng.normal();
  SparseLU lu(a);
  Vector x = lu.solve_transposed(b);
  Vector r = a.apply_transposed(x);
  for (std::size_t i = 0; i < n; ++i) r[i] -= b[i];
  CHECK(norm2(r) <= 1e-11 * norm2(b));
}

TEST_CASE("rng: determinism") {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
}
