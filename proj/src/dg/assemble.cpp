#include "fsw/dg/assemble.hpp"

#include <cmath>
#include <memory>

#include "fsw/dg/quadrature.hpp"
#include "fsw/la/factor.hpp"

namespace fsw::dg {

using model::DenseMatrix;
using model::ParamPoint;
using model::SpacePoint;

namespace {

using MatrixFn = std::function<DenseMatrix(const SpacePoint&)>;
using BoundaryFn = std::function<DenseMatrix(const SpacePoint&, const SpacePoint&)>;
using SourceFn = std::function<la::Vector(const SpacePoint&)>;

// coefficient view with the parameter frozen
struct CoeffSet {
  std::size_t dim = 1;
  std::size_t m = 1;
  std::size_t quad_extra = 0;
  MatrixFn a0;               // null -> zero
  std::vector<MatrixFn> a;   // empty -> no first-order part
  MatrixFn div;              // null -> zero
  BoundaryFn bnd;            // null -> zero
  SourceFn rhs;              // null -> zero
};

struct CoreParts {
  bool zeroth = false;
  bool transport = false;
  bool rhs = false;
  bool grams = false;
  bool diagnostics = false;
};

std::size_t smooth_extra(model::Smoothness s) {
  switch (s) {
    case model::Smoothness::Constant: return 0;
    case model::Smoothness::Polynomial: return 1;
    case model::Smoothness::General: return 2;
  }
  return 2;
}

DenseMatrix eval_or_zero(const MatrixFn& f, const SpacePoint& x, std::size_t m) {
  if (!f) return DenseMatrix(m, m, 0.0);
  return f(x);
}

// spectral absolute value of a symmetric matrix
DenseMatrix spectral_abs(const DenseMatrix& d) {
  const auto eig = la::sym_eig(d);
  const std::size_t m = d.rows();
  DenseMatrix out(m, m);
  for (std::size_t k = 0; k < m; ++k) {
    const double mag = std::abs(eig.values[k]);
    if (mag == 0.0) continue;
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < m; ++c) out(r, c) += mag * eig.vectors(r, k) * eig.vectors(c, k);
  }
  return out;
}

struct BasisTables {
  std::size_t nq1 = 0;                       // points per axis
  std::vector<SpacePoint> vol_xi;            // tensor reference points
  std::vector<double> vol_w;                 // reference weights incl. jacobian
  std::vector<std::vector<double>> val;      // [q][b]
  std::vector<std::vector<std::array<double, 2>>> grad; // [q][b]
};

BasisTables volume_tables(const DGSpace& space, std::size_t nq) {
  BasisTables t;
  t.nq1 = nq;
  const auto& rule = gauss_legendre(nq);
  const auto h = space.mesh().cell_size();
  const std::size_t dim = space.mesh().dim;
  double jac = 1.0;
  for (std::size_t i = 0; i < dim; ++i) jac *= 0.5 * h[i];
  const std::size_t qy = dim > 1 ? nq : 1;
  for (std::size_t qx = 0; qx < nq; ++qx) {
    for (std::size_t q2 = 0; q2 < qy; ++q2) {
      SpacePoint xi{rule.points[qx], dim > 1 ? rule.points[q2] : 0.0};
      t.vol_xi.push_back(xi);
      t.vol_w.push_back(rule.weights[qx] * (dim > 1 ? rule.weights[q2] : 1.0) * jac);
    }
  }
  t.val.resize(t.vol_xi.size());
  t.grad.resize(t.vol_xi.size());
  for (std::size_t q = 0; q < t.vol_xi.size(); ++q) {
    t.val[q].resize(space.basis_count());
    t.grad[q].resize(space.basis_count());
    for (std::size_t b = 0; b < space.basis_count(); ++b) {
      t.val[q][b] = space.basis_value(b, t.vol_xi[q]);
      t.grad[q][b] = space.basis_gradient(b, t.vol_xi[q]);
    }
  }
  return t;
}

struct FaceTables {
  // tangential quadrature: points (reference coordinate on the face) and
  // weights including the tangential jacobian
  std::vector<double> tq;
  std::vector<double> tw;
  // traces: [q][b]; "hi" = trace at xi[axis]=+1, "lo" = at xi[axis]=-1
  std::vector<std::vector<double>> hi, lo;
};

FaceTables face_tables(const DGSpace& space, std::size_t axis, std::size_t nq) {
  FaceTables t;
  const std::size_t dim = space.mesh().dim;
  const auto h = space.mesh().cell_size();
  if (dim == 1) {
    t.tq = {0.0};
    t.tw = {1.0};
  } else {
    const auto& rule = gauss_legendre(nq);
    const std::size_t other = 1 - axis;
    for (std::size_t q = 0; q < nq; ++q) {
      t.tq.push_back(rule.points[q]);
      t.tw.push_back(rule.weights[q] * 0.5 * h[other]);
    }
  }
  t.hi.resize(t.tq.size());
  t.lo.resize(t.tq.size());
  for (std::size_t q = 0; q < t.tq.size(); ++q) {
    t.hi[q].resize(space.basis_count());
    t.lo[q].resize(space.basis_count());
    SpacePoint xhi{0.0, 0.0}, xlo{0.0, 0.0};
    xhi[axis] = 1.0;
    xlo[axis] = -1.0;
    if (dim > 1) {
      xhi[1 - axis] = t.tq[q];
      xlo[1 - axis] = t.tq[q];
    }
    for (std::size_t b = 0; b < space.basis_count(); ++b) {
      t.hi[q][b] = space.basis_value(b, xhi);
      t.lo[q][b] = space.basis_value(b, xlo);
    }
  }
  return t;
}

void core_assemble(const DGSpace& space, const CoeffSet& cs, const CoreParts& parts,
                   AssembledProblem& out) {
  const StructuredMesh& mesh = space.mesh();
  const std::size_t dim = mesh.dim;
  const std::size_t m = space.state_dim();
  const std::size_t nb = space.basis_count();
  const std::size_t bs = space.block_size();
  const std::size_t ndof = space.dof_count();
  if (cs.m != m || cs.dim != dim) throw Error("core_assemble: coefficient dimensions mismatch");

  const std::size_t nq = space.order() + 1 + cs.quad_extra;
  const BasisTables vt = volume_tables(space, nq);
  const bool transport = parts.transport && !cs.a.empty();

  const bool need_system = parts.zeroth || parts.transport;
  if (need_system && out.system.rows() == 0) out.system = la::SparseMatrix(ndof, ndof);
  if (parts.rhs && out.rhs.empty()) out.rhs.assign(ndof, 0.0);
  if (parts.grams) {
    out.mass = BlockDiagMatrix(mesh.cell_count(), bs);
    out.graph_gram = BlockDiagMatrix(mesh.cell_count(), bs);
    out.adjoint_gram = BlockDiagMatrix(mesh.cell_count(), bs);
  }
  if (parts.diagnostics) {
    out.op_volume = la::SparseMatrix(ndof, ndof);
    out.adj_op_volume = la::SparseMatrix(ndof, ndof);
    out.boundary_d = la::SparseMatrix(ndof, ndof);
    out.boundary_m = la::SparseMatrix(ndof, ndof);
    out.sym_zero = la::SparseMatrix(ndof, ndof);
  }

  // ---- volume loop ----------------------------------------------------
  std::vector<double> cellblock(bs * bs), symblock(bs * bs);
  std::vector<double> avec(nb * m * m), astar(nb * m * m); // [b*m+c][r]
  for (std::size_t cell = 0; cell < mesh.cell_count(); ++cell) {
    std::fill(cellblock.begin(), cellblock.end(), 0.0);
    std::fill(symblock.begin(), symblock.end(), 0.0);
    for (std::size_t q = 0; q < vt.vol_xi.size(); ++q) {
      const double w = vt.vol_w[q];
      const SpacePoint x = space.physical_point(cell, vt.vol_xi[q]);
      const auto& val = vt.val[q];
      const auto& grad = vt.grad[q];

      DenseMatrix a0m, divm;
      std::vector<DenseMatrix> am(dim);
      const bool need_a0 = parts.zeroth || parts.grams || parts.diagnostics;
      const bool need_tr = transport || parts.grams || parts.diagnostics;
      if (need_a0) a0m = eval_or_zero(cs.a0, x, m);
      if (need_tr || parts.diagnostics) {
        divm = eval_or_zero(cs.div, x, m);
        for (std::size_t ax = 0; ax < dim; ++ax)
          am[ax] = cs.a.empty() ? DenseMatrix(m, m, 0.0) : cs.a[ax](x);
      }

      if (parts.zeroth) {
        for (std::size_t bi = 0; bi < nb; ++bi)
          for (std::size_t bj = 0; bj < nb; ++bj) {
            const double pij = w * val[bi] * val[bj];
            for (std::size_t cv = 0; cv < m; ++cv)
              for (std::size_t cu = 0; cu < m; ++cu)
                cellblock[(bi * m + cv) * bs + bj * m + cu] += pij * a0m(cv, cu);
          }
      }
      if (transport) {
        for (std::size_t bi = 0; bi < nb; ++bi)
          for (std::size_t bj = 0; bj < nb; ++bj) {
            const double pij = w * val[bi] * val[bj];
            for (std::size_t cv = 0; cv < m; ++cv)
              for (std::size_t cu = 0; cu < m; ++cu) {
                double s = -pij * divm(cu, cv);
                for (std::size_t ax = 0; ax < dim; ++ax)
                  s -= w * val[bj] * grad[bi][ax] * am[ax](cu, cv);
                cellblock[(bi * m + cv) * bs + bj * m + cu] += s;
              }
          }
      }
      if (parts.rhs && cs.rhs) {
        const la::Vector f = cs.rhs(x);
        for (std::size_t bi = 0; bi < nb; ++bi)
          for (std::size_t r = 0; r < m; ++r)
            out.rhs[space.dof_index(cell, bi, r)] += w * val[bi] * f[r];
      }
      if (parts.grams || parts.diagnostics) {
        // A phi and A* phi as m-vectors per scalar basis x component
        for (std::size_t b = 0; b < nb; ++b) {
          for (std::size_t c = 0; c < m; ++c) {
            for (std::size_t r = 0; r < m; ++r) {
              double va = val[b] * a0m(r, c);
              double vs = val[b] * (a0m(c, r) - divm(r, c));
              for (std::size_t ax = 0; ax < dim; ++ax) {
                va += grad[b][ax] * am[ax](r, c);
                vs -= grad[b][ax] * am[ax](c, r);
              }
              avec[(b * m + c) * m + r] = va;
              astar[(b * m + c) * m + r] = vs;
            }
          }
        }
        if (parts.grams) {
          for (std::size_t i = 0; i < bs; ++i) {
            const std::size_t bi = i / m, ci = i % m;
            for (std::size_t j = 0; j < bs; ++j) {
              const std::size_t bj = j / m, cj = j % m;
              double g = 0.0, gs = 0.0;
              for (std::size_t r = 0; r < m; ++r) {
                g += avec[i * m + r] * avec[j * m + r];
                gs += astar[i * m + r] * astar[j * m + r];
              }
              out.graph_gram.at(cell, i, j) += w * g;
              out.adjoint_gram.at(cell, i, j) += w * gs;
              if (ci == cj) {
                const double mm = w * vt.val[q][bi] * vt.val[q][bj];
                out.mass.at(cell, i, j) += mm;
              }
            }
          }
        }
        if (parts.diagnostics) {
          for (std::size_t bi = 0; bi < nb; ++bi)
            for (std::size_t r = 0; r < m; ++r) {
              const std::size_t row = space.dof_index(cell, bi, r);
              for (std::size_t j = 0; j < bs; ++j) {
                out.op_volume.add(row, cell * bs + j, w * val[bi] * avec[j * m + r]);
                out.adj_op_volume.add(row, cell * bs + j, w * val[bi] * astar[j * m + r]);
              }
            }
          for (std::size_t bi = 0; bi < nb; ++bi)
            for (std::size_t bj = 0; bj < nb; ++bj) {
              const double pij = w * val[bi] * val[bj];
              for (std::size_t cv = 0; cv < m; ++cv)
                for (std::size_t cu = 0; cu < m; ++cu) {
                  symblock[(bi * m + cv) * bs + bj * m + cu] +=
                      pij * (a0m(cv, cu) + a0m(cu, cv) - divm(cv, cu));
                }
            }
        }
      }
    }
    if (need_system) {
      for (std::size_t i = 0; i < bs; ++i)
        for (std::size_t j = 0; j < bs; ++j)
          if (cellblock[i * bs + j] != 0.0)
            out.system.add(cell * bs + i, cell * bs + j, cellblock[i * bs + j]);
    }
    if (parts.diagnostics) {
      for (std::size_t i = 0; i < bs; ++i)
        for (std::size_t j = 0; j < bs; ++j)
          if (symblock[i * bs + j] != 0.0)
            out.sym_zero.add(cell * bs + i, cell * bs + j, symblock[i * bs + j]);
    }
    // grams: mass added directly above; graph/adjoint need + mass
  }
  if (parts.grams) {
    out.graph_gram.add_scaled(out.mass, 1.0);
    out.adjoint_gram.add_scaled(out.mass, 1.0);
  }

  // ---- face loops ------------------------------------------------------
  if (transport || parts.diagnostics) {
    const auto h = mesh.cell_size();
    for (std::size_t axis = 0; axis < dim; ++axis) {
      const FaceTables ft = face_tables(space, axis, nq);
      const std::size_t na = mesh.cells[axis];
      const std::size_t nt = dim > 1 ? mesh.cells[1 - axis] : 1;
      const std::size_t nfaces_int = mesh.periodic[axis] ? na : (na >= 1 ? na - 1 : 0);

      std::vector<double> fmm(bs * bs), fmp(bs * bs), fpm(bs * bs), fpp(bs * bs);

      // interior (and wraparound) faces
      if (transport) {
        for (std::size_t it = 0; it < nt; ++it) {
          for (std::size_t fi = 0; fi < nfaces_int; ++fi) {
            const std::size_t ia_minus = fi;
            const std::size_t ia_plus = (fi + 1) % na;
            std::size_t cell_minus, cell_plus;
            if (dim == 1) {
              cell_minus = ia_minus;
              cell_plus = ia_plus;
            } else if (axis == 0) {
              cell_minus = mesh.cell_index(ia_minus, it);
              cell_plus = mesh.cell_index(ia_plus, it);
            } else {
              cell_minus = mesh.cell_index(it, ia_minus);
              cell_plus = mesh.cell_index(it, ia_plus);
            }
            std::fill(fmm.begin(), fmm.end(), 0.0);
            std::fill(fmp.begin(), fmp.end(), 0.0);
            std::fill(fpm.begin(), fpm.end(), 0.0);
            std::fill(fpp.begin(), fpp.end(), 0.0);
            for (std::size_t q = 0; q < ft.tq.size(); ++q) {
              SpacePoint x{0.0, 0.0};
              x[axis] = mesh.box.lo[axis] + static_cast<double>(fi + 1) * h[axis];
              if (dim > 1)
                x[1 - axis] = mesh.box.lo[1 - axis] +
                              (static_cast<double>(it) + 0.5 * (1.0 + ft.tq[q])) * h[1 - axis];
              const DenseMatrix dmat = cs.a[axis](x);
              const DenseMatrix dabs = spectral_abs(dmat);
              const double w = ft.tw[q];
              for (std::size_t bi = 0; bi < nb; ++bi)
                for (std::size_t bj = 0; bj < nb; ++bj) {
                  const double t_mm = w * ft.hi[q][bi] * ft.hi[q][bj];
                  const double t_mp = w * ft.hi[q][bi] * ft.lo[q][bj];
                  const double t_pm = w * ft.lo[q][bi] * ft.hi[q][bj];
                  const double t_pp = w * ft.lo[q][bi] * ft.lo[q][bj];
                  for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t c = 0; c < m; ++c) {
                      const double fm = 0.5 * (dmat(r, c) + dabs(r, c));
                      const double fp = 0.5 * (dmat(r, c) - dabs(r, c));
                      fmm[(bi * m + r) * bs + bj * m + c] += t_mm * fm;
                      fmp[(bi * m + r) * bs + bj * m + c] += t_mp * fp;
                      fpm[(bi * m + r) * bs + bj * m + c] -= t_pm * fm;
                      fpp[(bi * m + r) * bs + bj * m + c] -= t_pp * fp;
                    }
                }
            }
            for (std::size_t i = 0; i < bs; ++i)
              for (std::size_t j = 0; j < bs; ++j) {
                if (fmm[i * bs + j] != 0.0)
                  out.system.add(cell_minus * bs + i, cell_minus * bs + j, fmm[i * bs + j]);
                if (fmp[i * bs + j] != 0.0)
                  out.system.add(cell_minus * bs + i, cell_plus * bs + j, fmp[i * bs + j]);
                if (fpm[i * bs + j] != 0.0)
                  out.system.add(cell_plus * bs + i, cell_minus * bs + j, fpm[i * bs + j]);
                if (fpp[i * bs + j] != 0.0)
                  out.system.add(cell_plus * bs + i, cell_plus * bs + j, fpp[i * bs + j]);
              }
          }
        }
      }

      // boundary faces
      if (!mesh.periodic[axis] && (transport || parts.diagnostics)) {
        for (int side = 0; side < 2; ++side) {
          SpacePoint n{0.0, 0.0};
          n[axis] = side == 0 ? -1.0 : 1.0;
          const std::size_t ia = side == 0 ? 0 : na - 1;
          const auto& trace = side == 0 ? ft.lo : ft.hi;
          for (std::size_t it = 0; it < nt; ++it) {
            std::size_t cell;
            if (dim == 1)
              cell = ia;
            else if (axis == 0)
              cell = mesh.cell_index(ia, it);
            else
              cell = mesh.cell_index(it, ia);
            std::fill(fmm.begin(), fmm.end(), 0.0); // reused for B contribution
            std::fill(fmp.begin(), fmp.end(), 0.0); // reused for D diag
            std::fill(fpm.begin(), fpm.end(), 0.0); // reused for M diag
            for (std::size_t q = 0; q < ft.tq.size(); ++q) {
              SpacePoint x{0.0, 0.0};
              x[axis] = side == 0 ? mesh.box.lo[axis] : mesh.box.hi[axis];
              if (dim > 1)
                x[1 - axis] = mesh.box.lo[1 - axis] +
                              (static_cast<double>(it) + 0.5 * (1.0 + ft.tq[q])) * h[1 - axis];
              DenseMatrix dmat = cs.a.empty() ? DenseMatrix(m, m, 0.0) : cs.a[axis](x);
              if (side == 0)
                for (std::size_t r = 0; r < m; ++r)
                  for (std::size_t c = 0; c < m; ++c) dmat(r, c) = -dmat(r, c);
              DenseMatrix mmat = cs.bnd ? cs.bnd(x, n) : DenseMatrix(m, m, 0.0);
              const double w = ft.tw[q];
              for (std::size_t bi = 0; bi < nb; ++bi)
                for (std::size_t bj = 0; bj < nb; ++bj) {
                  const double t = w * trace[q][bi] * trace[q][bj];
                  for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t c = 0; c < m; ++c) {
                      const std::size_t idx = (bi * m + r) * bs + bj * m + c;
                      if (transport) fmm[idx] += t * 0.5 * (dmat(r, c) + mmat(r, c));
                      if (parts.diagnostics) {
                        fmp[idx] += t * dmat(r, c);
                        fpm[idx] += t * mmat(r, c);
                      }
                    }
                }
            }
            for (std::size_t i = 0; i < bs; ++i)
              for (std::size_t j = 0; j < bs; ++j) {
                if (transport && fmm[i * bs + j] != 0.0)
                  out.system.add(cell * bs + i, cell * bs + j, fmm[i * bs + j]);
                if (parts.diagnostics) {
                  if (fmp[i * bs + j] != 0.0)
                    out.boundary_d.add(cell * bs + i, cell * bs + j, fmp[i * bs + j]);
                  if (fpm[i * bs + j] != 0.0)
                    out.boundary_m.add(cell * bs + i, cell * bs + j, fpm[i * bs + j]);
                }
              }
          }
        }
      }
    }
  }

  if (need_system) out.system.finalize();
  if (parts.diagnostics) {
    out.op_volume.finalize();
    out.adj_op_volume.finalize();
    out.boundary_d.finalize();
    out.boundary_m.finalize();
    out.sym_zero.finalize();
  }
}

CoeffSet coeff_set_from_system(const model::FriedrichsSystem& sys, const ParamPoint& mu) {
  CoeffSet cs;
  cs.dim = sys.space_dim;
  cs.m = sys.state_dim;
  std::size_t extra = smooth_extra(sys.a0.smoothness);
  for (const auto& ai : sys.a) extra = std::max(extra, smooth_extra(ai.smoothness));
  extra = std::max(extra, smooth_extra(sys.rhs.smoothness));
  cs.quad_extra = extra;
  cs.a0 = [&sys, mu](const SpacePoint& x) { return sys.a0.eval(mu, x); };
  for (std::size_t i = 0; i < sys.space_dim; ++i) {
    const auto& f = sys.a[i];
    cs.a.push_back([&f, mu](const SpacePoint& x) { return f.eval(mu, x); });
  }
  cs.div = [&sys, mu](const SpacePoint& x) { return sys.divergence(mu, x); };
  cs.bnd = [&sys, mu](const SpacePoint& x, const SpacePoint& n) {
    return sys.boundary_matrix(mu, x, n);
  };
  cs.rhs = [&sys, mu](const SpacePoint& x) { return sys.rhs.eval(mu, x); };
  return cs;
}

} // namespace

void check_positivity(const model::FriedrichsSystem& sys, const ParamPoint& mu) {
  const auto& box = sys.domain;
  const std::size_t pts = 3;
  const std::size_t ny = sys.space_dim > 1 ? pts : 1;
  for (std::size_t i = 0; i < pts; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      SpacePoint x{0.0, 0.0};
      x[0] = box.lo[0] + (box.hi[0] - box.lo[0]) * (static_cast<double>(i) + 0.5) / pts;
      if (sys.space_dim > 1)
        x[1] = box.lo[1] + (box.hi[1] - box.lo[1]) * (static_cast<double>(j) + 0.5) / ny;
      const DenseMatrix a0 = sys.a0.eval(mu, x);
      const DenseMatrix dv = sys.divergence(mu, x);
      DenseMatrix sym(sys.state_dim, sys.state_dim);
      for (std::size_t r = 0; r < sys.state_dim; ++r)
        for (std::size_t c = 0; c < sys.state_dim; ++c) sym(r, c) = a0(r, c) + a0(c, r) - dv(r, c);
      for (std::size_t r = 0; r < sys.state_dim; ++r)
        for (std::size_t c = r + 1; c < sys.state_dim; ++c) {
          const double v = 0.5 * (sym(r, c) + sym(c, r));
          sym(r, c) = sym(c, r) = v;
        }
      const double lmin = la::sym_eig(sym).values.front();
      if (!(lmin > 0.0))
        throw Error("assemble: positivity (FS2) fails at sampled point; eps estimate " +
                    format_double(0.5 * lmin));
    }
  }
}

AssembledProblem assemble(const model::FriedrichsSystem& sys, const DGSpace& space,
                          const ParamPoint& mu, const AssembleParts& parts) {
  sys.check_consistent();
  if (space.state_dim() != sys.state_dim || space.mesh().dim != sys.space_dim)
    throw Error("assemble: space does not match the system dimensions");
  if (!sys.params.contains(mu)) throw Error("assemble: parameter outside the parameter box");
  if (parts.system) check_positivity(sys, mu);

  AssembledProblem out;
  out.mu = mu;
  CoeffSet cs = coeff_set_from_system(sys, mu);
  CoreParts cp;
  cp.zeroth = parts.system;
  cp.transport = parts.system;
  cp.rhs = parts.system;
  cp.grams = parts.grams;
  cp.diagnostics = parts.diagnostics;
  core_assemble(space, cs, cp, out);
  return out;
}

BlockDiagMatrix graph_gram(const model::FriedrichsSystem& sys, const DGSpace& space,
                           const ParamPoint& mu) {
  AssembledProblem out;
  out.mu = mu;
  CoeffSet cs = coeff_set_from_system(sys, mu);
  CoreParts cp;
  cp.grams = true;
  core_assemble(space, cs, cp, out);
  return out.graph_gram;
}

BlockDiagMatrix l2_gram(const DGSpace& space) {
  AssembledProblem out;
  CoeffSet cs;
  cs.dim = space.mesh().dim;
  cs.m = space.state_dim();
  cs.quad_extra = 0;
  CoreParts cp;
  cp.grams = true;
  core_assemble(space, cs, cp, out);
  return out.mass;
}

BlockDiagMatrix reference_gram(const model::FriedrichsSystem& sys, const DGSpace& space) {
  if (!sys.n1)
    throw Error("reference_gram: system does not declare the N1 coefficient structure");
  AssembledProblem out;
  CoeffSet cs;
  cs.dim = sys.space_dim;
  cs.m = sys.state_dim;
  cs.quad_extra = 0;
  const ParamPoint mu0 = sys.params.midpoint();
  for (const auto& f : sys.n1->tilde) {
    cs.quad_extra = std::max(cs.quad_extra, smooth_extra(f.smoothness));
    cs.a.push_back([&f, mu0](const SpacePoint& x) { return f.eval(mu0, x); });
  }
  CoreParts cp;
  cp.grams = true;
  core_assemble(space, cs, cp, out);
  return out.graph_gram;
}

double ibp_residual(const AssembledProblem& ap, const la::Vector& u, const la::Vector& v) {
  if (ap.op_volume.rows() == 0)
    throw Error("ibp_residual: assembled problem lacks diagnostic matrices");
  const double lhs = la::dot(v, ap.op_volume.apply(u));
  const double mid = la::dot(u, ap.adj_op_volume.apply(v));
  const double bnd = la::dot(v, ap.boundary_d.apply(u));
  GramFactor g(ap.graph_gram);
  const double nu = g.norm(u), nv = g.norm(v);
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::abs(lhs - mid - bnd) / (nu * nv);
}

double ibp_residual(const model::FriedrichsSystem& sys, const DGSpace& space, const ParamPoint& mu,
                    const la::Vector& u, const la::Vector& v) {
  AssembleParts parts;
  parts.system = false;
  parts.grams = true;
  parts.diagnostics = true;
  const AssembledProblem ap = assemble(sys, space, mu, parts);
  return ibp_residual(ap, u, v);
}

AffineOperator::AffineOperator(const model::FriedrichsSystem& sys, const DGSpace& space) {
  if (!sys.expansion) throw Error("AffineOperator: system declares no separable expansion");
  const ParamPoint mu0 = sys.params.midpoint();

  for (const auto& term : sys.expansion->terms) {
    AssembledProblem out;
    CoeffSet cs;
    cs.dim = sys.space_dim;
    cs.m = sys.state_dim;
    CoreParts cp;
    if (term.piece == model::ExpansionTerm::Piece::Transport) {
      if (!sys.n1)
        throw Error("AffineOperator: transport component requires the N1 structure");
      // reference transport system: tilde fields with the system's boundary rule
      model::FriedrichsSystem tsys = sys;
      tsys.a = sys.n1->tilde;
      tsys.div_a.reset(); // finite differences on the tilde fields
      for (const auto& f : tsys.a) cs.quad_extra = std::max(cs.quad_extra, smooth_extra(f.smoothness));
      if (sys.boundary.kind == model::BoundaryOperatorSpec::Kind::Custom)
        throw Error("AffineOperator: custom boundary rules are not separable");
      auto tsys_ptr = std::make_shared<model::FriedrichsSystem>(std::move(tsys));
      for (std::size_t i = 0; i < tsys_ptr->a.size(); ++i) {
        cs.a.push_back([tsys_ptr, i, mu0](const SpacePoint& x) {
          return tsys_ptr->a[i].eval(mu0, x);
        });
      }
      cs.div = [tsys_ptr, mu0](const SpacePoint& x) { return tsys_ptr->divergence(mu0, x); };
      cs.bnd = [tsys_ptr, mu0](const SpacePoint& x, const SpacePoint& n) {
        return tsys_ptr->boundary_matrix(mu0, x, n);
      };
      cp.transport = true;
    } else {
      if (!term.a0) throw Error("AffineOperator: reaction term lacks a coefficient");
      const auto a0q = *term.a0;
      cs.quad_extra = smooth_extra(a0q.smoothness);
      auto a0_ptr = std::make_shared<model::CoefficientField>(a0q);
      cs.a0 = [a0_ptr, mu0](const SpacePoint& x) { return a0_ptr->eval(mu0, x); };
      cp.zeroth = true;
    }
    core_assemble(space, cs, cp, out);
    thetas_.push_back(term.theta);
    matrices_.push_back(std::move(out.system));
  }

  for (const auto& rt : sys.expansion->rhs_terms) {
    AssembledProblem out;
    CoeffSet cs;
    cs.dim = sys.space_dim;
    cs.m = sys.state_dim;
    cs.quad_extra = smooth_extra(rt.f.smoothness);
    auto f_ptr = std::make_shared<model::SourceField>(rt.f);
    cs.rhs = [f_ptr, mu0](const SpacePoint& x) { return f_ptr->eval(mu0, x); };
    CoreParts cp;
    cp.rhs = true;
    core_assemble(space, cs, cp, out);
    rhs_thetas_.push_back(rt.theta);
    rhs_vectors_.push_back(std::move(out.rhs));
  }
}

la::SparseMatrix AffineOperator::system_matrix(const ParamPoint& mu) const {
  std::vector<double> coeffs;
  std::vector<const la::SparseMatrix*> terms;
  for (std::size_t q = 0; q < thetas_.size(); ++q) {
    coeffs.push_back(thetas_[q](mu));
    terms.push_back(&matrices_[q]);
  }
  return la::SparseMatrix::weighted_sum(coeffs, terms);
}

la::Vector AffineOperator::rhs(const ParamPoint& mu) const {
  if (rhs_vectors_.empty()) throw Error("AffineOperator: no rhs terms declared");
  la::Vector out(rhs_vectors_.front().size(), 0.0);
  for (std::size_t q = 0; q < rhs_vectors_.size(); ++q) {
    const double th = rhs_thetas_[q](mu);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += th * rhs_vectors_[q][i];
  }
  return out;
}

} // namespace fsw::dg
