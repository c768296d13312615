#include "fsw/dg/space.hpp"

#include <cmath>

#include "fsw/dg/quadrature.hpp"

namespace fsw::dg {

DGSpace::DGSpace(StructuredMesh mesh, std::size_t order, std::size_t state_dim)
    : mesh_(std::move(mesh)), order_(order), state_dim_(state_dim) {
  mesh_.check_valid();
  if (order_ > 1) throw Error("DGSpace: polynomial order must be 0 or 1");
  if (state_dim_ < 1) throw Error("DGSpace: state dimension must be positive");
  basis_count_ = 1;
  for (std::size_t i = 0; i < mesh_.dim; ++i) basis_count_ *= order_ + 1;
}

DGSpace build_space(const StructuredMesh& mesh, std::size_t order, std::size_t state_dim) {
  return DGSpace(mesh, order, state_dim);
}

namespace {
inline double leg(std::size_t n, double x) { return n == 0 ? 1.0 : x; }
inline double dleg(std::size_t n) { return n == 0 ? 0.0 : 1.0; }
} // namespace

double DGSpace::basis_value(std::size_t b, const model::SpacePoint& xi) const {
  const auto ord = basis_orders(b);
  const auto h = mesh_.cell_size();
  double v = 1.0;
  for (std::size_t ax = 0; ax < mesh_.dim; ++ax)
    v *= std::sqrt((2.0 * ord[ax] + 1.0) / h[ax]) * leg(ord[ax], xi[ax]);
  return v;
}

std::array<double, 2> DGSpace::basis_gradient(std::size_t b, const model::SpacePoint& xi) const {
  const auto ord = basis_orders(b);
  const auto h = mesh_.cell_size();
  std::array<double, 2> g{0.0, 0.0};
  for (std::size_t ax = 0; ax < mesh_.dim; ++ax) {
    double v = 1.0;
    for (std::size_t other = 0; other < mesh_.dim; ++other) {
      const double norm = std::sqrt((2.0 * ord[other] + 1.0) / h[other]);
      if (other == ax)
        v *= norm * dleg(ord[other]) * (2.0 / h[other]);
      else
        v *= norm * leg(ord[other], xi[other]);
    }
    g[ax] = v;
  }
  return g;
}

model::SpacePoint DGSpace::physical_point(std::size_t cell, const model::SpacePoint& xi) const {
  const auto c = mesh_.cell_coords(cell);
  const auto h = mesh_.cell_size();
  model::SpacePoint x{0.0, 0.0};
  x[0] = mesh_.box.lo[0] + (static_cast<double>(c[0]) + 0.5 * (1.0 + xi[0])) * h[0];
  if (mesh_.dim > 1)
    x[1] = mesh_.box.lo[1] + (static_cast<double>(c[1]) + 0.5 * (1.0 + xi[1])) * h[1];
  return x;
}

la::Vector DGSpace::project(const std::function<la::Vector(const model::SpacePoint&)>& fn,
                            std::size_t qpoints) const {
  const QuadratureRule& rule = gauss_legendre(qpoints);
  const auto h = mesh_.cell_size();
  double jac = 1.0;
  for (std::size_t i = 0; i < mesh_.dim; ++i) jac *= 0.5 * h[i];

  la::Vector dofs(dof_count(), 0.0);
  const std::size_t qy = mesh_.dim > 1 ? qpoints : 1;
  for (std::size_t cell = 0; cell < mesh_.cell_count(); ++cell) {
    for (std::size_t qx = 0; qx < qpoints; ++qx) {
      for (std::size_t q2 = 0; q2 < qy; ++q2) {
        model::SpacePoint xi{rule.points[qx], mesh_.dim > 1 ? rule.points[q2] : 0.0};
        double w = rule.weights[qx] * (mesh_.dim > 1 ? rule.weights[q2] : 1.0) * jac;
        const model::SpacePoint x = physical_point(cell, xi);
        const la::Vector val = fn(x);
        if (val.size() != state_dim_) throw Error("DGSpace::project: field value size mismatch");
        for (std::size_t b = 0; b < basis_count_; ++b) {
          const double phi = basis_value(b, xi);
          for (std::size_t c = 0; c < state_dim_; ++c)
            dofs[dof_index(cell, b, c)] += w * phi * val[c];
        }
      }
    }
  }
  return dofs;
}

la::Vector DGSpace::evaluate(const la::Vector& dofs, std::size_t cell,
                             const model::SpacePoint& xi) const {
  la::Vector out(state_dim_, 0.0);
  for (std::size_t b = 0; b < basis_count_; ++b) {
    const double phi = basis_value(b, xi);
    for (std::size_t c = 0; c < state_dim_; ++c) out[c] += dofs[dof_index(cell, b, c)] * phi;
  }
  return out;
}

double DGSpace::l2_error(const la::Vector& dofs,
                         const std::function<la::Vector(const model::SpacePoint&)>& fn,
                         std::size_t qpoints) const {
  const QuadratureRule& rule = gauss_legendre(qpoints);
  const auto h = mesh_.cell_size();
  double jac = 1.0;
  for (std::size_t i = 0; i < mesh_.dim; ++i) jac *= 0.5 * h[i];

  double err2 = 0.0;
  const std::size_t qy = mesh_.dim > 1 ? qpoints : 1;
  for (std::size_t cell = 0; cell < mesh_.cell_count(); ++cell) {
    for (std::size_t qx = 0; qx < qpoints; ++qx) {
      for (std::size_t q2 = 0; q2 < qy; ++q2) {
        model::SpacePoint xi{rule.points[qx], mesh_.dim > 1 ? rule.points[q2] : 0.0};
        const double w = rule.weights[qx] * (mesh_.dim > 1 ? rule.weights[q2] : 1.0) * jac;
        const la::Vector uh = evaluate(dofs, cell, xi);
        const la::Vector ex = fn(physical_point(cell, xi));
        for (std::size_t c = 0; c < state_dim_; ++c) {
          const double d = uh[c] - ex[c];
          err2 += w * d * d;
        }
      }
    }
  }
  return std::sqrt(err2);
}

} // namespace fsw::dg
