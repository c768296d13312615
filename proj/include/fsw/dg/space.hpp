#ifndef FSW_DG_SPACE_HPP
#define FSW_DG_SPACE_HPP

#include <functional>

#include "fsw/dg/mesh.hpp"
#include "fsw/la/dense.hpp"

namespace fsw::dg {

// Discontinuous tensor-Legendre space of order k in {0,1}, m-valued.
// The scalar basis is L2-orthonormal per cell, so the mass matrix is the
// identity. Dof layout: (cell * basis_count + basis) * m + component.
class DGSpace {
public:
  DGSpace(StructuredMesh mesh, std::size_t order, std::size_t state_dim);

  const StructuredMesh& mesh() const { return mesh_; }
  std::size_t order() const { return order_; }
  std::size_t state_dim() const { return state_dim_; }
  std::size_t basis_count() const { return basis_count_; } // per cell, scalar
  std::size_t block_size() const { return basis_count_ * state_dim_; }
  std::size_t dof_count() const { return mesh_.cell_count() * block_size(); }
  std::size_t dof_index(std::size_t cell, std::size_t basis, std::size_t comp) const {
    return (cell * basis_count_ + basis) * state_dim_ + comp;
  }

  // per-axis polynomial orders of scalar basis function b
  std::array<std::size_t, 2> basis_orders(std::size_t b) const {
    return {b % (order_ + 1), order_ == 0 ? 0 : b / (order_ + 1)};
  }
  // value at reference point xi in [-1,1]^d, physical normalization included
  double basis_value(std::size_t b, const model::SpacePoint& xi) const;
  // physical gradient at reference point
  std::array<double, 2> basis_gradient(std::size_t b, const model::SpacePoint& xi) const;

  model::SpacePoint physical_point(std::size_t cell, const model::SpacePoint& xi) const;

  // cellwise L2 projection via tensor Gauss quadrature with `qpoints` per axis
  la::Vector project(const std::function<la::Vector(const model::SpacePoint&)>& fn,
                     std::size_t qpoints) const;

  // evaluate a dof vector at a reference point of a cell
  la::Vector evaluate(const la::Vector& dofs, std::size_t cell,
                      const model::SpacePoint& xi) const;

  // sqrt of the integral of |u_h - fn|^2 over the domain
  double l2_error(const la::Vector& dofs,
                  const std::function<la::Vector(const model::SpacePoint&)>& fn,
                  std::size_t qpoints) const;

private:
  StructuredMesh mesh_;
  std::size_t order_;
  std::size_t state_dim_;
  std::size_t basis_count_;
};

// space with order k in {0,1}; rejects other orders
DGSpace build_space(const StructuredMesh& mesh, std::size_t order, std::size_t state_dim);

} // namespace fsw::dg

#endif
