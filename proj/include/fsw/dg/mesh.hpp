#ifndef FSW_DG_MESH_HPP
#define FSW_DG_MESH_HPP

#include <array>
#include <cstddef>

#include "fsw/model/system.hpp"

namespace fsw::dg {

// Uniform tensor grid on a box, dimension 1 or 2, optionally periodic per axis.
struct StructuredMesh {
  std::size_t dim = 1;
  std::array<std::size_t, 2> cells{1, 1};
  model::Box box;
  std::array<bool, 2> periodic{false, false};

  std::size_t cell_count() const { return dim == 1 ? cells[0] : cells[0] * cells[1]; }
  std::array<double, 2> cell_size() const {
    std::array<double, 2> h{0.0, 0.0};
    for (std::size_t i = 0; i < dim; ++i)
      h[i] = (box.hi[i] - box.lo[i]) / static_cast<double>(cells[i]);
    return h;
  }
  std::size_t cell_index(std::size_t ix, std::size_t iy = 0) const {
    return ix + cells[0] * iy;
  }
  std::array<std::size_t, 2> cell_coords(std::size_t cell) const {
    return {cell % cells[0], cell / cells[0]};
  }
  model::SpacePoint cell_center(std::size_t cell) const {
    const auto c = cell_coords(cell);
    const auto h = cell_size();
    model::SpacePoint x{0.0, 0.0};
    x[0] = box.lo[0] + (static_cast<double>(c[0]) + 0.5) * h[0];
    if (dim > 1) x[1] = box.lo[1] + (static_cast<double>(c[1]) + 0.5) * h[1];
    return x;
  }

  void check_valid() const {
    if (dim < 1 || dim > 2) throw Error("StructuredMesh: dimension must be 1 or 2");
    for (std::size_t i = 0; i < dim; ++i) {
      if (cells[i] < 1) throw Error("StructuredMesh: need at least one cell per axis");
      if (!(box.hi[i] > box.lo[i])) throw Error("StructuredMesh: cell volume would not be positive");
    }
    if (box.dim != dim) throw Error("StructuredMesh: box dimension mismatch");
  }
};

} // namespace fsw::dg

#endif
