#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace microem {

/// Axis-aligned rectangle (dim == 2) or box (dim == 3). Unused axes are ignored.
struct Box {
  int dim = 2;
  std::array<double, 3> lower{0.0, 0.0, 0.0};
  std::array<double, 3> upper{1.0, 1.0, 1.0};

  static Box rect(double x0, double x1, double y0, double y1);
  static Box cuboid(double x0, double x1, double y0, double y1, double z0, double z1);

  double measure() const;
  bool degenerate() const;
};

/// Constant P1 basis gradients and measure of one simplex.
/// Row k of `grads` is the gradient of the barycentric coordinate of vertex k;
/// only the first dim+1 rows and dim components are meaningful.
struct ElementGeometry {
  std::array<std::array<double, 3>, 4> grads{};
  double measure = 0.0;
};

/// Conforming simplicial mesh of a box. Immutable once built.
class StructuredMesh {
 public:
  StructuredMesh() = default;

  /// Wraps raw node coordinates (dim per node) and connectivity (dim+1 per
  /// element). Throws std::invalid_argument on out-of-range indices or
  /// non-positive element measures.
  StructuredMesh(int dim, std::vector<double> coords, std::vector<int> connectivity,
                 Box bounds, std::array<int, 3> divisions = {0, 0, 0});

  int dim() const { return dim_; }
  const Box& bounds() const { return bounds_; }
  const std::array<int, 3>& divisions() const { return divisions_; }

  std::size_t num_nodes() const { return coords_.size() / static_cast<std::size_t>(dim_); }
  std::size_t num_elements() const {
    return connectivity_.size() / static_cast<std::size_t>(dim_ + 1);
  }
  int nodes_per_element() const { return dim_ + 1; }

  std::span<const double> node(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::span<const int> element(std::size_t e) const {
    const auto npe = static_cast<std::size_t>(dim_ + 1);
    return {connectivity_.data() + e * npe, npe};
  }

  const std::vector<double>& coordinates() const { return coords_; }
  const std::vector<int>& connectivity() const { return connectivity_; }

  /// Maximum edge length over all elements.
  double h() const { return h_; }

  /// Sum of element measures.
  double total_measure() const;

 private:
  int dim_ = 2;
  Box bounds_{};
  std::array<int, 3> divisions_{0, 0, 0};
  std::vector<double> coords_;
  std::vector<int> connectivity_;
  double h_ = 0.0;
};

/// 2D: (nx+1)(ny+1) nodes, 2*nx*ny counterclockwise triangles, every cell
/// split along its lower-left to upper-right diagonal.
StructuredMesh build_rect_mesh(const Box& bounds, int nx, int ny);

/// 3D: (nx+1)(ny+1)(nz+1) nodes, Kuhn subdivision of each cell into six
/// positively oriented tetrahedra sharing the cell's main diagonal.
StructuredMesh build_box_mesh(const Box& bounds, int nx, int ny, int nz);

ElementGeometry element_geometry(const StructuredMesh& mesh, std::size_t e);

/// Facet audit: every facet is shared by at most two elements, and facets
/// owned by a single element lie on the domain boundary.
bool is_conforming(const StructuredMesh& mesh);

}  // namespace microem
