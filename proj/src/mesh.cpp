#include "microem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace microem {

Box Box::rect(double x0, double x1, double y0, double y1) {
  Box b;
  b.dim = 2;
  b.lower = {x0, y0, 0.0};
  b.upper = {x1, y1, 0.0};
  return b;
}

Box Box::cuboid(double x0, double x1, double y0, double y1, double z0, double z1) {
  Box b;
  b.dim = 3;
  b.lower = {x0, y0, z0};
  b.upper = {x1, y1, z1};
  return b;
}

double Box::measure() const {
  double m = 1.0;
  for (int d = 0; d < dim; ++d) m *= upper[d] - lower[d];
  return m;
}

bool Box::degenerate() const {
  if (dim != 2 && dim != 3) return true;
  for (int d = 0; d < dim; ++d) {
    if (!std::isfinite(lower[d]) || !std::isfinite(upper[d]) || !(upper[d] > lower[d])) {
      return true;
    }
  }
  return false;
}

namespace {

// Signed determinant of the edge matrix [x1-x0, ..., xd-x0] (columns).
double signed_det(const StructuredMesh& mesh, std::span<const int> conn) {
  const int dim = mesh.dim();
  std::array<std::array<double, 3>, 3> j{};
  const auto x0 = mesh.node(static_cast<std::size_t>(conn[0]));
  for (int k = 1; k <= dim; ++k) {
    const auto xk = mesh.node(static_cast<std::size_t>(conn[k]));
    for (int d = 0; d < dim; ++d) j[d][k - 1] = xk[d] - x0[d];
  }
  if (dim == 2) return j[0][0] * j[1][1] - j[0][1] * j[1][0];
  return j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) -
         j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0]) +
         j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

void check_divisions(std::initializer_list<int> counts) {
  for (int c : counts) {
    if (c < 1) throw std::invalid_argument("mesh division counts must be >= 1, got " + std::to_string(c));
  }
}

}  // namespace

StructuredMesh::StructuredMesh(int dim, std::vector<double> coords, std::vector<int> connectivity,
                               Box bounds, std::array<int, 3> divisions)
    : dim_(dim),
      bounds_(bounds),
      divisions_(divisions),
      coords_(std::move(coords)),
      connectivity_(std::move(connectivity)) {
  if (dim_ != 2 && dim_ != 3) throw std::invalid_argument("mesh dimension must be 2 or 3");
  if (coords_.size() % static_cast<std::size_t>(dim_) != 0) {
    throw std::invalid_argument("coordinate array length is not a multiple of dim");
  }
  if (connectivity_.size() % static_cast<std::size_t>(dim_ + 1) != 0) {
    throw std::invalid_argument("connectivity length is not a multiple of dim+1");
  }
  const auto n = static_cast<int>(num_nodes());
  for (int idx : connectivity_) {
    if (idx < 0 || idx >= n) {
      throw std::invalid_argument("element references node " + std::to_string(idx) +
                                  " outside [0, " + std::to_string(n) + ")");
    }
  }
  h_ = 0.0;
  for (std::size_t e = 0; e < num_elements(); ++e) {
    const auto conn = element(e);
    if (!(std::abs(signed_det(*this, conn)) > 0.0)) {
      throw std::invalid_argument("element " + std::to_string(e) + " has zero measure");
    }
    for (int a = 0; a <= dim_; ++a) {
      for (int b = a + 1; b <= dim_; ++b) {
        const auto xa = node(static_cast<std::size_t>(conn[a]));
        const auto xb = node(static_cast<std::size_t>(conn[b]));
        double len2 = 0.0;
        for (int d = 0; d < dim_; ++d) len2 += (xa[d] - xb[d]) * (xa[d] - xb[d]);
        h_ = std::max(h_, std::sqrt(len2));
      }
    }
  }
}

double StructuredMesh::total_measure() const {
  double sum = 0.0;
  for (std::size_t e = 0; e < num_elements(); ++e) sum += element_geometry(*this, e).measure;
  return sum;
}

StructuredMesh build_rect_mesh(const Box& bounds, int nx, int ny) {
  check_divisions({nx, ny});
  if (bounds.dim != 2 || bounds.degenerate()) throw std::invalid_argument("degenerate 2D bounds");

  const int px = nx + 1;
  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>(px) * (ny + 1) * 2);
  const double dx = (bounds.upper[0] - bounds.lower[0]) / nx;
  const double dy = (bounds.upper[1] - bounds.lower[1]) / ny;
  for (int j = 0; j <= ny; ++j) {
    const double y = j == ny ? bounds.upper[1] : bounds.lower[1] + j * dy;
    for (int i = 0; i <= nx; ++i) {
      coords.push_back(i == nx ? bounds.upper[0] : bounds.lower[0] + i * dx);
      coords.push_back(y);
    }
  }

  std::vector<int> conn;
  conn.reserve(static_cast<std::size_t>(nx) * ny * 6);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int n00 = j * px + i;
      const int n10 = n00 + 1;
      const int n01 = n00 + px;
      const int n11 = n01 + 1;
      conn.insert(conn.end(), {n00, n10, n11});
      conn.insert(conn.end(), {n00, n11, n01});
    }
  }
  return StructuredMesh(2, std::move(coords), std::move(conn), bounds, {nx, ny, 0});
}

StructuredMesh build_box_mesh(const Box& bounds, int nx, int ny, int nz) {
  check_divisions({nx, ny, nz});
  if (bounds.dim != 3 || bounds.degenerate()) throw std::invalid_argument("degenerate 3D bounds");

  const std::array<int, 3> n{nx, ny, nz};
  std::array<double, 3> step{};
  for (int d = 0; d < 3; ++d) step[d] = (bounds.upper[d] - bounds.lower[d]) / n[d];
  auto coord = [&](int d, int i) { return i == n[d] ? bounds.upper[d] : bounds.lower[d] + i * step[d]; };

  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1) * (nz + 1) * 3);
  for (int k = 0; k <= nz; ++k) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        coords.insert(coords.end(), {coord(0, i), coord(1, j), coord(2, k)});
      }
    }
  }
  auto id = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };

  // Each tet walks from the cell origin to the opposite corner, one axis at a time.
  static constexpr std::array<std::array<int, 3>, 6> kAxisOrders{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

  std::vector<int> conn;
  conn.reserve(static_cast<std::size_t>(nx) * ny * nz * 24);
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        for (const auto& order : kAxisOrders) {
          std::array<int, 3> p{i, j, k};
          std::array<int, 4> tet{};
          tet[0] = id(p[0], p[1], p[2]);
          for (int s = 0; s < 3; ++s) {
            ++p[order[s]];
            tet[s + 1] = id(p[0], p[1], p[2]);
          }
          // Odd axis permutations give negatively oriented tets.
          const bool odd = (order[0] == 0 && order[1] == 2) || (order[0] == 1 && order[1] == 0) ||
                           (order[0] == 2 && order[1] == 1);
          if (odd) std::swap(tet[2], tet[3]);
          conn.insert(conn.end(), tet.begin(), tet.end());
        }
      }
    }
  }
  return StructuredMesh(3, std::move(coords), std::move(conn), bounds, {nx, ny, nz});
}

ElementGeometry element_geometry(const StructuredMesh& mesh, std::size_t e) {
  if (e >= mesh.num_elements()) throw std::out_of_range("element index out of range");
  const int dim = mesh.dim();
  const auto conn = mesh.element(e);
  const auto x0 = mesh.node(static_cast<std::size_t>(conn[0]));

  // Columns of jac are the edge vectors from vertex 0.
  std::array<std::array<double, 3>, 3> jac{};
  for (int k = 1; k <= dim; ++k) {
    const auto xk = mesh.node(static_cast<std::size_t>(conn[k]));
    for (int d = 0; d < dim; ++d) jac[d][k - 1] = xk[d] - x0[d];
  }

  ElementGeometry geo;
  std::array<std::array<double, 3>, 3> inv{};
  double det = 0.0;
  if (dim == 2) {
    det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    inv[0][0] = jac[1][1] / det;
    inv[0][1] = -jac[0][1] / det;
    inv[1][0] = -jac[1][0] / det;
    inv[1][1] = jac[0][0] / det;
  } else {
    const auto& a = jac;
    det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
          a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
          a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    inv[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
    inv[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
    inv[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
    inv[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det;
    inv[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
    inv[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
    inv[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det;
    inv[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
    inv[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;
  }

  // grad(lambda_k) for k >= 1 is row k-1 of the inverse Jacobian.
  for (int k = 1; k <= dim; ++k) {
    for (int d = 0; d < dim; ++d) {
      geo.grads[k][d] = inv[k - 1][d];
      geo.grads[0][d] -= inv[k - 1][d];
    }
  }
  geo.measure = std::abs(det) / factorial(dim);
  return geo;
}

bool is_conforming(const StructuredMesh& mesh) {
  const int dim = mesh.dim();
  std::map<std::array<int, 3>, int> facet_owners;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto conn = mesh.element(e);
    for (int skip = 0; skip <= dim; ++skip) {
      std::array<int, 3> facet{-1, -1, -1};
      int f = 0;
      for (int k = 0; k <= dim; ++k) {
        if (k != skip) facet[f++] = conn[k];
      }
      std::sort(facet.begin(), facet.begin() + dim);
      ++facet_owners[facet];
    }
  }

  const Box& box = mesh.bounds();
  const double tol = 1e-12 * std::max(1.0, mesh.h());
  for (const auto& [facet, owners] : facet_owners) {
    if (owners > 2) return false;
    if (owners == 2) continue;
    // A facet seen once must lie on one face of the bounding box.
    bool on_face = false;
    for (int d = 0; d < dim && !on_face; ++d) {
      for (double plane : {box.lower[d], box.upper[d]}) {
        bool all = true;
        for (int k = 0; k < dim; ++k) {
          if (std::abs(mesh.node(static_cast<std::size_t>(facet[k]))[d] - plane) > tol) all = false;
        }
        if (all) on_face = true;
      }
    }
    if (!on_face) return false;
  }
  return true;
}

}  // namespace microem
