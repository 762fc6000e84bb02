#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace microem {

/// Symmetric rule on the reference simplex. Points are barycentric tuples
/// (dim+1 entries, trailing entry unused in 2D); weights sum to 1/dim!.
struct QuadratureRule {
  int dim = 2;
  int degree = 0;
  std::vector<std::array<double, 4>> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

/// Smallest embedded positive-weight rule exact for total degree >= `degree`.
/// Supported: dim in {2, 3}, degree in [1, 6]. The returned rule reports its
/// actual exactness degree, which may exceed the request.
const QuadratureRule& rule_simplex(int dim, int degree);

}  // namespace microem
