#ifndef FSW_DG_QUADRATURE_HPP
#define FSW_DG_QUADRATURE_HPP

#include <cstddef>
#include <vector>

namespace fsw::dg {

struct QuadratureRule {
  std::vector<double> points;  // on [-1, 1]
  std::vector<double> weights; // sum = 2
};

// Gauss-Legendre rule with n points (exact for degree 2n-1). Nodes are found
// by Newton iteration on P_n; results are cached.
const QuadratureRule& gauss_legendre(std::size_t n);

// Legendre polynomial value and derivative at x.
void legendre_eval(std::size_t n, double x, double& p, double& dp);

} // namespace fsw::dg

#endif
