#include "hmmdiv/quadrature.hpp"

#include <stdexcept>

namespace hmmdiv {

QuadratureRule simpson_rule(double lo, double hi, std::size_t points) {
  if (points < 3 || points % 2 == 0)
    throw std::invalid_argument("Simpson rule needs an odd point count >= 3");
  QuadratureRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  const double h = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    rule.nodes[i] = lo + h * static_cast<double>(i);
    const double c = (i == 0 || i + 1 == points) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    rule.weights[i] = c * h / 3.0;
  }
  return rule;
}

}  // namespace hmmdiv
