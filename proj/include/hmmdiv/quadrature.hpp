#pragma once

#include <cstddef>
#include <vector>

namespace hmmdiv {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Composite Simpson on [lo, hi]; points must be odd and >= 3.
QuadratureRule simpson_rule(double lo, double hi, std::size_t points);

}  // namespace hmmdiv
