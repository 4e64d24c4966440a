#pragma once

#include <array>
#include <vector>

namespace chf {

/// Quadrature on the reference triangle (barycentric points, weights summing
/// to 1 so that the rule integrates against |K|) and on the reference
/// segment [0,1] (weights summing to 1, scaled by the edge length).
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  std::vector<double> edge_points;
  std::vector<double> edge_weights;
  int degree = 0;
  int edge_degree = 0;
};

/// 12-point degree-6 Dunavant rule with a 4-point Gauss-Legendre edge rule.
const QuadratureRule& default_quadrature();

/// Largest |rule - exact| over all monomials x^i y^j, i + j <= degree, on the
/// reference triangle, plus t^k on the segment up to edge_degree.
double quadrature_exactness_defect(const QuadratureRule& rule);

}  // namespace chf
