#include "chf/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace chf {

namespace {

QuadratureRule make_default() {
  QuadratureRule q;
  q.degree = 6;
  q.edge_degree = 7;

  auto orbit3 = [&q](double a, double w) {
    const double c = 1.0 - 2.0 * a;
    q.points.push_back({c, a, a});
    q.points.push_back({a, c, a});
    q.points.push_back({a, a, c});
    for (int i = 0; i < 3; ++i) q.weights.push_back(w);
  };
  auto orbit6 = [&q](double a, double b, double w) {
    const double c = 1.0 - a - b;
    const std::array<std::array<double, 3>, 6> p{{{a, b, c}, {a, c, b}, {b, a, c},
                                                  {b, c, a}, {c, a, b}, {c, b, a}}};
    for (const auto& x : p) {
      q.points.push_back(x);
      q.weights.push_back(w);
    }
  };
  orbit3(0.249286745170910421291638553107, 0.116786275726379366030690538687);
  orbit3(0.063089014491502228340331602870, 0.050844906370206816920936809106);
  orbit6(0.053145049844816947353249671631, 0.310352451033784405416607733956,
         0.082851075618373575193553456421);

  const double g1 = 0.5 * (1.0 - 0.861136311594052575223946488893);
  const double g2 = 0.5 * (1.0 - 0.339981043584856264802665759103);
  const double w1 = 0.5 * 0.347854845137453857373063949222;
  const double w2 = 0.5 * 0.652145154862546142626936050778;
  q.edge_points = {g1, g2, 1.0 - g2, 1.0 - g1};
  q.edge_weights = {w1, w2, w2, w1};
  return q;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

const QuadratureRule& default_quadrature() {
  static const QuadratureRule rule = make_default();
  return rule;
}

double quadrature_exactness_defect(const QuadratureRule& rule) {
  double defect = 0.0;
  // reference triangle (0,0),(1,0),(0,1) has area 1/2; x = lambda_1, y = lambda_2
  for (int i = 0; i <= rule.degree; ++i) {
    for (int j = 0; i + j <= rule.degree; ++j) {
      const double exact = factorial(i) * factorial(j) / factorial(i + j + 2);
      double sum = 0.0;
      for (std::size_t k = 0; k < rule.points.size(); ++k) {
        sum += rule.weights[k] * std::pow(rule.points[k][1], i) * std::pow(rule.points[k][2], j);
      }
      defect = std::max(defect, std::abs(0.5 * sum - exact));
    }
  }
  for (int k = 0; k <= rule.edge_degree; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.edge_points.size(); ++i) {
      sum += rule.edge_weights[i] * std::pow(rule.edge_points[i], k);
    }
    defect = std::max(defect, std::abs(sum - 1.0 / (k + 1)));
  }
  return defect;
}

}  // namespace chf
