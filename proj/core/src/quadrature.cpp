#include "gexp/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "gexp/errors.hpp"

namespace gexp {

// Newton iteration on the orthonormal Hermite recurrence, roots seeded by
// the usual asymptotic guesses.
std::vector<QuadratureNode> gauss_hermite(int n) {
  if (n < 1) throw InvalidArgument("gauss_hermite: n must be >= 1");
  constexpr double kPiM4 = 0.7511255444649425;  // pi^{-1/4}
  std::vector<QuadratureNode> nodes(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * nodes[0].x;
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * nodes[1].x;
    } else {
      z = 2.0 * z - nodes[static_cast<std::size_t>(i - 2)].x;
    }
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = kPiM4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double previous = z;
      z = previous - p1 / pp;
      if (std::abs(z - previous) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    const double w = 2.0 / (pp * pp);
    nodes[static_cast<std::size_t>(i)] = {z, w};
    nodes[static_cast<std::size_t>(n - 1 - i)] = {-z, w};
  }
  return nodes;
}

double normal_expectation(const std::function<double(double)>& f, double sigma, int n) {
  double acc = 0.0;
  for (const auto& node : gauss_hermite(n)) {
    acc += node.w * f(sigma * std::numbers::sqrt2 * node.x);
  }
  return acc / std::sqrt(std::numbers::pi);
}

}  // namespace gexp
