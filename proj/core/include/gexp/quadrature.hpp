#pragma once

#include <functional>
#include <vector>

namespace gexp {

struct QuadratureNode {
  double x;
  double w;
};

/// Physicists' Gauss-Hermite rule: int e^{-x^2} f(x) dx ~ sum w_i f(x_i).
[[nodiscard]] std::vector<QuadratureNode> gauss_hermite(int n);

/// E[f(sigma Z)] for standard normal Z.
[[nodiscard]] double normal_expectation(const std::function<double(double)>& f, double sigma,
                                        int n = 96);

}  // namespace gexp
