#pragma once

// Reference computations written from the definitions, sharing no code with
// the engines they check.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

// E[f(sigma Z)] by composite Simpson on [-12 sigma, 12 sigma].
inline double normal_simpson(const std::function<double(double)>& f, double sigma, int n = 20000) {
  if (sigma == 0.0) return f(0.0);
  const double a = -12.0 * sigma;
  const double h = -2.0 * a / n;
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
  auto g = [&](double x) { return f(x) * norm * std::exp(-0.5 * x * x / (sigma * sigma)); };
  double s = g(a) + g(-a);
  for (int i = 1; i < n; ++i) s += g(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// sup over gamma on a fine grid of the band of gamma * a / 2.
inline double g_grid(double lo, double hi, double a, int n = 7501) {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double gamma = lo + (hi - lo) * i / (n - 1);
    best = std::max(best, 0.5 * gamma * a);
  }
  return best;
}

// Adaptive max (or min) over a variance grid of the Rademacher expectation of
// terminal(path of B, <B>_T), by plain recursion.
struct Expectimax {
  std::vector<double> variances;
  double dt;
  int steps;
  bool upper = true;
  std::function<double(const std::vector<double>& path, double qv)> terminal;

  double value() const {
    std::vector<double> path{0.0};
    return rec(path, 0.0);
  }

 private:
  double rec(std::vector<double>& path, double qv) const {
    if (static_cast<int>(path.size()) == steps + 1) return terminal(path, qv);
    double best = upper ? -std::numeric_limits<double>::infinity()
                        : std::numeric_limits<double>::infinity();
    for (double v : variances) {
      const double step = std::sqrt(v * dt);
      double sum = 0.0;
      for (double sign : {1.0, -1.0}) {
        path.push_back(path.back() + sign * step);
        sum += rec(path, qv + v * dt);
        path.pop_back();
      }
      best = upper ? std::max(best, 0.5 * sum) : std::min(best, 0.5 * sum);
    }
    return best;
  }
};

inline std::vector<double> levels(double lo, double hi, int n) {
  if (n == 1 || lo == hi) return {lo};
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

}  // namespace oracle
