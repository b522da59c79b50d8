#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "gexp/phi_lang.hpp"
#include "gexp/uncertainty.hpp"

namespace gexp {

/// Explicit monotone finite differences for  u_t - G(u_xx) = 0  on
/// [-x_half_width, x_half_width] x [0, t_final].
enum class Accuracy { Coarse, Medium, Fine };

[[nodiscard]] Accuracy parse_accuracy(std::string_view name);
[[nodiscard]] std::string_view to_string(Accuracy accuracy) noexcept;

/// Spatial nodes per tier: 201 / 401 / 801.
[[nodiscard]] int tier_nodes(Accuracy accuracy) noexcept;

struct PdeGrid {
  double x_half_width = 1.0;
  int nx = 3;  // odd, so x = 0 is the centre node
  double t_final = 1.0;
  double dt = 1.0;
  double x_center = 0.0;

  [[nodiscard]] double dx() const noexcept { return 2.0 * x_half_width / (nx - 1); }
  [[nodiscard]] double x(int i) const noexcept { return x_center - x_half_width + i * dx(); }
  [[nodiscard]] int center() const noexcept { return nx / 2; }
};

/// Largest dt keeping the scheme monotone: dx^2 / sigma_max^2 (infinite for B = 0).
[[nodiscard]] double max_stable_dt(const Generator& gen, const PdeGrid& grid);

/// Grid for one accuracy tier: half width 6 sqrt(sigma_max^2 t), dt = 0.9 * CFL.
[[nodiscard]] PdeGrid make_grid(const Generator& gen, double t_final, Accuracy accuracy,
                                double x_center = 0.0);

/// Throws ConfigError if nx is not odd >= 3, dt breaks CFL (message carries the
/// admissible dt) or the domain is narrower than 6 sqrt(sigma_max^2 t).
void validate_grid(const Generator& gen, const PdeGrid& grid);

struct SolutionField {
  std::vector<double> values;  // one per grid node
  double time = 0.0;
  int steps = 0;
  double dt = 0.0;  // the dt actually used (t_final / steps)

  [[nodiscard]] double center_value() const { return values[values.size() / 2]; }
};

using InitialCondition = std::function<double(double)>;

[[nodiscard]] SolutionField solve(const Generator& gen, const Functional& phi,
                                  const PdeGrid& grid);
[[nodiscard]] SolutionField solve(const Generator& gen, const InitialCondition& initial,
                                  const PdeGrid& grid);

/// E^[phi(B_t)] = u(t, 0).
[[nodiscard]] double expect_single(const Generator& gen, const Functional& phi, double t,
                                   Accuracy accuracy);
[[nodiscard]] double expect_single(const Generator& gen, const InitialCondition& initial,
                                   double t, Accuracy accuracy);

/// Prefix-grid points per coordinate used by expect_cylinder: 41 / 61 / 81.
[[nodiscard]] int tier_prefix_nodes(Accuracy accuracy) noexcept;

/// E^[phi(B_t1, ..., B_tn)] for n <= 3 by backward recursion over increments,
/// one PDE solve per frozen prefix, linear interpolation between prefixes.
[[nodiscard]] double expect_cylinder(const Generator& gen, const Functional& phi,
                                     std::span<const double> times, Accuracy accuracy);

}  // namespace gexp
