#include "gexp/gheat_pde.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "gexp/errors.hpp"

namespace gexp {

namespace {

constexpr double kCflSafety = 0.9;
constexpr double kTruncationSigmas = 6.0;

double truncation_radius(const Generator& gen, double t) {
  return kTruncationSigmas * std::sqrt(gen.band().sigma_max_sq() * t);
}

// Tensor grid over the first k observation coordinates, multilinear lookup
// with constant extrapolation outside the box.
class PrefixTable {
 public:
  explicit PrefixTable(std::vector<std::vector<double>> axes) : axes_(std::move(axes)) {
    std::size_t n = 1;
    for (const auto& a : axes_) n *= a.size();
    values_.assign(n, 0.0);
  }

  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] std::size_t dims() const noexcept { return axes_.size(); }

  // Coordinates of a flat (row-major) index.
  void coordinates(std::size_t flat, std::span<double> out) const {
    for (std::size_t d = axes_.size(); d-- > 0;) {
      const std::size_t n = axes_[d].size();
      out[d] = axes_[d][flat % n];
      flat /= n;
    }
  }

  double& operator[](std::size_t flat) { return values_[flat]; }

  [[nodiscard]] double at(std::span<const double> x) const {
    std::array<std::size_t, 3> lo{};
    std::array<double, 3> w{};
    for (std::size_t d = 0; d < axes_.size(); ++d) {
      const auto& a = axes_[d];
      const double h = (a.back() - a.front()) / static_cast<double>(a.size() - 1);
      double s = h > 0.0 ? (x[d] - a.front()) / h : 0.0;
      s = std::clamp(s, 0.0, static_cast<double>(a.size() - 1));
      std::size_t i = static_cast<std::size_t>(s);
      if (i >= a.size() - 1) i = a.size() - 2;
      lo[d] = i;
      w[d] = s - static_cast<double>(i);
    }
    double acc = 0.0;
    const std::size_t corners = std::size_t{1} << axes_.size();
    for (std::size_t c = 0; c < corners; ++c) {
      double weight = 1.0;
      std::size_t flat = 0;
      for (std::size_t d = 0; d < axes_.size(); ++d) {
        const bool upper = ((c >> d) & 1U) != 0;
        weight *= upper ? w[d] : 1.0 - w[d];
        flat = flat * axes_[d].size() + lo[d] + (upper ? 1 : 0);
      }
      if (weight != 0.0) acc += weight * values_[flat];
    }
    return acc;
  }

 private:
  std::vector<std::vector<double>> axes_;
  std::vector<double> values_;
};

std::vector<double> prefix_axis(const Generator& gen, double t, int points) {
  double radius = truncation_radius(gen, t);
  if (radius == 0.0) radius = 1.0;
  std::vector<double> axis(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    axis[static_cast<std::size_t>(i)] = -radius + 2.0 * radius * i / (points - 1);
  }
  return axis;
}

}  // namespace

Accuracy parse_accuracy(std::string_view name) {
  if (name == "coarse") return Accuracy::Coarse;
  if (name == "medium") return Accuracy::Medium;
  if (name == "fine") return Accuracy::Fine;
  throw InvalidArgument("unknown accuracy tier '" + std::string(name) +
                        "' (expected coarse, medium or fine)");
}

std::string_view to_string(Accuracy accuracy) noexcept {
  switch (accuracy) {
    case Accuracy::Coarse:
      return "coarse";
    case Accuracy::Medium:
      return "medium";
    case Accuracy::Fine:
      return "fine";
  }
  return "?";
}

int tier_nodes(Accuracy accuracy) noexcept {
  switch (accuracy) {
    case Accuracy::Coarse:
      return 201;
    case Accuracy::Medium:
      return 401;
    case Accuracy::Fine:
      return 801;
  }
  return 201;
}

int tier_prefix_nodes(Accuracy accuracy) noexcept {
  switch (accuracy) {
    case Accuracy::Coarse:
      return 41;
    case Accuracy::Medium:
      return 61;
    case Accuracy::Fine:
      return 81;
  }
  return 41;
}

double max_stable_dt(const Generator& gen, const PdeGrid& grid) {
  const double top = gen.band().sigma_max_sq();
  if (top == 0.0) return std::numeric_limits<double>::infinity();
  return grid.dx() * grid.dx() / top;
}

PdeGrid make_grid(const Generator& gen, double t_final, Accuracy accuracy, double x_center) {
  if (!(t_final > 0.0)) throw InvalidArgument("PDE horizon must be > 0");
  PdeGrid grid;
  grid.nx = tier_nodes(accuracy);
  grid.t_final = t_final;
  grid.x_center = x_center;
  const double radius = truncation_radius(gen, t_final);
  grid.x_half_width = radius > 0.0 ? radius : 1.0;
  const double cfl = max_stable_dt(gen, grid);
  grid.dt = std::isfinite(cfl) ? kCflSafety * cfl : t_final;
  return grid;
}

void validate_grid(const Generator& gen, const PdeGrid& grid) {
  if (gen.dimension() != 1) {
    throw UnsupportedError("PDE engine supports dimension 1 only");
  }
  if (grid.nx < 3 || grid.nx % 2 == 0) {
    throw ConfigError("PDE grid needs an odd node count >= 3, got " + std::to_string(grid.nx));
  }
  if (!(grid.x_half_width > 0.0) || !(grid.t_final > 0.0) || !(grid.dt > 0.0)) {
    throw ConfigError("PDE grid needs positive half width, horizon and time step");
  }
  const double admissible = max_stable_dt(gen, grid);
  if (grid.dt > admissible * (1.0 + 1e-12)) {
    throw ConfigError("CFL violated: dt = " + std::to_string(grid.dt) +
                      " exceeds the largest monotone time step " + std::to_string(admissible) +
                      "; reduce --dt or coarsen the mesh");
  }
  const double needed = truncation_radius(gen, grid.t_final);
  if (grid.x_half_width < needed * (1.0 - 1e-12)) {
    throw ConfigError("domain half width " + std::to_string(grid.x_half_width) +
                      " is below 6 sqrt(sigma_max^2 t) = " + std::to_string(needed));
  }
}

SolutionField solve(const Generator& gen, const Functional& phi, const PdeGrid& grid) {
  if (phi.arity() != 1) {
    throw InvalidArgument("PDE solve needs an arity-1 functional, got arity " +
                          std::to_string(phi.arity()));
  }
  return solve(gen, [&phi](double x) { return phi(std::span<const double>(&x, 1)); }, grid);
}

SolutionField solve(const Generator& gen, const InitialCondition& initial, const PdeGrid& grid) {
  validate_grid(gen, grid);

  const auto n = static_cast<std::size_t>(grid.nx);
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = initial(grid.x(static_cast<int>(i)));

  const int steps = std::max(1, static_cast<int>(std::ceil(grid.t_final / grid.dt - 1e-9)));
  const double dt = grid.t_final / steps;
  const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());
  const double upper = 0.5 * gen.band().sigma_max_sq() * dt;
  const double lower = 0.5 * gen.band().sigma_min_sq() * dt;

  std::vector<double> next(u);
  for (int k = 0; k < steps; ++k) {
    // Boundary nodes keep zero curvature, so they are never updated.
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_dx2;
      next[i] = u[i] + (d2 > 0.0 ? upper * d2 : lower * d2);
    }
    u.swap(next);
  }
  return SolutionField{std::move(u), grid.t_final, steps, dt};
}

double expect_single(const Generator& gen, const Functional& phi, double t, Accuracy accuracy) {
  if (phi.arity() != 1) {
    throw InvalidArgument("expect_single needs an arity-1 functional");
  }
  return expect_single(
      gen, [&phi](double x) { return phi(std::span<const double>(&x, 1)); }, t, accuracy);
}

double expect_single(const Generator& gen, const InitialCondition& initial, double t,
                     Accuracy accuracy) {
  if (!(t > 0.0)) throw InvalidArgument("expect_single: t must be > 0");
  return solve(gen, initial, make_grid(gen, t, accuracy)).center_value();
}

double expect_cylinder(const Generator& gen, const Functional& phi, std::span<const double> times,
                       Accuracy accuracy) {
  const std::size_t n = times.size();
  if (n == 0) throw InvalidArgument("expect_cylinder needs at least one time");
  if (n > 3) {
    throw UnsupportedError("expect_cylinder handles at most 3 times; use the scenario tree");
  }
  if (static_cast<std::size_t>(phi.arity()) != n) {
    throw InvalidArgument("functional arity " + std::to_string(phi.arity()) + " != " +
                          std::to_string(n) + " observation times");
  }
  if (!(times[0] > 0.0)) throw InvalidArgument("observation times must be > 0");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(times[i] > times[i - 1])) {
      throw InvalidArgument("observation times must be strictly increasing");
    }
  }
  if (n == 1) return expect_single(gen, phi, times[0], accuracy);

  const int points = tier_prefix_nodes(accuracy);

  // value(prefix, y): the level-j function evaluated at (prefix, prefix.back() + y).
  // Level n is phi itself; lower levels are tables filled by one solve per prefix.
  std::optional<PrefixTable> next_level;
  for (std::size_t level = n; level-- > 1;) {
    // Build the table for coordinates 1..level.
    std::vector<std::vector<double>> axes;
    for (std::size_t d = 0; d < level; ++d) axes.push_back(prefix_axis(gen, times[d], points));
    PrefixTable table(std::move(axes));

    const double horizon = times[level] - times[level - 1];
    std::array<double, 3> point{};
    for (std::size_t flat = 0; flat < table.size(); ++flat) {
      table.coordinates(flat, std::span<double>(point.data(), level));
      const double anchor = point[level - 1];
      InitialCondition initial = [&](double y) {
        std::array<double, 3> x = point;
        x[level] = anchor + y;
        if (level + 1 == n) return phi(std::span<const double>(x.data(), n));
        return next_level->at(std::span<const double>(x.data(), level + 1));
      };
      table[flat] = expect_single(gen, initial, horizon, accuracy);
    }
    next_level = std::move(table);
  }

  return expect_single(
      gen,
      [&](double x) { return next_level->at(std::span<const double>(&x, 1)); },
      times[0], accuracy);
}

}  // namespace gexp
