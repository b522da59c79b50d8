#pragma once

#include <utility>

namespace gexp {

/// Variance interval [sigma_min_sq, sigma_max_sq]: the uncertainty set of a
/// one-dimensional G-Brownian motion. Variances, not standard deviations.
class VolatilityBand {
 public:
  /// Throws InvalidArgument unless 0 <= min <= max and max > 0.
  VolatilityBand(double sigma_min_sq, double sigma_max_sq);

  /// The band [0, 0]: B is identically zero. Only reachable through here.
  static VolatilityBand totally_degenerate() noexcept;

  [[nodiscard]] double sigma_min_sq() const noexcept { return min_; }
  [[nodiscard]] double sigma_max_sq() const noexcept { return max_; }
  [[nodiscard]] bool is_singleton() const noexcept { return min_ == max_; }

  friend bool operator==(const VolatilityBand&, const VolatilityBand&) = default;

 private:
  VolatilityBand() = default;
  double min_ = 0.0;
  double max_ = 0.0;
};

struct Nondegeneracy {
  bool nondegenerate;
  double sigma_lower_sq;
};

/// G(a) = 1/2 sup_{gamma in band} gamma * a.
class Generator {
 public:
  explicit Generator(VolatilityBand band, int dimension = 1);

  [[nodiscard]] const VolatilityBand& band() const noexcept { return band_; }
  [[nodiscard]] int dimension() const noexcept { return dimension_; }

  friend bool operator==(const Generator&, const Generator&) = default;

 private:
  VolatilityBand band_;
  int dimension_;
};

/// 1/2 (sigma_max^2 a^+ - sigma_min^2 a^-). Throws UnsupportedError for d != 1.
[[nodiscard]] double g_eval(const Generator& gen, double curvature);

[[nodiscard]] Nondegeneracy is_nondegenerate(const Generator& gen) noexcept;

/// G_eps(a) = G(a) + eps^2 a / 2, i.e. the band shifted by eps^2.
[[nodiscard]] Generator perturb(const Generator& gen, double eps);

}  // namespace gexp
