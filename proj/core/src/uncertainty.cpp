#include "gexp/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gexp/errors.hpp"

namespace gexp {

VolatilityBand::VolatilityBand(double sigma_min_sq, double sigma_max_sq)
    : min_(sigma_min_sq), max_(sigma_max_sq) {
  if (!std::isfinite(min_) || !std::isfinite(max_)) {
    throw InvalidArgument("volatility band endpoints must be finite");
  }
  if (min_ < 0.0 || min_ > max_) {
    throw InvalidArgument("volatility band requires 0 <= sigma_min_sq <= sigma_max_sq, got [" +
                          std::to_string(min_) + ", " + std::to_string(max_) + "]");
  }
  if (max_ <= 0.0) {
    throw InvalidArgument(
        "sigma_max_sq must be positive; use VolatilityBand::totally_degenerate() for [0, 0]");
  }
}

VolatilityBand VolatilityBand::totally_degenerate() noexcept { return VolatilityBand{}; }

Generator::Generator(VolatilityBand band, int dimension) : band_(band), dimension_(dimension) {
  if (dimension < 1) throw InvalidArgument("generator dimension must be positive");
}

double g_eval(const Generator& gen, double curvature) {
  if (gen.dimension() != 1) {
    throw UnsupportedError("g_eval: only dimension 1 is implemented, got " +
                           std::to_string(gen.dimension()));
  }
  const double pos = std::max(curvature, 0.0);
  const double neg = std::max(-curvature, 0.0);
  return 0.5 * (gen.band().sigma_max_sq() * pos - gen.band().sigma_min_sq() * neg);
}

Nondegeneracy is_nondegenerate(const Generator& gen) noexcept {
  const double lower = gen.band().sigma_min_sq();
  if (lower > 0.0) return {true, lower};
  return {false, 0.0};
}

Generator perturb(const Generator& gen, double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw InvalidArgument("perturb: eps must be a finite value >= 0");
  }
  if (eps == 0.0) return gen;
  const double shift = eps * eps;
  return Generator(VolatilityBand(gen.band().sigma_min_sq() + shift,
                                  gen.band().sigma_max_sq() + shift),
                   gen.dimension());
}

}  // namespace gexp
