#include "gexp/stochastic.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>

#include "gexp/errors.hpp"

namespace gexp {

// ---------------------------------------------------------------------------
// SimpleProcess / IntegrandSpec

SimpleProcess::SimpleProcess(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("integrand values must be finite");
  }
}

SimpleProcess SimpleProcess::constant(double value, int steps) {
  if (steps < 1) throw InvalidArgument("integrand needs at least one step");
  return SimpleProcess(std::vector<double>(static_cast<std::size_t>(steps), value));
}

double SimpleProcess::sup_norm() const noexcept {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::abs(v));
  return s;
}

IntegrandSpec::IntegrandSpec(std::vector<double> pieces) : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw InvalidArgument("integrand needs at least one piece");
  for (double v : pieces_) {
    if (!std::isfinite(v)) throw InvalidArgument("integrand values must be finite");
  }
}

namespace {

double parse_number(std::string_view text) {
  std::string owned(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(owned, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("malformed number '" + owned + "' in integrand");
  }
  if (used != owned.size()) throw InvalidArgument("malformed number '" + owned + "' in integrand");
  return v;
}

}  // namespace

IntegrandSpec IntegrandSpec::parse(std::string_view text) {
  if (text.starts_with("const:")) return constant(parse_number(text.substr(6)));
  if (text.starts_with("steps:")) {
    std::vector<double> pieces;
    std::string_view rest = text.substr(6);
    while (true) {
      const auto comma = rest.find(',');
      pieces.push_back(parse_number(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return IntegrandSpec(std::move(pieces));
  }
  throw InvalidArgument("integrand must be 'const:<v>' or 'steps:v0,v1,...', got '" +
                        std::string(text) + "'");
}

SimpleProcess IntegrandSpec::sample(int steps) const {
  const auto pieces = static_cast<int>(pieces_.size());
  if (steps < 1 || steps % pieces != 0) {
    throw InvalidArgument("integrand with " + std::to_string(pieces) +
                          " pieces needs a step count that is a multiple of it, got " +
                          std::to_string(steps));
  }
  std::vector<double> values(static_cast<std::size_t>(steps));
  const int per_piece = steps / pieces;
  for (int k = 0; k < steps; ++k) {
    values[static_cast<std::size_t>(k)] = pieces_[static_cast<std::size_t>(k / per_piece)];
  }
  return SimpleProcess(std::move(values));
}

double IntegrandSpec::sup_norm() const noexcept {
  double s = 0.0;
  for (double v : pieces_) s = std::max(s, std::abs(v));
  return s;
}

// ---------------------------------------------------------------------------
// Observations

namespace {

constexpr double kUnbounded = std::numeric_limits<double>::infinity();

std::shared_ptr<const SimpleProcess> share(const SimpleProcess& h) {
  return std::make_shared<const SimpleProcess>(h);
}

void require_product(const PathView& view) {
  if (!view.product_space) {
    throw ConfigError("perturbed observations need a product-space tree (W is absent)");
  }
}

// phi applied to an observation rule at each requested time.
template <typename Observe>
PathFunctional observe_with(const Functional& phi, std::vector<double> times, Observe observe,
                            std::shared_ptr<const SimpleProcess> h) {
  if (static_cast<std::size_t>(phi.arity()) != times.size()) {
    throw InvalidArgument("functional arity " + std::to_string(phi.arity()) + " does not match " +
                          std::to_string(times.size()) + " observation time(s)");
  }
  if (times.size() > 16) throw InvalidArgument("at most 16 observation times are supported");
  return PathFunctional(
      [phi, times = std::move(times), observe](const PathView& v) {
        std::array<double, 16> x{};
        for (std::size_t i = 0; i < times.size(); ++i) x[i] = observe(v, v.index_of(times[i]));
        return phi(std::span<const double>(x.data(), times.size()));
      },
      phi.bound(), std::move(h));
}

}  // namespace

double shifted_observation(const PathView& view, std::size_t k) { return view.b[k] - view.shift[k]; }

double perturbed_observation(const PathView& view, std::size_t k, double eps) {
  require_product(view);
  return view.b[k] + eps * view.w[k];
}

double shifted_perturbed_observation(const PathView& view, std::size_t k, double eps,
                                     const SimpleProcess& h) {
  require_product(view);
  double drift_dt = 0.0;
  for (std::size_t j = 0; j < k; ++j) drift_dt += h[j] * view.dt;
  const double shift = view.shift[k] + 2.0 * eps * view.shift_bw[k] + eps * eps * drift_dt;
  return view.b[k] + eps * view.w[k] - shift;
}

// ---------------------------------------------------------------------------
// Functionals

PathFunctional exp_martingale(const SimpleProcess& h) {
  return PathFunctional(
      [](const PathView& v) { return std::exp(v.state.int_h_db - 0.5 * v.state.int_h2_dqv); },
      kUnbounded, share(h));
}

PathFunctional exp_martingale_normalized(const SimpleProcess& h) {
  return PathFunctional(
      [h](const PathView& v) {
        const double sqrt_dt = std::sqrt(v.dt);
        double log_value = 0.0;
        for (std::size_t k = 0; k < v.sigma_sq.size(); ++k) {
          const double db = v.b[k + 1] - v.b[k];
          log_value += h[k] * db - std::log(std::cosh(h[k] * std::sqrt(v.sigma_sq[k]) * sqrt_dt));
        }
        return std::exp(log_value);
      },
      kUnbounded, share(h));
}

PathFunctional shifted_phi(const SimpleProcess& h, const Functional& phi,
                           std::vector<double> times) {
  return observe_with(
      phi, std::move(times), [](const PathView& v, std::size_t k) { return shifted_observation(v, k); },
      share(h));
}

PathFunctional perturbed_phi(double eps, const Functional& phi, std::vector<double> times) {
  return observe_with(
      phi, std::move(times),
      [eps](const PathView& v, std::size_t k) { return perturbed_observation(v, k, eps); },
      nullptr);
}

PathFunctional shifted_perturbed_phi(const SimpleProcess& h, double eps, const Functional& phi,
                                     std::vector<double> times) {
  return observe_with(
      phi, std::move(times),
      [eps, h](const PathView& v, std::size_t k) {
        return shifted_perturbed_observation(v, k, eps, h);
      },
      share(h));
}

PathFunctional j_epsilon(double alpha, double beta, const SimpleProcess& h, double eps) {
  if (!(eps >= 0.0)) throw InvalidArgument("j_epsilon: eps must be >= 0");
  return PathFunctional(
      [alpha, beta, eps](const PathView& v) {
        return std::exp(alpha * eps * v.state.int_h_db -
                        0.5 * beta * eps * eps * v.state.int_h2_dqv);
      },
      kUnbounded, share(h));
}

PathFunctional n_epsilon(const SimpleProcess& h, double eps) {
  return PathFunctional(
      [eps](const PathView& v) {
        require_product(v);
        const PathState& s = v.state;
        const double int_h_dbeps = s.int_h_db + eps * s.int_h_dw;
        const double int_h2_dqveps = s.int_h2_dqv + 2.0 * eps * s.int_h2_dqv_bw + eps * eps * s.int_h2_dt;
        return std::exp(int_h_dbeps - 0.5 * int_h2_dqveps);
      },
      kUnbounded, share(h));
}

PathFunctional w_exponential(const SimpleProcess& h, double eps) {
  return PathFunctional(
      [eps](const PathView& v) {
        require_product(v);
        return std::exp(eps * v.state.int_h_dw - 0.5 * eps * eps * v.state.int_h2_dt);
      },
      kUnbounded, share(h));
}

PathFunctional novikov_integrand(const SimpleProcess& h, double delta) {
  return PathFunctional(
      [delta](const PathView& v) { return std::exp(0.5 * (1.0 + delta) * v.state.int_h2_dqv); },
      kUnbounded, share(h));
}

}  // namespace gexp
