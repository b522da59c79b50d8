#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gexp/phi_lang.hpp"
#include "gexp/simple_process.hpp"
#include "gexp/uncertainty.hpp"

namespace gexp {

/// Discrete scenario tree: m steps of length T/m. At every node a variance is
/// chosen from `sigma_levels` equally spaced values in the band, then a
/// Rademacher sign moves B by sigma * xi * sqrt(dt). With `product_space` an
/// independent unit-variance driver W moves by eta * sqrt(dt) in the same step.
struct TreeSpec {
  int steps = 1;
  double t_final = 1.0;
  VolatilityBand band{0.25, 1.0};
  int sigma_levels = 5;
  bool product_space = false;
  std::uint64_t leaf_budget = std::uint64_t{1} << 26;

  [[nodiscard]] double dt() const noexcept { return t_final / steps; }

  /// Distinct control variances, ascending. Coincident levels (singleton or
  /// totally degenerate bands) collapse to one.
  [[nodiscard]] std::vector<double> control_variances() const;

  /// Noise outcomes per control: 2, or 4 with the product space.
  [[nodiscard]] int noise_outcomes() const noexcept { return product_space ? 4 : 2; }

  /// (distinct levels x noise outcomes)^m, as a double to survive overflow.
  [[nodiscard]] double leaf_count() const;

  /// Throws ConfigError on bad shape or a blown leaf budget.
  void validate() const;
};

/// Per-path accumulators, left-endpoint convention. Brackets are predictable:
/// d<B> = sigma^2 dt, d<W> = dt, d<B,W> = E_k[dB dW] (zero, W branches
/// independently of B).
struct PathState {
  int step = 0;
  double t = 0.0;
  double b = 0.0;
  double w = 0.0;
  double qv = 0.0;
  double qv_w = 0.0;
  double qv_bw = 0.0;
  double int_h_db = 0.0;
  double int_h_dw = 0.0;
  double int_h2_dqv = 0.0;
  double int_h2_dqv_bw = 0.0;
  double int_h2_dt = 0.0;

  /// <B + eps W> = <B> + 2 eps <B,W> + eps^2 <W>.
  [[nodiscard]] double qv_perturbed(double eps) const noexcept {
    return qv + 2.0 * eps * qv_bw + eps * eps * qv_w;
  }
};

/// What a path functional sees at a leaf: the terminal state plus the
/// recorded history at every step boundary 0..step.
struct PathView {
  const PathState& state;
  std::span<const double> b;         // B at steps 0..k
  std::span<const double> w;         // W at steps 0..k
  std::span<const double> sigma_sq;  // control at steps 0..k-1
  std::span<const double> shift;     // int_0^t h d<B> at steps 0..k
  std::span<const double> shift_bw;  // int_0^t h d<B,W> at steps 0..k
  double dt;
  bool product_space;

  /// Step index of time t; throws InvalidArgument if t is not on the grid.
  [[nodiscard]] std::size_t index_of(double t) const;
};

/// Bounded functional of a tree path. Carries the integrand h its
/// accumulators refer to (absent means h = 0).
class PathFunctional {
 public:
  using Fn = std::function<double(const PathView&)>;

  PathFunctional(Fn fn, double bound, std::shared_ptr<const SimpleProcess> integrand = nullptr);

  [[nodiscard]] double operator()(const PathView& view) const { return fn_(view); }
  [[nodiscard]] double bound() const noexcept { return bound_; }
  [[nodiscard]] const SimpleProcess* integrand() const noexcept { return integrand_.get(); }

  [[nodiscard]] static PathFunctional constant(double c);

  /// Combinators; integrands must agree (or be absent on one side).
  friend PathFunctional operator+(const PathFunctional& a, const PathFunctional& b);
  friend PathFunctional operator*(const PathFunctional& a, const PathFunctional& b);
  friend PathFunctional operator*(double lambda, const PathFunctional& a);
  friend PathFunctional operator-(const PathFunctional& a);
  /// g(F) for a scalar map g with |g| bounded by `bound` on F's range.
  [[nodiscard]] PathFunctional map(std::function<double(double)> g, double bound) const;

 private:
  Fn fn_;
  double bound_;
  std::shared_ptr<const SimpleProcess> integrand_;
};

/// phi(B_t1, ..., B_tn). Times must lie on the step grid.
[[nodiscard]] PathFunctional observe(const Functional& phi, std::vector<double> times);

/// <B>_T passed through g.
[[nodiscard]] PathFunctional quadratic_variation(std::function<double(double)> g, double bound);

enum class Mode { Upper, Lower };

/// max over adapted controls of the expectation over noise (Upper), or min.
[[nodiscard]] double expectation(const TreeSpec& spec, const PathFunctional& f, Mode mode);
[[nodiscard]] double upper_expectation(const TreeSpec& spec, const PathFunctional& f);
[[nodiscard]] double lower_expectation(const TreeSpec& spec, const PathFunctional& f);

/// Dynamic-programming values at every node of one layer, in depth-first
/// order (control index major, noise outcome minor, per step).
struct LayerTable {
  int step = 0;
  Mode mode = Mode::Upper;
  std::vector<double> values;
  std::vector<PathState> states;  // filled only when requested
};

[[nodiscard]] LayerTable conditional_value(const TreeSpec& spec, const PathFunctional& f,
                                           int step, Mode mode = Mode::Upper,
                                           bool keep_states = false);

/// Re-runs the backward induction from a stored layer up to the root.
[[nodiscard]] double fold_from_layer(const TreeSpec& spec, const LayerTable& layer);

/// Brute-force reference for upper_expectation. Hard cap: m <= 8, sigma_levels <= 3.
struct OracleReport {
  double adaptive = 0.0;     // best adapted strategy
  double nonadaptive = 0.0;  // best deterministic control sequence
  bool exhaustive = false;   // true: every adapted strategy was enumerated
  double strategies = 0.0;   // number of adapted strategies represented
};

[[nodiscard]] OracleReport enumerate_oracle_report(const TreeSpec& spec, const PathFunctional& f);
[[nodiscard]] double enumerate_oracle(const TreeSpec& spec, const PathFunctional& f);

}  // namespace gexp
