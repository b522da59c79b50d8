#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace gexp {

/// Deterministic piecewise-constant integrand h_k on the tree steps k = 0..m-1.
class SimpleProcess {
 public:
  SimpleProcess() = default;
  explicit SimpleProcess(std::vector<double> values);

  static SimpleProcess constant(double value, int steps);
  static SimpleProcess zero(int steps) { return constant(0.0, steps); }

  [[nodiscard]] int steps() const noexcept { return static_cast<int>(values_.size()); }
  [[nodiscard]] double operator[](std::size_t k) const { return values_[k]; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] double sup_norm() const noexcept;

  friend bool operator==(const SimpleProcess&, const SimpleProcess&) = default;

 private:
  std::vector<double> values_;
};

/// Time-parameterised integrand: `pieces` equal sub-intervals of [0, T].
/// Sampling on an m-step tree requires m to be a multiple of the piece count.
class IntegrandSpec {
 public:
  explicit IntegrandSpec(std::vector<double> pieces);
  static IntegrandSpec constant(double value) { return IntegrandSpec({value}); }

  /// Accepts "const:<v>" or "steps:v0,v1,...".
  static IntegrandSpec parse(std::string_view text);

  [[nodiscard]] SimpleProcess sample(int steps) const;
  [[nodiscard]] std::span<const double> pieces() const noexcept { return pieces_; }
  [[nodiscard]] double sup_norm() const noexcept;

 private:
  std::vector<double> pieces_;
};

}  // namespace gexp
