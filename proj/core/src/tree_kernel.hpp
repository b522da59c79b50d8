#pragma once

// One-step transition shared by the dynamic program and the brute-force oracle.

#include <array>
#include <vector>

#include "gexp/scenario_tree.hpp"

namespace gexp::detail {

struct History {
  explicit History(int steps)
      : b(static_cast<std::size_t>(steps) + 1, 0.0),
        w(b.size(), 0.0),
        sigma_sq(static_cast<std::size_t>(steps), 0.0),
        shift(b.size(), 0.0),
        shift_bw(b.size(), 0.0) {}

  std::vector<double> b;
  std::vector<double> w;
  std::vector<double> sigma_sq;
  std::vector<double> shift;
  std::vector<double> shift_bw;
};

class TreeKernel {
 public:
  TreeKernel(const TreeSpec& spec, const SimpleProcess* integrand);

  [[nodiscard]] int steps() const noexcept { return steps_; }
  [[nodiscard]] int levels() const noexcept { return static_cast<int>(variances_.size()); }
  [[nodiscard]] int outcomes() const noexcept { return outcomes_; }
  [[nodiscard]] double variance(int level) const { return variances_[static_cast<std::size_t>(level)]; }

  /// Child of `s` under control `level` and noise `outcome`; records the
  /// control at s.step and the observables at s.step + 1 in `hist`.
  PathState advance(const PathState& s, int level, int outcome, History& hist) const;

  [[nodiscard]] PathView view(const PathState& s, const History& hist) const;

 private:
  struct Noise {
    double xi;
    double eta;
  };

  int steps_;
  double dt_;
  double sqrt_dt_;
  bool product_;
  int outcomes_;
  std::vector<double> variances_;
  std::vector<double> vols_;
  std::vector<double> h_;
  std::array<Noise, 4> noise_{};
  double mean_xi_eta_ = 0.0;
};

}  // namespace gexp::detail
