#include "gexp/scenario_tree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>

#include "gexp/errors.hpp"
#include "tree_kernel.hpp"

namespace gexp {

// ---------------------------------------------------------------------------
// TreeSpec

std::vector<double> TreeSpec::control_variances() const {
  const double lo = band.sigma_min_sq();
  const double hi = band.sigma_max_sq();
  std::vector<double> out;
  if (lo == hi) return {lo};
  out.reserve(static_cast<std::size_t>(sigma_levels));
  for (int i = 0; i < sigma_levels; ++i) {
    // Endpoints exactly, interior by linear interpolation.
    const double v = i == sigma_levels - 1 ? hi : lo + (hi - lo) * i / (sigma_levels - 1);
    out.push_back(v);
  }
  return out;
}

double TreeSpec::leaf_count() const {
  const double branching =
      static_cast<double>(control_variances().size()) * static_cast<double>(noise_outcomes());
  return std::pow(branching, steps);
}

void TreeSpec::validate() const {
  if (steps < 1) throw ConfigError("tree needs at least one step");
  if (!(t_final > 0.0) || !std::isfinite(t_final)) {
    throw ConfigError("tree horizon must be finite and > 0");
  }
  if (sigma_levels < 2) throw ConfigError("sigma_levels must be >= 2");
  const double leaves = leaf_count();
  if (leaves > static_cast<double>(leaf_budget)) {
    // Largest m that fits, as an actionable hint.
    const double branching =
        static_cast<double>(control_variances().size()) * static_cast<double>(noise_outcomes());
    const int fits = static_cast<int>(std::floor(std::log(static_cast<double>(leaf_budget)) /
                                                 std::log(branching) + 1e-9));
    char count[32];
    std::snprintf(count, sizeof count, "%.3g", leaves);
    throw ConfigError("scenario tree has " + std::string(count) +
                      " leaves, above the budget of " + std::to_string(leaf_budget) +
                      "; reduce steps to <= " + std::to_string(fits) +
                      " or lower --sigma-levels");
  }
}

// ---------------------------------------------------------------------------
// PathView / PathFunctional

std::size_t PathView::index_of(double t) const {
  const double raw = t / dt;
  const double k = std::round(raw);
  if (std::abs(raw - k) > 1e-9 * std::max(1.0, std::abs(raw)) || k < 0.0 ||
      k > static_cast<double>(b.size() - 1)) {
    throw InvalidArgument("observation time " + std::to_string(t) +
                          " is not a step boundary of the tree (dt = " + std::to_string(dt) + ")");
  }
  return static_cast<std::size_t>(k);
}

namespace {

std::shared_ptr<const SimpleProcess> merge_integrands(
    const std::shared_ptr<const SimpleProcess>& a, const std::shared_ptr<const SimpleProcess>& b) {
  if (!a) return b;
  if (!b || a == b || *a == *b) return a;
  throw InvalidArgument("cannot combine path functionals built on different integrands");
}

}  // namespace

PathFunctional::PathFunctional(Fn fn, double bound, std::shared_ptr<const SimpleProcess> integrand)
    : fn_(std::move(fn)), bound_(bound), integrand_(std::move(integrand)) {
  if (!fn_) throw InvalidArgument("path functional needs a callable");
  if (!(bound >= 0.0)) throw InvalidArgument("path functional bound must be >= 0");
}

PathFunctional PathFunctional::constant(double c) {
  return PathFunctional([c](const PathView&) { return c; }, std::abs(c));
}

PathFunctional operator+(const PathFunctional& a, const PathFunctional& b) {
  return PathFunctional([fa = a.fn_, fb = b.fn_](const PathView& v) { return fa(v) + fb(v); },
                        a.bound_ + b.bound_, merge_integrands(a.integrand_, b.integrand_));
}

PathFunctional operator*(const PathFunctional& a, const PathFunctional& b) {
  return PathFunctional([fa = a.fn_, fb = b.fn_](const PathView& v) { return fa(v) * fb(v); },
                        a.bound_ * b.bound_, merge_integrands(a.integrand_, b.integrand_));
}

PathFunctional operator*(double lambda, const PathFunctional& a) {
  return PathFunctional([lambda, fa = a.fn_](const PathView& v) { return lambda * fa(v); },
                        std::abs(lambda) * a.bound_, a.integrand_);
}

PathFunctional operator-(const PathFunctional& a) {
  return PathFunctional([fa = a.fn_](const PathView& v) { return -fa(v); }, a.bound_,
                        a.integrand_);
}

PathFunctional PathFunctional::map(std::function<double(double)> g, double bound) const {
  return PathFunctional([g = std::move(g), f = fn_](const PathView& v) { return g(f(v)); }, bound,
                        integrand_);
}

PathFunctional observe(const Functional& phi, std::vector<double> times) {
  if (static_cast<std::size_t>(phi.arity()) != times.size()) {
    throw InvalidArgument("functional arity " + std::to_string(phi.arity()) + " does not match " +
                          std::to_string(times.size()) + " observation time(s)");
  }
  return PathFunctional(
      [phi, times = std::move(times)](const PathView& v) {
        std::array<double, 16> x{};
        std::vector<double> spill;
        double* xs = x.data();
        if (times.size() > x.size()) {
          spill.resize(times.size());
          xs = spill.data();
        }
        for (std::size_t i = 0; i < times.size(); ++i) xs[i] = v.b[v.index_of(times[i])];
        return phi(std::span<const double>(xs, times.size()));
      },
      phi.bound());
}

PathFunctional quadratic_variation(std::function<double(double)> g, double bound) {
  return PathFunctional([g = std::move(g)](const PathView& v) { return g(v.state.qv); }, bound);
}

// ---------------------------------------------------------------------------
// Kernel

namespace detail {

TreeKernel::TreeKernel(const TreeSpec& spec, const SimpleProcess* integrand)
    : steps_(spec.steps),
      dt_(spec.dt()),
      sqrt_dt_(std::sqrt(spec.dt())),
      product_(spec.product_space),
      outcomes_(spec.noise_outcomes()),
      variances_(spec.control_variances()) {
  for (double v : variances_) vols_.push_back(std::sqrt(v));
  if (integrand != nullptr) {
    if (integrand->steps() != steps_) {
      throw InvalidArgument("integrand has " + std::to_string(integrand->steps()) +
                            " steps but the tree has " + std::to_string(steps_));
    }
    h_.assign(integrand->values().begin(), integrand->values().end());
  } else {
    h_.assign(static_cast<std::size_t>(steps_), 0.0);
  }
  if (product_) {
    noise_ = {Noise{1.0, 1.0}, Noise{1.0, -1.0}, Noise{-1.0, 1.0}, Noise{-1.0, -1.0}};
  } else {
    noise_ = {Noise{1.0, 0.0}, Noise{-1.0, 0.0}, Noise{0.0, 0.0}, Noise{0.0, 0.0}};
  }
  double acc = 0.0;
  for (int o = 0; o < outcomes_; ++o) acc += noise_[static_cast<std::size_t>(o)].xi * noise_[static_cast<std::size_t>(o)].eta;
  mean_xi_eta_ = acc / outcomes_;
}

PathState TreeKernel::advance(const PathState& s, int level, int outcome, History& hist) const {
  const auto k = static_cast<std::size_t>(s.step);
  const auto l = static_cast<std::size_t>(level);
  const Noise& n = noise_[static_cast<std::size_t>(outcome)];
  const double var = variances_[l];
  const double db = vols_[l] * n.xi * sqrt_dt_;
  const double dw = product_ ? n.eta * sqrt_dt_ : 0.0;
  const double hk = h_[k];
  const double cov = vols_[l] * dt_ * mean_xi_eta_;

  PathState c;
  c.step = s.step + 1;
  c.t = c.step * dt_;
  c.b = s.b + db;
  c.w = s.w + dw;
  c.qv = s.qv + var * dt_;
  c.qv_w = s.qv_w + (product_ ? dt_ : 0.0);
  c.qv_bw = s.qv_bw + cov;
  c.int_h_db = s.int_h_db + hk * db;
  c.int_h_dw = s.int_h_dw + hk * dw;
  c.int_h2_dqv = s.int_h2_dqv + hk * hk * var * dt_;
  c.int_h2_dqv_bw = s.int_h2_dqv_bw + hk * hk * cov;
  c.int_h2_dt = s.int_h2_dt + hk * hk * dt_;

  hist.sigma_sq[k] = var;
  hist.b[k + 1] = c.b;
  hist.w[k + 1] = c.w;
  hist.shift[k + 1] = hist.shift[k] + hk * var * dt_;
  hist.shift_bw[k + 1] = hist.shift_bw[k] + hk * cov;
  return c;
}

PathView TreeKernel::view(const PathState& s, const History& hist) const {
  const auto n = static_cast<std::size_t>(s.step) + 1;
  return PathView{s,
                  std::span<const double>(hist.b.data(), n),
                  std::span<const double>(hist.w.data(), n),
                  std::span<const double>(hist.sigma_sq.data(), n - 1),
                  std::span<const double>(hist.shift.data(), n),
                  std::span<const double>(hist.shift_bw.data(), n),
                  dt_,
                  product_};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Backward induction

namespace {

class Walker {
 public:
  Walker(const TreeSpec& spec, const PathFunctional& f, Mode mode)
      : kernel_(spec, f.integrand()), f_(f), mode_(mode), hist_(spec.steps) {
    inv_outcomes_ = 1.0 / kernel_.outcomes();
  }

  double root() { return node(PathState{}); }

  void capture_at(int layer, bool keep_states) {
    layer_ = layer;
    action_ = Action::Capture;
    keep_states_ = keep_states;
  }

  void replay_at(int layer, const std::vector<double>* table) {
    layer_ = layer;
    action_ = Action::Replay;
    table_ = table;
  }

  std::vector<double> captured;
  std::vector<PathState> captured_states;

 private:
  enum class Action { None, Capture, Replay };

  double node(const PathState& s) {
    if (s.step == layer_) {
      if (action_ == Action::Replay) return (*table_)[next_++];
      if (action_ == Action::Capture) {
        const Action saved = action_;
        action_ = Action::None;
        const double v = node(s);
        action_ = saved;
        captured.push_back(v);
        if (keep_states_) captured_states.push_back(s);
        return v;
      }
    }
    if (s.step == kernel_.steps()) return f_(kernel_.view(s, hist_));

    double best = mode_ == Mode::Upper ? -std::numeric_limits<double>::infinity()
                                       : std::numeric_limits<double>::infinity();
    for (int l = 0; l < kernel_.levels(); ++l) {
      double acc = 0.0;
      for (int o = 0; o < kernel_.outcomes(); ++o) {
        const PathState child = kernel_.advance(s, l, o, hist_);
        acc += node(child);
      }
      const double avg = acc * inv_outcomes_;
      best = mode_ == Mode::Upper ? std::max(best, avg) : std::min(best, avg);
    }
    return best;
  }

  detail::TreeKernel kernel_;
  const PathFunctional& f_;
  Mode mode_;
  detail::History hist_;
  double inv_outcomes_ = 0.5;

  int layer_ = -1;
  Action action_ = Action::None;
  bool keep_states_ = false;
  const std::vector<double>* table_ = nullptr;
  std::size_t next_ = 0;
};

double checked(double v) {
  if (!std::isfinite(v)) throw Error("scenario tree produced a non-finite value");
  return v;
}

}  // namespace

double expectation(const TreeSpec& spec, const PathFunctional& f, Mode mode) {
  spec.validate();
  Walker walker(spec, f, mode);
  return checked(walker.root());
}

double upper_expectation(const TreeSpec& spec, const PathFunctional& f) {
  return expectation(spec, f, Mode::Upper);
}

double lower_expectation(const TreeSpec& spec, const PathFunctional& f) {
  return expectation(spec, f, Mode::Lower);
}

LayerTable conditional_value(const TreeSpec& spec, const PathFunctional& f, int step, Mode mode,
                             bool keep_states) {
  spec.validate();
  if (step < 0 || step > spec.steps) {
    throw InvalidArgument("conditional_value: layer " + std::to_string(step) +
                          " outside 0.." + std::to_string(spec.steps));
  }
  Walker walker(spec, f, mode);
  walker.capture_at(step, keep_states);
  (void)walker.root();
  LayerTable out;
  out.step = step;
  out.mode = mode;
  out.values = std::move(walker.captured);
  out.states = std::move(walker.captured_states);
  return out;
}

double fold_from_layer(const TreeSpec& spec, const LayerTable& layer) {
  spec.validate();
  const double expected = std::pow(static_cast<double>(spec.control_variances().size()) *
                                       spec.noise_outcomes(),
                                   layer.step);
  if (static_cast<double>(layer.values.size()) != expected) {
    throw InvalidArgument("layer table size does not match the tree shape");
  }
  // The functional is never reached: every path stops at the stored layer.
  const PathFunctional unused = PathFunctional::constant(0.0);
  Walker walker(spec, unused, layer.mode);
  walker.replay_at(layer.step, &layer.values);
  return walker.root();
}

// ---------------------------------------------------------------------------
// Brute-force oracle

namespace {

constexpr int kOracleMaxSteps = 8;
constexpr int kOracleMaxLevels = 3;
constexpr double kMaxStrategies = 1 << 20;
constexpr double kMaxStrategyWork = 1 << 27;
constexpr double kMaxMaterialisedLeaves = 1 << 21;

// Expected value of f under one control rule, enumerating every noise path.
// `choose(node_id, step)` gives the control index at a decision node, where
// node ids follow heap order over noise histories.
template <typename Choose>
double expected_under(const detail::TreeKernel& kernel, const PathFunctional& f, Choose&& choose) {
  detail::History hist(kernel.steps());
  const int outcomes = kernel.outcomes();
  double sum = 0.0;
  // Explicit stack: (state, node id, next outcome to try).
  struct Frame {
    PathState s;
    std::size_t id;
    int next;
  };
  std::vector<Frame> stack;
  stack.push_back({PathState{}, 0, 0});
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.s.step == kernel.steps()) {
      sum += f(kernel.view(top.s, hist));
      stack.pop_back();
      continue;
    }
    if (top.next == outcomes) {
      stack.pop_back();
      continue;
    }
    const int o = top.next++;
    const int level = choose(top.id, top.s.step);
    const PathState child = kernel.advance(top.s, level, o, hist);
    const std::size_t child_id = top.id * static_cast<std::size_t>(outcomes) + 1 + static_cast<std::size_t>(o);
    stack.push_back({child, child_id, 0});
  }
  return sum / std::pow(static_cast<double>(outcomes), kernel.steps());
}

double exhaustive_adaptive(const detail::TreeKernel& kernel, const PathFunctional& f) {
  const int outcomes = kernel.outcomes();
  const int levels = kernel.levels();
  std::size_t decision_nodes = 0;
  for (int k = 0, width = 1; k < kernel.steps(); ++k, width *= outcomes) {
    decision_nodes += static_cast<std::size_t>(width);
  }
  std::vector<int> strategy(decision_nodes, 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    const double v =
        expected_under(kernel, f, [&](std::size_t id, int) { return strategy[id]; });
    best = std::max(best, v);
    // Odometer increment over all decision nodes.
    std::size_t i = 0;
    while (i < decision_nodes && ++strategy[i] == levels) strategy[i++] = 0;
    if (i == decision_nodes) break;
  }
  return best;
}

double materialised_adaptive(const detail::TreeKernel& kernel, const PathFunctional& f) {
  const int m = kernel.steps();
  const std::size_t fan = static_cast<std::size_t>(kernel.levels() * kernel.outcomes());
  std::size_t leaves = 1;
  for (int k = 0; k < m; ++k) leaves *= fan;

  // Leaf i encodes its branch choices in base `fan`, step 0 most significant.
  std::vector<double> values(leaves);
  std::vector<std::size_t> digits(static_cast<std::size_t>(m));
  detail::History hist(m);
  for (std::size_t i = 0; i < leaves; ++i) {
    std::size_t rest = i;
    for (int k = m; k-- > 0;) {
      digits[static_cast<std::size_t>(k)] = rest % fan;
      rest /= fan;
    }
    PathState s{};
    for (int k = 0; k < m; ++k) {
      const std::size_t d = digits[static_cast<std::size_t>(k)];
      s = kernel.advance(s, static_cast<int>(d) / kernel.outcomes(),
                         static_cast<int>(d) % kernel.outcomes(), hist);
    }
    values[i] = f(kernel.view(s, hist));
  }

  // Layer-by-layer reduction: mean over noise, max over controls.
  for (int k = m; k > 0; --k) {
    const std::size_t parents = values.size() / fan;
    std::vector<double> reduced(parents);
    for (std::size_t p = 0; p < parents; ++p) {
      double best = -std::numeric_limits<double>::infinity();
      for (int l = 0; l < kernel.levels(); ++l) {
        double acc = 0.0;
        for (int o = 0; o < kernel.outcomes(); ++o) {
          acc += values[p * fan + static_cast<std::size_t>(l * kernel.outcomes() + o)];
        }
        best = std::max(best, acc / kernel.outcomes());
      }
      reduced[p] = best;
    }
    values = std::move(reduced);
  }
  return values.front();
}

double best_open_loop(const detail::TreeKernel& kernel, const PathFunctional& f) {
  const int m = kernel.steps();
  std::vector<int> sequence(static_cast<std::size_t>(m), 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    best = std::max(best, expected_under(kernel, f, [&](std::size_t, int step) {
                      return sequence[static_cast<std::size_t>(step)];
                    }));
    std::size_t i = 0;
    while (i < sequence.size() && ++sequence[i] == kernel.levels()) sequence[i++] = 0;
    if (i == sequence.size()) break;
  }
  return best;
}

}  // namespace

OracleReport enumerate_oracle_report(const TreeSpec& spec, const PathFunctional& f) {
  spec.validate();
  if (spec.steps > kOracleMaxSteps || spec.sigma_levels > kOracleMaxLevels) {
    throw ConfigError("enumerate_oracle is capped at steps <= 8 and sigma_levels <= 3");
  }
  const detail::TreeKernel kernel(spec, f.integrand());
  const double levels = kernel.levels();
  const double outcomes = kernel.outcomes();
  double decision_nodes = 0.0;
  for (int k = 0; k < spec.steps; ++k) decision_nodes += std::pow(outcomes, k);
  const double paths = std::pow(outcomes, spec.steps);

  OracleReport report;
  report.strategies = std::pow(levels, decision_nodes);

  if (report.strategies <= kMaxStrategies && report.strategies * paths <= kMaxStrategyWork) {
    report.adaptive = exhaustive_adaptive(kernel, f);
    report.exhaustive = true;
  } else if (spec.leaf_count() <= kMaxMaterialisedLeaves) {
    report.adaptive = materialised_adaptive(kernel, f);
  } else {
    throw ConfigError("enumerate_oracle: game tree with " + std::to_string(spec.leaf_count()) +
                      " leaves is too large to materialise");
  }

  if (std::pow(levels, spec.steps) * paths <= kMaxStrategyWork) {
    report.nonadaptive = best_open_loop(kernel, f);
  } else {
    report.nonadaptive = std::numeric_limits<double>::quiet_NaN();
  }
  report.adaptive = checked(report.adaptive);
  return report;
}

double enumerate_oracle(const TreeSpec& spec, const PathFunctional& f) {
  return enumerate_oracle_report(spec, f).adaptive;
}

}  // namespace gexp
