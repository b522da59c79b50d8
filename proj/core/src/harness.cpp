#include "gexp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <utility>

#include "gexp/errors.hpp"
#include "gexp/gheat_pde.hpp"
#include "gexp/girsanov.hpp"
#include "gexp/quadrature.hpp"
#include "gexp/scenario_tree.hpp"
#include "gexp/stochastic.hpp"
#include "gexp/uncertainty.hpp"

namespace gexp {

namespace {

constexpr double kExact = 1e-12;

using Clock = std::chrono::steady_clock;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

TreeSpec tree(VolatilityBand band, int steps, int levels, bool product = false) {
  TreeSpec s;
  s.steps = steps;
  s.band = band;
  s.sigma_levels = levels;
  s.product_space = product;
  s.validate();
  return s;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ",";
    out += fmt(v[i]);
  }
  return out;
}

// Collects failures; the criterion passes when nothing was recorded.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& s) {
    if (!notes_.empty()) notes_ += "; ";
    notes_ += s;
  }
  [[nodiscard]] bool ok() const { return failures_.empty(); }
  [[nodiscard]] std::string detail() const {
    std::string out = notes_;
    for (const auto& f : failures_) out += (out.empty() ? "" : "; ") + std::string("FAILED ") + f;
    return out;
  }

 private:
  std::vector<std::string> failures_;
  std::string notes_;
};

// ---------------------------------------------------------------------------
// Random expressions

phi::Node number(double v) {
  phi::Node n;
  n.op = phi::Op::Number;
  n.number = std::abs(v);
  if (v >= 0.0) return n;
  phi::Node neg;
  neg.op = phi::Op::Neg;
  neg.args.push_back(std::move(n));
  return neg;
}

phi::Node random_node(std::mt19937_64& rng, int arity, int depth) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  auto constant = [&](double lo, double hi) {
    return std::round((lo + (hi - lo) * unit(rng)) * 100.0) / 100.0;
  };

  if (depth == 0 || unit(rng) < 0.25) {
    if (unit(rng) < 0.7) {
      phi::Node v;
      v.op = phi::Op::Var;
      v.var = 1 + pick(arity);
      return v;
    }
    return number(constant(-2.0, 2.0));
  }

  static constexpr phi::Op kOps[] = {phi::Op::Add, phi::Op::Sub, phi::Op::Mul, phi::Op::Neg,
                                     phi::Op::Cos, phi::Op::Sin, phi::Op::Exp, phi::Op::Abs,
                                     phi::Op::Min, phi::Op::Max, phi::Op::Clip};
  phi::Node n;
  n.op = kOps[pick(static_cast<int>(std::size(kOps)))];
  switch (n.op) {
    case phi::Op::Add:
    case phi::Op::Sub:
    case phi::Op::Mul:
    case phi::Op::Min:
    case phi::Op::Max:
      n.args.push_back(random_node(rng, arity, depth - 1));
      n.args.push_back(random_node(rng, arity, depth - 1));
      break;
    case phi::Op::Clip: {
      const double c = constant(0.1, 2.0);
      n.args.push_back(random_node(rng, arity, depth - 1));
      n.args.push_back(number(-c));
      n.args.push_back(number(c));
      break;
    }
    default:
      n.args.push_back(random_node(rng, arity, depth - 1));
      break;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Criteria

CriterionResult axioms(const HarnessOptions& o) {
  CriterionResult r;
  Check c;
  for (const auto& tally : run_axiom_suite(o.quick ? 25 : 100)) {
    c.note(tally.axiom + " " + std::to_string(tally.passed) + "/" + std::to_string(tally.trials));
    c.expect(tally.passed == tally.trials, tally.axiom + " worst violation " + fmt(tally.worst));
  }
  r.passed = c.ok();
  r.detail = c.detail();
  return r;
}

CriterionResult oracle_equivalence(const HarnessOptions&) {
  CriterionResult r;
  Check c;
  std::mt19937_64 rng(7);
  double worst = 0.0;
  int exhaustive = 0;
  int total = 0;
  auto run = [&](int steps, int count, std::vector<double> times) {
    const TreeSpec spec = tree({0.25, 1.0}, steps, 2);
    for (int i = 0; i < count; ++i) {
      const Functional phi = random_functional(rng, static_cast<int>(times.size()));
      PathFunctional f = observe(phi, times);
      // Every fourth functional also depends on the realised variance path.
      if (i % 4 == 3) f = f + quadratic_variation([](double q) { return std::sin(3.0 * q); }, 1.0);
      const double dp = upper_expectation(spec, f);
      const OracleReport o = enumerate_oracle_report(spec, f);
      worst = std::max(worst, std::abs(dp - o.adaptive));
      exhaustive += o.exhaustive ? 1 : 0;
      ++total;
    }
  };
  run(4, 20, {0.5, 1.0});
  run(6, 5, {1.0 / 3.0, 2.0 / 3.0, 1.0});
  c.note(std::to_string(total) + " functionals, " + std::to_string(exhaustive) +
         " by full strategy enumeration, max |dp - oracle| " + fmt(worst));
  c.expect(worst <= kExact, "oracle mismatch");
  r.passed = c.ok();
  r.detail = c.detail();
  return r;
}

struct CatalogEntry {
  std::string name;
  Functional phi;
};

std::vector<CatalogEntry> cross_catalog() {
  return {{"cos1", *catalog("cos1")},
          {"sq", *catalog("sq")},
          {"lin", *catalog("lin")},
          {"-sq", parse("-(x1 * x1)", 1, 25.0)}};
}

CriterionResult cross_engine(const HarnessOptions& o) {
  CriterionResult r;
  Check c;
  // m = 12 even when quick: the quadrature check needs it at the classical band.
  const Accuracy acc = o.quick ? Accuracy::Coarse : Accuracy::Fine;
  const int m = 12;
  double worst = 0.0;
  double worst_gh = 0.0;
  for (const VolatilityBand band : {VolatilityBand{0.25, 1.0}, VolatilityBand{0.0, 1.0},
                                    VolatilityBand{1.0, 1.0}}) {
    const Generator gen(band);
    const TreeSpec spec = tree(band, m, 2);
    for (const auto& [name, phi] : cross_catalog()) {
      const double pde = expect_single(gen, phi, 1.0, acc);
      const double tr = upper_expectation(spec, observe(phi, {1.0}));
      const double d = std::abs(pde - tr);
      worst = std::max(worst, d);
      const std::string where = name + " on [" + fmt(band.sigma_min_sq()) + "," +
                                fmt(band.sigma_max_sq()) + "]";
      c.expect(d <= 1e-2, where + ": pde " + fmt(pde) + " tree " + fmt(tr));
      if (band.is_singleton()) {
        const double gh = normal_expectation(
            [&phi = phi](double x) { return phi(std::span<const double>(&x, 1)); }, 1.0);
        const double g = std::max(std::abs(pde - gh), std::abs(tr - gh));
        worst_gh = std::max(worst_gh, g);
        c.expect(g <= 5e-3, where + " against quadrature " + fmt(gh));
      }
    }
  }
  c.note("max |pde - tree| " + fmt(worst) + " (tol 1e-2), max distance to quadrature " +
         fmt(worst_gh) + " (tol 5e-3)");
  r.passed = c.ok();
  r.detail = c.detail();
  return r;
}

CriterionResult variance_envelope(const HarnessOptions& o) {
  CriterionResult r;
  Check c;
  const Accuracy acc = o.quick ? Accuracy::Coarse : Accuracy::Fine;
  const int m = o.quick ? 8 : 12;
  const Functional sq = *catalog("sq");
  const Functional neg_sq = parse("-(x1 * x1)", 1, 25.0);
  for (const VolatilityBand band : {VolatilityBand{0.25, 1.0}, VolatilityBand{0.0, 1.0}}) {
    const Generator gen(band);
    const TreeSpec spec = tree(band, m, 2);
    const double pde_hi = expect_single(gen, sq, 1.0, acc);
    const double pde_lo = -expect_single(gen, neg_sq, 1.0, acc);
    const PathFunctional b2 = observe(sq, {1.0});
    const double tr_hi = upper_expectation(spec, b2);
    const double tr_lo = lower_expectation(spec, b2);
    const double hi = band.sigma_max_sq();
    const double lo = band.sigma_min_sq();
    const double dev = std::max({std::abs(pde_hi - hi), std::abs(pde_lo - lo), std::abs(tr_hi - hi),
                                 std::abs(tr_lo - lo)});
    c.note("[" + fmt(lo) + "," + fmt(hi) + "] pde (" + fmt(pde_lo) + ", " + fmt(pde_hi) +
           ") tree (" + fmt(tr_lo) + ", " + fmt(tr_hi) + ")");
    c.expect(dev <= 5e-3, "envelope deviation " + fmt(dev));
  }
  r.passed = c.ok();
  r.detail = c.detail();
  return r;
}

CriterionResult symmetric_martingale(const HarnessOptions& o) {
  CriterionResult r;
  Check c;
  const int m = o.quick ? 8 : 12;
  const TreeSpec spec = tree({0.25, 1.0}, m, 2);
  const SimpleProcess h = SimpleProcess::constant(0.5, m);
  const PathFunctional e = exp_martingale(h);
  const double up = upper_expectation(spec, e);
  const double lo = lower_expectation(spec, e);
  const PathFunctional n = exp_martingale_normalized(h);
  const double nup = upper_expectation(spec, n);
  const double nlo = lower_expectation(spec, n);
  c.note("upper " + fmt(up) + " lower " + fmt(lo) + " normalized (" + fmt(nlo) + ", " + fmt(nup) +
         ")");
  c.expect(std::abs(up - 1.0) <= 1e-2, "upper off 1");
  c.expect(std::abs(lo - 1.0) <= 1e-2, "lower off 1");
  c.expect(std::abs(nup - 1.0) <= kExact && std::abs(nlo - 1.0) <= kExact,
           "normalized martingale not exactly 1");
  r.passed = c.ok();
  r.detail = c.detail();
  return r;
}

struct IdentityCase {
  std::vector<double> times;
  Functional phi;
};

std::vector<IdentityCase> identity_cases() {
  const Functional cos1 = *catalog("cos1");
  return {{{1.0}, cos1}, {{0.5, 1.0}, mean_lift(cos1, 2)}};
}

CriterionResult identity_nondegenerate(const HarnessOptions& o) {
  CriterionResult r;
  Check c;
  const Generator gen({0.25, 1.0});
  const std::vector<int> steps = o.quick ? std::vector<int>{4, 6, 8} : std::vector<int>{6, 8, 10, 12};
  IdentityOptions opt;
  opt.inject_bias = o.inject_bias;
  for (const auto& [times, phi] : identity_cases()) {
    const auto reports = verify_identity(gen, IntegrandSpec::constant(0.5), phi, times, steps, opt);
    std::vector<double> errors;
    for (const auto& rep : reports) errors.push_back(rep.abs_error());
    const std::string label = times.size() == 1 ? "times (1)" : "times (0.5,1)";
    c.note(label + " errors " + join(errors));
    c.expect(errors.back() <= 1e-2, label + " final error above 1e-2");
    c.expect(strictly_decreasing(errors), label + " errors not strictly decreasing");
  }
  r.passed = c.ok();
  r.detail = c.detail();
  return r;
}

CriterionResult identity_degenerate(const HarnessOptions& o) {
  CriterionResult r;
  Check c;
  const Generator gen({0.0, 1.0});
  IdentityOptions opt;
  opt.inject_bias = o.inject_bias;
  const int m = o.quick ? 8 : 12;
  for (const auto& [times, phi] : identity_cases()) {
    const auto rep = verify_identity(gen, IntegrandSpec::constant(0.5), phi, times, {m}, opt).front();
    const std::string label = times.size() == 1 ? "times (1)" : "times (0.5,1)";
    c.note(label + " lhs " + fmt(rep.lhs) + " rhs " + fmt(rep.rhs) + " error " +
           fmt(rep.abs_error()));
    c.expect(rep.abs_error() <= 1e-2, label + " error above 1e-2");
  }
  r.passed = c.ok();
  r.detail = c.detail();
  return r;
}

CriterionResult jeps(const HarnessOptions& o) {
  CriterionResult r;
  Check c;
  const JepsSweep s = jeps_sweep(Generator({0.25, 1.0}), IntegrandSpec::constant(1.0), 1.0, 1.0,
                                 {0.4, 0.2, 0.1, 0.05}, o.quick ? 8 : 12);
  std::vector<double> up, lo;
  for (const auto& row : s.rows) {
    up.push_back(std::abs(row.upper - 1.0));
    lo.push_back(std::abs(row.lower - 1.0));
  }
  c.note("|E[J]-1| " + join(up) + " |-E[-J]-1| " + join(lo) + " slopes " + fmt(s.slope_upper) +
         ", " + fmt(s.slope_lower));
  c.expect(strictly_decreasing(up) && strictly_decreasing(lo), "deviations not decreasing");
  c.expect(up.back() <= 1e-2 && lo.back() <= 1e-2, "final deviation above 1e-2");
  c.expect(s.slope_upper >= 1.5 && s.slope_lower >= 1.5, "log-log slope below 1.5");
  r.passed = c.ok();
  r.detail = c.detail();
  return r;
}

CriterionResult qv_identity(const HarnessOptions& o) {
  CriterionResult r;
  Check c;
  const int m = o.quick ? 6 : 8;
  const std::vector<double> eps = {0.4, 0.2, 0.1, 0.05};
  for (const VolatilityBand band : {VolatilityBand{0.25, 1.0}, VolatilityBand{0.0, 1.0}}) {
    const TreeSpec spec = tree(band, m, 2, true);
    const SimpleProcess h = SimpleProcess::constant(0.5, m);
    const PathFunctional e = exp_martingale(h);
    std::vector<PathFunctional> n, w;
    for (double x : eps) {
      n.push_back(n_epsilon(h, x));
      w.push_back(w_exponential(h, x));
    }
    auto worst_qv = std::make_shared<double>(0.0);
    auto worst_n = std::make_shared<double>(0.0);
    auto paths = std::make_shared<long long>(0);
    const PathFunctional probe(
        [=](const PathView& v) {
          ++*paths;
          const double e_val = e(v);
          for (std::size_t i = 0; i < eps.size(); ++i) {
            const double x = eps[i];
            const double gap = v.state.qv_perturbed(x) - v.state.qv - x * x * spec.t_final;
            *worst_qv = std::max(*worst_qv, std::abs(gap));
            const double lhs = n[i](v);
            const double rhs = e_val * w[i](v);
            *worst_n = std::max(*worst_n, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
          }
          return 0.0;
        },
        0.0, std::make_shared<const SimpleProcess>(h));
    (void)upper_expectation(spec, probe);
    c.note("[" + fmt(band.sigma_min_sq()) + "," + fmt(band.sigma_max_sq()) + "] " +
           std::to_string(*paths) + " paths, qv gap " + fmt(*worst_qv) + ", N factorization " +
           fmt(*worst_n));
    c.expect(*paths > 0 && *worst_qv <= kExact, "qv identity");
    c.expect(*worst_n <= kExact, "N factorization");
  }
  r.passed = c.ok();
  r.detail = c.detail();
  return r;
}

CriterionResult pipeline(const HarnessOptions& o) {
  CriterionResult r;
  Check c;
  DegenerateOptions opt;
  opt.inject_bias = o.inject_bias;
  const DegenerateReport rep =
      degenerate_pipeline(Generator({0.0, 1.0}), IntegrandSpec::constant(0.5), *catalog("cos1"),
                          {1.0}, {0.4, 0.2, 0.1}, o.quick ? 6 : 8, opt);
  std::vector<double> ident, s1, s2;
  for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i) {
    const auto& row = rep.rows[i];
    ident.push_back(row.identity_error());
    s1.push_back(row.step1);
    s2.push_back(row.step2);
    c.expect(row.step1 <= row.step1_bound,
             "step1 " + fmt(row.step1) + " above bound " + fmt(row.step1_bound));
  }
  c.note("identity " + join(ident) + " step1 " + join(s1) + " step2 " + join(s2) + " L " +
         fmt(rep.lipschitz) + " E|W| " + fmt(rep.mean_abs_w));
  c.expect(*std::max_element(ident.begin(), ident.end()) <= 2e-2, "identity error above 2e-2");
  c.expect(strictly_decreasing(s1), "step1 not decreasing");
  c.expect(strictly_decreasing(s2), "step2 not decreasing");
  r.passed = c.ok();
  r.detail = c.detail();
  return r;
}

struct Entry {
  const char* name;
  double limit;
  CriterionResult (*fn)(const HarnessOptions&);
};

constexpr Entry kEntries[] = {
    {"axiom suite", 30, axioms},
    {"oracle equivalence", 60, oracle_equivalence},
    {"cross-engine", 120, cross_engine},
    {"variance envelope", 60, variance_envelope},
    {"symmetric martingale", 60, symmetric_martingale},
    {"identity, non-degenerate", 120, identity_nondegenerate},
    {"identity, degenerate", 60, identity_degenerate},
    {"J_eps sweep", 60, jeps},
    {"quadratic variation", 30, qv_identity},
    {"degenerate pipeline", 180, pipeline},
};

}  // namespace

Functional random_functional(std::mt19937_64& rng, int arity) {
  std::uniform_real_distribution<double> bound(0.5, 5.0);
  const phi::Node root = random_node(rng, arity, 3);
  return parse(phi::render(root), arity, std::round(bound(rng) * 100.0) / 100.0);
}

std::vector<AxiomTally> run_axiom_suite(int trials, std::uint64_t seed, int steps,
                                        int sigma_levels) {
  if (trials < 1) throw InvalidArgument("axiom suite needs at least one trial");
  const TreeSpec spec = tree({0.25, 1.0}, steps, sigma_levels);
  if (steps % 2 != 0) throw InvalidArgument("axiom suite observes T/2, so steps must be even");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-3.0, 3.0);

  std::vector<AxiomTally> t = {{"monotonicity"}, {"constant"},  {"sub-additivity"},
                               {"homogeneity"},  {"duality"},   {"jensen"}};
  auto record = [&](std::size_t i, double violation) {
    t[i].trials += 1;
    if (violation <= kExact) t[i].passed += 1;
    t[i].worst = std::max(t[i].worst, violation);
  };

  const std::vector<double> times = {0.5 * spec.t_final, spec.t_final};
  for (int trial = 0; trial < trials; ++trial) {
    const PathFunctional f = observe(random_functional(rng, 2), times);
    const PathFunctional g = observe(random_functional(rng, 2), times);
    const double ef = upper_expectation(spec, f);
    const double eg = upper_expectation(spec, g);

    const PathFunctional fg_max([f, g](const PathView& v) { return std::max(f(v), g(v)); },
                                std::max(f.bound(), g.bound()));
    record(0, ef - upper_expectation(spec, fg_max));

    const double k = unit(rng);
    const double shifted = upper_expectation(spec, f + PathFunctional::constant(k));
    record(1, std::max(std::abs(upper_expectation(spec, PathFunctional::constant(k)) - k),
                       std::abs(shifted - (ef + k))));

    record(2, upper_expectation(spec, f + g) - (ef + eg));

    double hom = 0.0;
    for (double lambda : {0.0, 0.5, 2.0}) {
      hom = std::max(hom, std::abs(upper_expectation(spec, lambda * f) - lambda * ef));
    }
    record(3, hom);

    record(4, std::abs(lower_expectation(spec, f) + upper_expectation(spec, -f)));

    // Rotate through convex maps; scale keeps exp moderate.
    const double s = f.bound();
    double jensen = 0.0;
    switch (trial % 3) {
      case 0:
        jensen = ef * ef - upper_expectation(spec, f.map([](double x) { return x * x; }, s * s));
        break;
      case 1:
        jensen = std::abs(ef) - upper_expectation(spec, f.map([](double x) { return std::abs(x); }, s));
        break;
      default:
        jensen = std::exp(ef / s) -
                 upper_expectation(spec, f.map([s](double x) { return std::exp(x / s); }, std::exp(1.0)));
        break;
    }
    record(5, jensen);
  }
  return t;
}

std::vector<Criterion> acceptance_criteria() {
  std::vector<Criterion> out;
  for (int id = 1; id <= static_cast<int>(std::size(kEntries)); ++id) {
    out.emplace_back([id](const HarnessOptions& o) { return run_criterion(id, o); });
  }
  return out;
}

CriterionResult run_criterion(int id, const HarnessOptions& options) {
  if (id < 1 || id > static_cast<int>(std::size(kEntries))) {
    throw InvalidArgument("no acceptance criterion " + std::to_string(id));
  }
  const Entry& e = kEntries[id - 1];
  const auto start = Clock::now();
  CriterionResult r;
  try {
    r = e.fn(options);
  } catch (const std::exception& ex) {
    r.passed = false;
    r.detail = std::string("error: ") + ex.what();
  }
  r.id = id;
  r.name = e.name;
  r.time_limit = e.limit;
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (r.seconds > r.time_limit) {
    r.passed = false;
    r.detail += "; FAILED over time limit";
  }
  return r;
}

std::vector<CriterionResult> run_acceptance(
    const HarnessOptions& options, const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= static_cast<int>(std::size(kEntries)); ++id) {
    out.push_back(run_criterion(id, options));
    if (on_result) on_result(out.back());
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  char head[160];
  std::snprintf(head, sizeof head, "%s %2d  %-26s (%.1f s / %.0f s)  ", r.passed ? "PASS" : "FAIL",
                r.id, r.name.c_str(), r.seconds, r.time_limit);
  return head + r.detail;
}

}  // namespace gexp
