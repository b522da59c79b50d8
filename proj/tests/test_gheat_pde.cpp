#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gexp/errors.hpp"
#include "gexp/gheat_pde.hpp"
#include "gexp/harness.hpp"
#include "gexp/scenario_tree.hpp"
#include "oracles.hpp"

using namespace gexp;

namespace {

double phi1(const Functional& f, double x) { return f(std::span<const double>(&x, 1)); }

TreeSpec tree(VolatilityBand band, int steps, int levels = 2) {
  TreeSpec s;
  s.steps = steps;
  s.band = band;
  s.sigma_levels = levels;
  return s;
}

}  // namespace

TEST(Grid, TierShapes) {
  const Generator gen({0.25, 1.0});
  EXPECT_EQ(tier_nodes(Accuracy::Coarse), 201);
  EXPECT_EQ(tier_nodes(Accuracy::Medium), 401);
  EXPECT_EQ(tier_nodes(Accuracy::Fine), 801);
  for (Accuracy a : {Accuracy::Coarse, Accuracy::Medium, Accuracy::Fine}) {
    const PdeGrid g = make_grid(gen, 2.0, a);
    EXPECT_EQ(g.nx, tier_nodes(a));
    EXPECT_GE(g.x_half_width, 6.0 * std::sqrt(2.0) - 1e-12);
    EXPECT_LE(g.dt, g.dx() * g.dx() / 1.0);
    EXPECT_NO_THROW(validate_grid(gen, g));
  }
  EXPECT_EQ(parse_accuracy("fine"), Accuracy::Fine);
  EXPECT_EQ(to_string(Accuracy::Medium), "medium");
  EXPECT_THROW((void)parse_accuracy("ultra"), InvalidArgument);
}

TEST(Grid, RejectsCflAndTruncationViolations) {
  const Generator gen({0.25, 1.0});
  PdeGrid g = make_grid(gen, 1.0, Accuracy::Coarse);
  g.dt = 2.0 * g.dx() * g.dx();
  try {
    validate_grid(gen, g);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("dt"), std::string::npos);
  }
  PdeGrid narrow = make_grid(gen, 1.0, Accuracy::Coarse);
  narrow.x_half_width = 3.0;
  EXPECT_THROW(validate_grid(gen, narrow), ConfigError);
  PdeGrid even = make_grid(gen, 1.0, Accuracy::Coarse);
  even.nx = 200;
  EXPECT_THROW(validate_grid(gen, even), ConfigError);
}

TEST(ExpectSingle, LinearIsZeroByLinearity) {
  for (VolatilityBand band : {VolatilityBand{0.25, 1.0}, VolatilityBand{0.0, 1.0}, VolatilityBand{1.0, 1.0}}) {
    EXPECT_NEAR(expect_single(Generator(band), *catalog("lin"), 1.0, Accuracy::Medium), 0.0, 1e-12);
  }
}

TEST(ExpectSingle, ConvexUsesTopVariance) {
  const Functional sq = *catalog("sq");
  const double reference = oracle::normal_simpson([&](double x) { return phi1(sq, x); }, 1.0);
  const double v = expect_single(Generator({0.25, 1.0}), sq, 1.0, Accuracy::Fine);
  EXPECT_NEAR(v, reference, 5e-3);
  EXPECT_NEAR(v, 1.0, 5e-3);
}

TEST(ExpectSingle, ConcaveUsesBottomVariance) {
  const Functional neg = parse("-(x1*x1)", 1, 25);
  const double v = expect_single(Generator({0.0, 1.0}), neg, 1.0, Accuracy::Fine);
  const double tr = upper_expectation(tree({0.0, 1.0}, 10), observe(neg, {1.0}));
  EXPECT_NEAR(v, tr, 5e-3);
  EXPECT_NEAR(v, 0.0, 5e-3);
}

TEST(ExpectSingle, ClassicalHeatKernel) {
  const Functional cos1 = *catalog("cos1");
  const double reference = oracle::normal_simpson([&](double x) { return phi1(cos1, x); }, 1.0);
  const double v = expect_single(Generator({1.0, 1.0}), cos1, 1.0, Accuracy::Fine);
  EXPECT_NEAR(v, reference, 5e-3);
  EXPECT_NEAR(v, std::exp(-0.5), 5e-3);
}

TEST(ExpectSingle, ConstantAndZeroBand) {
  EXPECT_EQ(expect_single(Generator({0.25, 1.0}), parse("min(1, 2)", 1, 5), 1.0, Accuracy::Coarse), 1.0);
  const Generator zero(VolatilityBand::totally_degenerate());
  EXPECT_EQ(expect_single(zero, *catalog("sq"), 1.0, Accuracy::Fine), 0.0);
  EXPECT_EQ(expect_single(zero, *catalog("cos1"), 1.0, Accuracy::Fine), 1.0);
}

TEST(Solve, ConstantPreserving) {
  const Generator gen({0.25, 1.0});
  const PdeGrid g = make_grid(gen, 1.0, Accuracy::Coarse);
  const SolutionField f = solve(gen, InitialCondition([](double) { return 0.7; }), g);
  for (double v : f.values) EXPECT_NEAR(v, 0.7, 1e-15);
  EXPECT_GT(f.steps, 0);
  EXPECT_NEAR(f.dt * f.steps, 1.0, 1e-12);
}

TEST(Solve, MaximumPrinciple) {
  std::mt19937_64 rng(17);
  const Generator gen({0.25, 1.0});
  const PdeGrid g = make_grid(gen, 1.0, Accuracy::Coarse);
  for (int i = 0; i < 20; ++i) {
    const Functional f = random_functional(rng, 1);
    for (double v : solve(gen, f, g).values) EXPECT_LE(std::abs(v), f.bound() + 1e-12);
  }
}

TEST(Solve, ComparisonPrincipleOnRandomPairs) {
  std::mt19937_64 rng(21);
  const Generator gen({0.25, 1.0});
  const PdeGrid g = make_grid(gen, 1.0, Accuracy::Coarse);
  for (int i = 0; i < 20; ++i) {
    const Functional a = random_functional(rng, 1);
    const Functional b = random_functional(rng, 1);
    const InitialCondition lo = [&](double x) { return phi1(a, x); };
    const InitialCondition hi = [&](double x) { return std::max(phi1(a, x), phi1(b, x)); };
    const SolutionField u = solve(gen, lo, g);
    const SolutionField v = solve(gen, hi, g);
    for (std::size_t k = 0; k < u.values.size(); ++k) {
      EXPECT_LE(u.values[k], v.values[k] + 1e-13) << a.source() << " vs " << b.source();
    }
  }
}

TEST(ExpectSingle, RefinementConverges) {
  for (VolatilityBand band : {VolatilityBand{0.25, 1.0}, VolatilityBand{0.0, 1.0}, VolatilityBand{1.0, 1.0}}) {
    const Generator gen(band);
    for (const std::string name : {"cos1", "sq", "lin"}) {
      const Functional f = *catalog(name);
      const double c = expect_single(gen, f, 1.0, Accuracy::Coarse);
      const double m = expect_single(gen, f, 1.0, Accuracy::Medium);
      const double fi = expect_single(gen, f, 1.0, Accuracy::Fine);
      EXPECT_LE(std::abs(fi - m), std::abs(m - c) + 1e-15) << name;
    }
  }
}

TEST(ExpectSingle, SublinearWithinSchemeTolerance) {
  std::mt19937_64 rng(23);
  const Generator gen({0.25, 1.0});
  for (int i = 0; i < 10; ++i) {
    const Functional a = random_functional(rng, 1);
    const Functional b = random_functional(rng, 1);
    const InitialCondition sum = [&](double x) { return phi1(a, x) + phi1(b, x); };
    const double lhs = expect_single(gen, sum, 1.0, Accuracy::Medium);
    const double rhs = expect_single(gen, a, 1.0, Accuracy::Medium) +
                       expect_single(gen, b, 1.0, Accuracy::Medium);
    EXPECT_LE(lhs, rhs + 2 * 5e-3);
  }
}

TEST(ExpectCylinder, CentredIncrementIsZero) {
  const Functional inc = parse("x2 - x1", 2, 10);
  const std::vector<double> times{0.5, 1.0};
  for (VolatilityBand band : {VolatilityBand{0.25, 1.0}, VolatilityBand{0.0, 1.0}, VolatilityBand{1.0, 1.0}}) {
    EXPECT_NEAR(expect_cylinder(Generator(band), inc, times, Accuracy::Coarse), 0.0, 5e-3);
  }
}

// The Rademacher tree at m = 12 carries an O(1/sqrt(m)) bias of about 1.2e-2
// for the kinked min; the singleton band collapses to one control level, so
// the tree can be refined to m = 24 instead.
TEST(ExpectCylinder, MinMatchesClassicalAndTree) {
  const Functional f = parse("min(x1, x2)", 2, 10);
  const std::vector<double> times{0.5, 1.0};
  const Generator gen({1.0, 1.0});
  const double pde = expect_cylinder(gen, f, times, Accuracy::Medium);
  const double exact = -0.5 * std::sqrt(0.5) * std::sqrt(2.0 / M_PI);
  EXPECT_NEAR(pde, exact, 1e-2);
  const double tr = upper_expectation(tree({1.0, 1.0}, 24), observe(f, times));
  EXPECT_NEAR(pde, tr, 1e-2);
}

TEST(ExpectCylinder, SingleTimeAgreesWithExpectSingle) {
  const Generator gen({0.25, 1.0});
  const std::vector<double> t{1.0};
  EXPECT_NEAR(expect_cylinder(gen, *catalog("cos1"), t, Accuracy::Coarse),
              expect_single(gen, *catalog("cos1"), 1.0, Accuracy::Coarse), 1e-3);
}

TEST(ExpectCylinder, RejectsBadTimes) {
  const Generator gen({0.25, 1.0});
  const Functional f = parse("x1 + x2", 2, 10);
  const std::vector<double> unsorted{1.0, 0.5};
  EXPECT_THROW((void)expect_cylinder(gen, f, unsorted, Accuracy::Coarse), InvalidArgument);
  const std::vector<double> one{1.0};
  EXPECT_THROW((void)expect_cylinder(gen, f, one, Accuracy::Coarse), InvalidArgument);
}
