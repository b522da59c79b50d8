#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "gexp/errors.hpp"
#include "gexp/harness.hpp"
#include "gexp/scenario_tree.hpp"
#include "oracles.hpp"

using namespace gexp;

namespace {

TreeSpec tree(VolatilityBand band, int steps, int levels = 2, double t = 1.0) {
  TreeSpec s;
  s.steps = steps;
  s.band = band;
  s.sigma_levels = levels;
  s.t_final = t;
  return s;
}

double terminal_sq(const std::vector<double>& path, double) {
  return std::min(path.back() * path.back(), 25.0);
}

}  // namespace

TEST(TreeSpec, ShapeAndBudget) {
  TreeSpec s = tree({0.25, 1.0}, 8, 3);
  EXPECT_DOUBLE_EQ(s.dt(), 0.125);
  EXPECT_EQ(s.control_variances(), (std::vector<double>{0.25, 0.625, 1.0}));
  EXPECT_EQ(s.noise_outcomes(), 2);
  EXPECT_DOUBLE_EQ(s.leaf_count(), std::pow(6.0, 8));
  s.product_space = true;
  EXPECT_EQ(s.noise_outcomes(), 4);
  EXPECT_DOUBLE_EQ(s.leaf_count(), std::pow(12.0, 8));
  try {
    s.validate();
    FAIL() << "expected budget refusal";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("steps to <= 7"), std::string::npos) << e.what();
  }
  EXPECT_THROW(tree({0.25, 1.0}, 0).validate(), ConfigError);
  EXPECT_THROW(tree({0.25, 1.0}, 4, 1).validate(), ConfigError);
}

TEST(TreeSpec, CoincidentLevelsCollapse) {
  EXPECT_EQ(tree({1.0, 1.0}, 4, 5).control_variances().size(), 1u);
  EXPECT_EQ(tree(VolatilityBand::totally_degenerate(), 4, 5).control_variances().size(), 1u);
  EXPECT_DOUBLE_EQ(tree({1.0, 1.0}, 4, 5).leaf_count(), 16.0);
}

TEST(UpperExpectation, ConstantPreserving) {
  for (double c : {-2.5, 0.0, 0.3, 7.0}) {
    EXPECT_EQ(upper_expectation(tree({0.25, 1.0}, 5, 3), PathFunctional::constant(c)), c);
  }
}

TEST(UpperExpectation, TerminalSquareIsTopVariance) {
  const PathFunctional sq = observe(*catalog("sq"), {1.0});
  EXPECT_NEAR(upper_expectation(tree({0.25, 1.0}, 10), sq), 1.0, 1e-12);
  oracle::Expectimax ex{oracle::levels(0.25, 1.0, 3), 1.0 / 6, 6, true, terminal_sq};
  EXPECT_NEAR(upper_expectation(tree({0.25, 1.0}, 6, 3), sq), ex.value(), 1e-13);
}

TEST(LowerExpectation, TerminalSquare) {
  const PathFunctional sq = observe(*catalog("sq"), {1.0});
  EXPECT_EQ(lower_expectation(tree({0.0, 1.0}, 8), sq), 0.0);
  oracle::Expectimax ex{oracle::levels(0.25, 1.0, 3), 1.0 / 6, 6, false, terminal_sq};
  EXPECT_NEAR(lower_expectation(tree({0.25, 1.0}, 6, 3), sq), ex.value(), 1e-13);
  EXPECT_NEAR(ex.value(), 0.25, 1e-13);
}

TEST(UpperExpectation, MatchesRecursiveOracleOnPathFunctionals) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 10; ++i) {
    const Functional phi = random_functional(rng, 2);
    const PathFunctional f = observe(phi, {0.5, 1.0}) +
                             quadratic_variation([](double q) { return std::cos(2.0 * q); }, 1.0);
    oracle::Expectimax ex{oracle::levels(0.25, 1.0, 3), 0.25, 4, true,
                          [&](const std::vector<double>& path, double qv) {
                            const double x[2] = {path[2], path[4]};
                            return phi(std::span<const double>(x, 2)) + std::cos(2.0 * qv);
                          }};
    EXPECT_NEAR(upper_expectation(tree({0.25, 1.0}, 4, 3), f), ex.value(), 1e-12) << phi.source();
    ex.upper = false;
    EXPECT_NEAR(lower_expectation(tree({0.25, 1.0}, 4, 3), f), ex.value(), 1e-12) << phi.source();
  }
}

TEST(UpperExpectation, MonotoneInQvPicksTopVariance) {
  const PathFunctional f = quadratic_variation([](double q) { return std::tanh(q); }, 1.0);
  EXPECT_NEAR(upper_expectation(tree({0.25, 1.0}, 6, 4, 2.0), f), std::tanh(2.0), 1e-15);
  EXPECT_NEAR(lower_expectation(tree({0.25, 1.0}, 6, 4, 2.0), f), std::tanh(0.5), 1e-15);
}

TEST(UpperExpectation, StationaryIncrements) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 10; ++i) {
    const Functional phi = random_functional(rng, 1);
    // phi(B_{0.5 + 0.5} - B_{0.5}) with 4 steps in each half, against phi(B_{0.5}) with 4 steps.
    const PathFunctional late(
        [phi](const PathView& v) {
          const double x = v.b[8] - v.b[4];
          return phi(std::span<const double>(&x, 1));
        },
        phi.bound());
    const double a = upper_expectation(tree({0.25, 1.0}, 8, 2, 1.0), late);
    const double b = upper_expectation(tree({0.25, 1.0}, 4, 2, 0.5), observe(phi, {0.5}));
    EXPECT_NEAR(a, b, 1e-12) << phi.source();
  }
}

TEST(UpperExpectation, ZeroBandEvaluatesZeroPath) {
  const Functional phi = parse("cos(x1) + x2 * x2 + 0.5", 2, 10);
  const double zero[2] = {0.0, 0.0};
  EXPECT_EQ(upper_expectation(tree(VolatilityBand::totally_degenerate(), 6, 3), observe(phi, {0.5, 1.0})),
            phi(std::span<const double>(zero, 2)));
}

TEST(UpperExpectation, SublinearAxiomsOnRandomPairs) {
  for (const auto& t : run_axiom_suite(30, 99, 6, 3)) {
    EXPECT_EQ(t.passed, t.trials) << t.axiom << " worst " << t.worst;
  }
}

TEST(PathView, OffGridTimesAreRejected) {
  EXPECT_THROW((void)upper_expectation(tree({0.25, 1.0}, 4), observe(*catalog("cos1"), {0.3})),
               InvalidArgument);
  EXPECT_THROW((void)observe(*catalog("cos1"), {0.5, 1.0}), InvalidArgument);
}

TEST(PathState, QvAccumulatesControlVariance) {
  auto worst = std::make_shared<double>(0.0);
  const PathFunctional probe(
      [worst](const PathView& v) {
        double qv = 0.0;
        for (double s : v.sigma_sq) {
          EXPECT_GE(s, 0.0);
          qv += s * v.dt;
        }
        *worst = std::max(*worst, std::abs(qv - v.state.qv));
        return 0.0;
      },
      0.0);
  (void)upper_expectation(tree({0.25, 1.0}, 6, 3), probe);
  EXPECT_LE(*worst, 1e-15);
}

TEST(ConditionalValue, LeafLayerIsTheFunctional) {
  const TreeSpec spec = tree({0.25, 1.0}, 3);
  const PathFunctional f = observe(parse("x1 + 0.5 * x2 * x2", 2, 10), {1.0 / 3.0, 1.0});
  const LayerTable leaves = conditional_value(spec, f, 3, Mode::Upper, true);
  ASSERT_EQ(leaves.values.size(), 64u);
  ASSERT_EQ(leaves.states.size(), 64u);

  // Depth-first order: control level major, sign minor, per step.
  std::vector<double> expected;
  const double vols[2] = {0.5, 1.0};
  const double sq = std::sqrt(1.0 / 3.0);
  for (int l0 = 0; l0 < 2; ++l0)
    for (double s0 : {1.0, -1.0})
      for (int l1 = 0; l1 < 2; ++l1)
        for (double s1 : {1.0, -1.0})
          for (int l2 = 0; l2 < 2; ++l2)
            for (double s2 : {1.0, -1.0}) {
              const double b1 = vols[l0] * s0 * sq;
              const double b3 = b1 + vols[l1] * s1 * sq + vols[l2] * s2 * sq;
              expected.push_back(b1 + 0.5 * b3 * b3);
            }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_NEAR(leaves.values[i], expected[i], 1e-14) << i;
  }
}

TEST(ConditionalValue, TowerProperty) {
  std::mt19937_64 rng(43);
  const TreeSpec spec = tree({0.25, 1.0}, 6, 2);
  for (int i = 0; i < 5; ++i) {
    const PathFunctional f = observe(random_functional(rng, 2), {0.5, 1.0});
    const double root = upper_expectation(spec, f);
    EXPECT_EQ(conditional_value(spec, f, 0).values.front(), root);
    for (int k : {1, 3, 5}) {
      const LayerTable layer = conditional_value(spec, f, k);
      EXPECT_EQ(layer.values.size(), static_cast<std::size_t>(std::pow(4, k)));
      EXPECT_NEAR(fold_from_layer(spec, layer), root, 1e-13);
    }
  }
  EXPECT_THROW((void)conditional_value(spec, PathFunctional::constant(1.0), 7), InvalidArgument);
}

TEST(Oracle, AdaptiveMatchesDynamicProgram) {
  std::mt19937_64 rng(47);
  for (int m : {2, 4, 6}) {
    const TreeSpec spec = tree({0.25, 1.0}, m, 2);
    for (int i = 0; i < 4; ++i) {
      const PathFunctional f = observe(random_functional(rng, 2), {0.5, 1.0});
      const OracleReport o = enumerate_oracle_report(spec, f);
      EXPECT_NEAR(o.adaptive, upper_expectation(spec, f), 1e-12);
      EXPECT_LE(o.nonadaptive, o.adaptive + 1e-12);
      EXPECT_EQ(enumerate_oracle(spec, f), o.adaptive);
    }
  }
}

TEST(Oracle, MartingaleAndCaps) {
  const PathFunctional lin = observe(*catalog("lin"), {1.0});
  EXPECT_NEAR(enumerate_oracle(tree({0.25, 1.0}, 4), lin), 0.0, 1e-15);
  EXPECT_NEAR(upper_expectation(tree({0.25, 1.0}, 4), lin), 0.0, 1e-15);
  EXPECT_THROW((void)enumerate_oracle(tree({0.25, 1.0}, 9), lin), ConfigError);
  EXPECT_THROW((void)enumerate_oracle(tree({0.25, 1.0}, 4, 4), lin), ConfigError);
}

TEST(ProductSpace, BranchesIndependently) {
  TreeSpec spec = tree({0.25, 1.0}, 4);
  spec.product_space = true;
  const PathFunctional w2(
      [](const PathView& v) { return v.w.back() * v.w.back(); }, 10.0);
  EXPECT_NEAR(upper_expectation(spec, w2), 1.0, 1e-14);
  EXPECT_NEAR(lower_expectation(spec, w2), 1.0, 1e-14);
  const PathFunctional bw([](const PathView& v) { return v.b.back() * v.w.back(); }, 10.0);
  EXPECT_NEAR(upper_expectation(spec, bw), 0.0, 1e-14);
  const PathFunctional bracket([](const PathView& v) { return v.state.qv_bw; }, 1.0);
  EXPECT_EQ(upper_expectation(spec, bracket), 0.0);
}
