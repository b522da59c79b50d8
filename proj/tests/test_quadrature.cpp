#include <gtest/gtest.h>

#include <cmath>

#include "gexp/quadrature.hpp"
#include "oracles.hpp"

using namespace gexp;

TEST(GaussHermite, WeightsAndMoments) {
  for (int n : {2, 5, 20, 96}) {
    const auto rule = gauss_hermite(n);
    ASSERT_EQ(rule.size(), static_cast<std::size_t>(n));
    double w = 0.0, m2 = 0.0;
    for (const auto& q : rule) {
      w += q.w;
      m2 += q.w * q.x * q.x;
    }
    EXPECT_NEAR(w, std::sqrt(M_PI), 1e-12) << n;
    EXPECT_NEAR(m2, std::sqrt(M_PI) / 2.0, 1e-12) << n;
  }
  const auto two = gauss_hermite(2);
  EXPECT_NEAR(std::abs(two[0].x), 1.0 / std::sqrt(2.0), 1e-14);
}

TEST(NormalExpectation, MatchesSimpson) {
  EXPECT_NEAR(normal_expectation([](double x) { return x * x * x * x; }, 1.0), 3.0, 1e-11);
  EXPECT_NEAR(normal_expectation([](double x) { return std::cos(x); }, 1.0), std::exp(-0.5), 1e-13);
  const auto clipped = [](double x) { return std::min(x * x, 4.0); };
  EXPECT_NEAR(normal_expectation(clipped, 0.8), oracle::normal_simpson(clipped, 0.8), 2e-4);
  EXPECT_NEAR(normal_expectation([](double x) { return x + 2.0; }, 0.0), 2.0, 1e-14);
}
