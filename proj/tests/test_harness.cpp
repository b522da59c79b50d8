#include <gtest/gtest.h>

#include "gexp/errors.hpp"
#include "gexp/harness.hpp"

using namespace gexp;

TEST(Harness, TenCriteriaInOrder) {
  EXPECT_EQ(acceptance_criteria().size(), 10u);
  EXPECT_THROW((void)run_criterion(0, {}), InvalidArgument);
  EXPECT_THROW((void)run_criterion(11, {}), InvalidArgument);
}

TEST(Harness, InjectedBiasFailsIdentityChecks) {
  HarnessOptions opt;
  opt.quick = true;
  opt.inject_bias = 0.1;
  for (int id : {6, 7, 10}) {
    const CriterionResult r = run_criterion(id, opt);
    EXPECT_FALSE(r.passed) << format_result(r);
    EXPECT_EQ(format_result(r).rfind("FAIL", 0), 0u);
  }
  opt.inject_bias = 0.0;
  for (int id : {6, 7, 10}) {
    const CriterionResult r = run_criterion(id, opt);
    EXPECT_TRUE(r.passed) << format_result(r);
  }
}

TEST(Harness, FormatCarriesTimingAndDetail) {
  CriterionResult r;
  r.id = 4;
  r.name = "variance envelope";
  r.passed = true;
  r.seconds = 1.25;
  r.time_limit = 60;
  r.detail = "ok";
  const std::string line = format_result(r);
  EXPECT_EQ(line.rfind("PASS  4", 0), 0u) << line;
  EXPECT_NE(line.find("(1.2 s / 60 s)"), std::string::npos) << line;
  EXPECT_NE(line.find("ok"), std::string::npos);
}

TEST(Harness, AxiomSuiteRejectsOddSteps) {
  EXPECT_THROW((void)run_axiom_suite(1, 1, 5, 2), InvalidArgument);
  EXPECT_THROW((void)run_axiom_suite(0), InvalidArgument);
}
