#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gexp/phi_lang.hpp"

namespace gexp {

/// The bundled acceptance experiments. Every tolerance and runtime limit is
/// fixed here; the runner and the acceptance test share this code.
struct HarnessOptions {
  /// Coarse PDE tier and shallower trees, for a fast smoke run.
  bool quick = false;
  /// Self-test hook: added to the right-hand side of every identity check.
  double inject_bias = 0.0;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;  // measured values against their tolerances
  double seconds = 0.0;
  double time_limit = 0.0;
};

using Criterion = std::function<CriterionResult(const HarnessOptions&)>;

/// All criteria in declaration order.
[[nodiscard]] std::vector<Criterion> acceptance_criteria();

[[nodiscard]] CriterionResult run_criterion(int id, const HarnessOptions& options);

/// Runs every criterion; `on_result` sees each result as it completes.
std::vector<CriterionResult> run_acceptance(
    const HarnessOptions& options,
    const std::function<void(const CriterionResult&)>& on_result = {});

/// Random arity-n expression over x1..xn (depth <= 3), rendered and re-parsed.
[[nodiscard]] Functional random_functional(std::mt19937_64& rng, int arity);

struct AxiomTally {
  std::string axiom;
  int passed = 0;
  int trials = 0;
  double worst = 0.0;  // largest violation seen (<= 0 means none)
};

/// Sublinear-expectation axioms on the scenario tree for `trials` random
/// functional pairs of (B_{T/2}, B_T), band [0.25, 1], T = 1, tolerance 1e-12.
[[nodiscard]] std::vector<AxiomTally> run_axiom_suite(int trials, std::uint64_t seed = 20240601,
                                                      int steps = 8, int sigma_levels = 2);

/// "PASS  3  cross-engine ...  (1.2 s / 120 s)  detail"
[[nodiscard]] std::string format_result(const CriterionResult& result);

}  // namespace gexp
