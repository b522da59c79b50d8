#pragma once

#include <string>
#include <vector>

#include "gexp/phi_lang.hpp"
#include "gexp/scenario_tree.hpp"
#include "gexp/simple_process.hpp"
#include "gexp/uncertainty.hpp"

namespace gexp {

/// One evaluation of  E^[phi(B_t1..tn)] = E~[phi(B~_t1..tn)]  with E~[X] = E^[X E(h)_T].
struct GirsanovReport {
  double lhs = 0.0;
  double rhs = 0.0;
  int steps = 0;
  int sigma_levels = 0;
  double eps = 0.0;
  std::string engine = "tree";

  [[nodiscard]] double abs_error() const noexcept;
};

/// E^[phi(B~ at times) E(h)_T] on the given tree. h must have spec.steps steps.
[[nodiscard]] double tilted_expectation(const TreeSpec& spec, const SimpleProcess& h,
                                        const Functional& phi, const std::vector<double>& times);

struct IdentityOptions {
  int sigma_levels = 2;
  double t_final = 1.0;
  /// "tree", or "pde x tree" (left side by the PDE engine at the fine tier).
  std::string engine = "tree";
  /// Harness self-test: added to every right-hand side.
  double inject_bias = 0.0;
};

[[nodiscard]] std::vector<GirsanovReport> verify_identity(const Generator& gen,
                                                          const IntegrandSpec& h,
                                                          const Functional& phi,
                                                          const std::vector<double>& times,
                                                          const std::vector<int>& steps_list,
                                                          const IdentityOptions& options = {});

struct NovikovCertificate {
  double tree_value = 0.0;
  double closed_form_bound = 0.0;

  /// Both finite and consistent: condition (H) holds for this h.
  [[nodiscard]] bool certified() const noexcept;
};

/// tree value of E^[exp(1/2 (1 + delta) int h^2 d<B>)] against
/// exp(1/2 (1 + delta) |h|_inf^2 sigma_max^2 T).
[[nodiscard]] NovikovCertificate novikov_bound(const Generator& gen, const SimpleProcess& h,
                                               double delta, double t_final = 1.0,
                                               int sigma_levels = 2);

struct JepsRow {
  double eps = 0.0;
  double upper = 0.0;  // E^[J_eps]
  double lower = 0.0;  // -E^[-J_eps]
};

struct JepsSweep {
  std::vector<JepsRow> rows;
  double slope_upper = 0.0;  // least-squares slope of log|upper - 1| against log eps
  double slope_lower = 0.0;
};

/// Least-squares slope of log|value - 1| against log eps over rows with eps > 0
/// and a nonzero deviation.
[[nodiscard]] double loglog_slope(const std::vector<double>& eps,
                                  const std::vector<double>& deviation);

[[nodiscard]] JepsSweep jeps_sweep(const Generator& gen, const IntegrandSpec& h, double alpha,
                                   double beta, const std::vector<double>& eps_list, int steps,
                                   double t_final = 1.0, int sigma_levels = 2);

struct DegenerateRow {
  double eps = 0.0;
  double perturbed_lhs = 0.0;  // E-[phi(B^eps)]
  double perturbed_rhs = 0.0;  // E-[phi(B~^eps) N^eps_T]
  double step1 = 0.0;          // |perturbed_lhs - E^[phi(B)]|
  double step1_bound = 0.0;    // L_phi eps sum_i E-[|W_ti|]
  double step2 = 0.0;          // |perturbed_rhs - E~[phi(B~)]|

  [[nodiscard]] double identity_error() const noexcept;
};

struct DegenerateReport {
  std::vector<DegenerateRow> rows;  // one per eps, then eps = 0 last
  double lhs = 0.0;                 // E^[phi(B)]
  double rhs = 0.0;                 // E~[phi(B~)]
  double lipschitz = 0.0;
  double mean_abs_w = 0.0;  // sum_i E-[|W_ti|] on the tree
  int steps = 0;
  int sigma_levels = 0;
};

struct DegenerateOptions {
  int sigma_levels = 2;
  double t_final = 1.0;
  double inject_bias = 0.0;
};

/// Perturbation pipeline for a degenerate generator on a product-space tree.
[[nodiscard]] DegenerateReport degenerate_pipeline(const Generator& gen, const IntegrandSpec& h,
                                                   const Functional& phi,
                                                   const std::vector<double>& times,
                                                   const std::vector<double>& eps_list, int steps,
                                                   const DegenerateOptions& options = {});

}  // namespace gexp
