#include "gexp/girsanov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gexp/errors.hpp"
#include "gexp/gheat_pde.hpp"
#include "gexp/stochastic.hpp"

namespace gexp {

double GirsanovReport::abs_error() const noexcept { return std::abs(lhs - rhs); }

double DegenerateRow::identity_error() const noexcept {
  return std::abs(perturbed_lhs - perturbed_rhs);
}

bool NovikovCertificate::certified() const noexcept {
  return std::isfinite(tree_value) && std::isfinite(closed_form_bound) &&
         tree_value <= closed_form_bound * (1.0 + 1e-12);
}

double tilted_expectation(const TreeSpec& spec, const SimpleProcess& h, const Functional& phi,
                          const std::vector<double>& times) {
  return upper_expectation(spec, shifted_phi(h, phi, times) * exp_martingale(h));
}

std::vector<GirsanovReport> verify_identity(const Generator& gen, const IntegrandSpec& h,
                                            const Functional& phi,
                                            const std::vector<double>& times,
                                            const std::vector<int>& steps_list,
                                            const IdentityOptions& options) {
  if (steps_list.empty()) throw InvalidArgument("verify_identity needs at least one step count");
  if (!std::is_sorted(steps_list.begin(), steps_list.end()) ||
      std::adjacent_find(steps_list.begin(), steps_list.end()) != steps_list.end()) {
    throw InvalidArgument("step counts must be strictly ascending");
  }
  const bool pde_lhs = options.engine == "pde x tree" || options.engine == "pde-tree";
  if (!pde_lhs && options.engine != "tree") {
    throw InvalidArgument("unknown engine '" + options.engine + "' (tree or pde-tree)");
  }

  std::vector<GirsanovReport> out;
  const PathFunctional lhs_functional = observe(phi, times);
  for (int m : steps_list) {
    TreeSpec spec;
    spec.steps = m;
    spec.t_final = options.t_final;
    spec.band = gen.band();
    spec.sigma_levels = options.sigma_levels;
    spec.validate();
    const SimpleProcess hm = h.sample(m);

    GirsanovReport r;
    r.steps = m;
    r.sigma_levels = options.sigma_levels;
    r.engine = pde_lhs ? "pde x tree" : "tree";
    r.lhs = pde_lhs ? expect_cylinder(gen, phi, times, Accuracy::Fine)
                    : upper_expectation(spec, lhs_functional);
    r.rhs = tilted_expectation(spec, hm, phi, times) + options.inject_bias;
    out.push_back(r);
  }
  return out;
}

NovikovCertificate novikov_bound(const Generator& gen, const SimpleProcess& h, double delta,
                                 double t_final, int sigma_levels) {
  if (!(delta > 0.0)) throw InvalidArgument("novikov_bound: delta must be > 0");
  TreeSpec spec;
  spec.steps = h.steps();
  spec.t_final = t_final;
  spec.band = gen.band();
  spec.sigma_levels = sigma_levels;

  NovikovCertificate c;
  c.tree_value = upper_expectation(spec, novikov_integrand(h, delta));
  const double sup = h.sup_norm();
  c.closed_form_bound =
      std::exp(0.5 * (1.0 + delta) * sup * sup * gen.band().sigma_max_sq() * t_final);
  return c;
}

double loglog_slope(const std::vector<double>& eps, const std::vector<double>& deviation) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < eps.size() && i < deviation.size(); ++i) {
    if (!(eps[i] > 0.0) || !(deviation[i] > 0.0)) continue;
    const double x = std::log(eps[i]);
    const double y = std::log(deviation[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / denom;
}

JepsSweep jeps_sweep(const Generator& gen, const IntegrandSpec& h, double alpha, double beta,
                     const std::vector<double>& eps_list, int steps, double t_final,
                     int sigma_levels) {
  if (eps_list.empty()) throw InvalidArgument("jeps_sweep needs at least one eps");
  TreeSpec spec;
  spec.steps = steps;
  spec.t_final = t_final;
  spec.band = gen.band();
  spec.sigma_levels = sigma_levels;
  spec.validate();
  const SimpleProcess hm = h.sample(steps);

  JepsSweep sweep;
  std::vector<double> eps, dev_upper, dev_lower;
  for (double e : eps_list) {
    if (!(e >= 0.0)) throw InvalidArgument("jeps_sweep: eps must be >= 0");
    const PathFunctional j = j_epsilon(alpha, beta, hm, e);
    JepsRow row;
    row.eps = e;
    row.upper = upper_expectation(spec, j);
    row.lower = lower_expectation(spec, j);
    sweep.rows.push_back(row);
    eps.push_back(e);
    dev_upper.push_back(std::abs(row.upper - 1.0));
    dev_lower.push_back(std::abs(row.lower - 1.0));
  }
  sweep.slope_upper = loglog_slope(eps, dev_upper);
  sweep.slope_lower = loglog_slope(eps, dev_lower);
  return sweep;
}

DegenerateReport degenerate_pipeline(const Generator& gen, const IntegrandSpec& h,
                                     const Functional& phi, const std::vector<double>& times,
                                     const std::vector<double>& eps_list, int steps,
                                     const DegenerateOptions& options) {
  if (is_nondegenerate(gen).nondegenerate) {
    throw InvalidArgument("degenerate_pipeline expects a degenerate generator (sigma_min^2 = 0)");
  }
  for (double e : eps_list) {
    if (!(e > 0.0)) throw InvalidArgument("degenerate_pipeline: eps values must be > 0");
  }

  TreeSpec spec;
  spec.steps = steps;
  spec.t_final = options.t_final;
  spec.band = gen.band();
  spec.sigma_levels = options.sigma_levels;
  spec.product_space = true;
  spec.validate();
  const SimpleProcess hm = h.sample(steps);

  DegenerateReport report;
  report.steps = steps;
  report.sigma_levels = options.sigma_levels;
  report.lhs = upper_expectation(spec, observe(phi, times));
  report.rhs = upper_expectation(spec, shifted_phi(hm, phi, times) * exp_martingale(hm));

  const PathFunctional abs_w(
      [times](const PathView& v) {
        double s = 0.0;
        for (double t : times) s += std::abs(v.w[v.index_of(t)]);
        return s;
      },
      std::numeric_limits<double>::infinity());
  report.mean_abs_w = upper_expectation(spec, abs_w);

  // Largest coordinate any observation can reach on this tree.
  const double max_eps = eps_list.empty() ? 0.0 : *std::max_element(eps_list.begin(), eps_list.end());
  const double vol = std::sqrt(gen.band().sigma_max_sq());
  const double reach = (vol + max_eps) * std::sqrt(spec.dt()) * steps +
                       hm.sup_norm() * (gen.band().sigma_max_sq() + max_eps * max_eps) *
                           options.t_final;
  report.lipschitz = lipschitz_bound(phi, reach);

  for (double e : eps_list) {
    DegenerateRow row;
    row.eps = e;
    row.perturbed_lhs = upper_expectation(spec, perturbed_phi(e, phi, times));
    const double rhs =
        upper_expectation(spec, shifted_perturbed_phi(hm, e, phi, times) * n_epsilon(hm, e));
    row.perturbed_rhs = rhs + options.inject_bias;
    row.step1 = std::abs(row.perturbed_lhs - report.lhs);
    row.step1_bound = report.lipschitz * e * report.mean_abs_w;
    row.step2 = std::abs(rhs - report.rhs);
    report.rows.push_back(row);
  }

  DegenerateRow base;
  base.perturbed_lhs = report.lhs;
  base.perturbed_rhs = report.rhs + options.inject_bias;
  report.rows.push_back(base);
  return report;
}

}  // namespace gexp
