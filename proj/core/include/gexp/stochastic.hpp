#pragma once

#include <vector>

#include "gexp/phi_lang.hpp"
#include "gexp/scenario_tree.hpp"
#include "gexp/simple_process.hpp"

namespace gexp {

/// Path functionals of the Girsanov construction. All of them carry the
/// integrand h, so the tree accumulates int h dB, int h^2 d<B>, ... for it.

/// E(h)_T = exp(int h dB - 1/2 int h^2 d<B>).
[[nodiscard]] PathFunctional exp_martingale(const SimpleProcess& h);

/// prod_k exp(h_k dB_k) / cosh(h_k sigma_k sqrt(dt)): mean one under every
/// control, at every step.
[[nodiscard]] PathFunctional exp_martingale_normalized(const SimpleProcess& h);

/// B~ at step k of the viewed path: B_t - int_0^t h d<B>.
[[nodiscard]] double shifted_observation(const PathView& view, std::size_t k);

/// B + eps W at step k. Throws ConfigError outside a product-space tree.
[[nodiscard]] double perturbed_observation(const PathView& view, std::size_t k, double eps);

/// B~^eps = B^eps - int h d<B^eps> at step k, with <B^eps> = <B> + 2 eps <B,W> + eps^2 <W>.
[[nodiscard]] double shifted_perturbed_observation(const PathView& view, std::size_t k,
                                                   double eps, const SimpleProcess& h);

/// phi(B~_t1, ..., B~_tn).
[[nodiscard]] PathFunctional shifted_phi(const SimpleProcess& h, const Functional& phi,
                                         std::vector<double> times);

/// phi(B^eps_t1, ..., B^eps_tn).
[[nodiscard]] PathFunctional perturbed_phi(double eps, const Functional& phi,
                                           std::vector<double> times);

/// phi(B~^eps_t1, ..., B~^eps_tn).
[[nodiscard]] PathFunctional shifted_perturbed_phi(const SimpleProcess& h, double eps,
                                                   const Functional& phi,
                                                   std::vector<double> times);

/// J_eps = exp(alpha eps int h dB - beta eps^2 / 2 int h^2 d<B>).
[[nodiscard]] PathFunctional j_epsilon(double alpha, double beta, const SimpleProcess& h,
                                       double eps);

/// N^eps_T = exp(int h dB^eps - 1/2 int h^2 d<B^eps>).
[[nodiscard]] PathFunctional n_epsilon(const SimpleProcess& h, double eps);

/// exp(eps int h dW - eps^2 / 2 int h^2 dt), the W-factor of N^eps.
[[nodiscard]] PathFunctional w_exponential(const SimpleProcess& h, double eps);

/// exp(1/2 (1 + delta) int h^2 d<B>), the Novikov integrand.
[[nodiscard]] PathFunctional novikov_integrand(const SimpleProcess& h, double delta);

}  // namespace gexp
