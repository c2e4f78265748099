#pragma once

#include <span>

#include "supou/estimator.hpp"
#include "supou/params.hpp"

namespace supou::gmm {

/// Inverts the supOU moment map (mean, variance, rho(h1), rho(h2)) exactly.
///
/// B is the unique negative root of (1 - B h2)^c + B h1 - 1 with
/// c = log rho(h1) / log rho(h2), located by bisection; alpha_pi, mu and sigma2 follow
/// by back-substitution. Throws InitializationError unless 0 < rho2 < rho1 < 1,
/// 0 < h1 < h2 and a negative root exists.
[[nodiscard]] ParamVector closed_form_init(double sample_mean, double sample_var, double rho_h1, double rho_h2,
                                           double h1, double h2);

/// Data-driven start for two_step_gmm: closed_form_init on the empirical moments
/// (translated to the latent supOU scale for the integrated and SV models), falling
/// back to alpha_pi = 3 with mean and variance matched. Throws InitializationError
/// for degenerate data (e.g. zero variance or nonpositive mean).
[[nodiscard]] ParamVector initial_guess(std::span<const double> data, const MomentConditionSet& conditions);

}  // namespace supou::gmm
