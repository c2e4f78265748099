#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace supou::gmm {

struct GmmConfig {
    int max_iterations = 500;
    /// Relative central-difference step: h_j = gradient_step * max(1, |theta_j|).
    double gradient_step = 1e-6;
    /// Relative decrease of the objective below which a step counts as no progress.
    double objective_tolerance = 1e-10;
    /// Coordinate changes below parameter_tolerance * (1 + |theta_j|) count as no movement.
    double parameter_tolerance = 1e-12;
    int restart_attempts = 3;
    /// Half-width of the uniform log-scale perturbation used for restarts.
    double restart_radius = 0.5;
    double ridge_scale = 1e-10;
    std::uint64_t seed = 0;
};

void validate(const GmmConfig& config);

using ObjectiveFn = std::function<double(std::span<const double>)>;

struct MinimizeResult {
    std::vector<double> theta;
    bool converged = false;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
};

/// Central differences; falls back to a one-sided difference next to non-finite values.
[[nodiscard]] std::vector<double> numerical_gradient(const ObjectiveFn& fn, std::span<const double> theta,
                                                     double step, int* evaluations = nullptr);

/// Quasi-Newton (BFGS) unconstrained local minimization with backtracking line search.
/// The inverse Hessian starts as a scaled identity (1 / max abs gradient, then the
/// Shanno-Phua factor after the first step), so the iterates do not depend on the
/// objective's overall scale.
///
/// Terminates converged when a steepest-descent step taken right after a reset of the
/// inverse Hessian approximation makes no progress; hitting max_iterations or a
/// non-finite objective at the start gives converged == false. Never throws for
/// non-finite objective values.
[[nodiscard]] MinimizeResult minimize(const ObjectiveFn& fn, std::span<const double> theta0,
                                      const GmmConfig& config);

}  // namespace supou::gmm
