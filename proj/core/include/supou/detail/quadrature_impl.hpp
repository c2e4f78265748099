#pragma once

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "supou/errors.hpp"

namespace supou {

// With A = B r and r ~ Gamma(alpha, 1),
//   int K(A) pi(dA) = (1 / B) int_0^inf [A K(A)] r^(alpha - 2) e^-r / Gamma(alpha) dr.
// On [0, 1] the substitution r = s^(1 / (alpha - 1)) absorbs r^(alpha - 2) when alpha < 2,
// and tanh-sinh handles whatever power cusp remains at 0.
template <class ScaledKernel>
double integrate_against_pi(const ParamVector& beta, ScaledKernel&& scaled_kernel,
                            const QuadratureOptions& options) {
    using Integrator = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double alpha = beta.alpha_pi;
    const double log_gamma = std::lgamma(alpha);
    // head and tail errors add up, so each piece gets a share of the target
    const double piece_tolerance = 0.25 * options.relative_tolerance;

    auto density_part = [&](double r) {
        if (r <= 0.0) return 0.0;
        return std::exp((alpha - 2.0) * std::log(r) - r - log_gamma);
    };

    double err_head = 0.0;
    double l1_head = 0.0;
    double head = 0.0;
    boost::math::quadrature::tanh_sinh<double> endpoint_rule(options.max_depth > 15 ? 15 : options.max_depth);
    if (alpha < 2.0) {
        const double p = 1.0 / (alpha - 1.0);
        auto f = [&](double s) -> double {
            const double r = std::pow(s, p);
            return p * scaled_kernel(beta.B * r) * std::exp(-r - log_gamma);
        };
        head = endpoint_rule.integrate(f, 0.0, 1.0, piece_tolerance, &err_head, &l1_head);
    } else {
        auto f = [&](double r) -> double { return scaled_kernel(beta.B * r) * density_part(r); };
        head = endpoint_rule.integrate(f, 0.0, 1.0, piece_tolerance, &err_head, &l1_head);
    }

    double err_tail = 0.0;
    double l1_tail = 0.0;
    auto g = [&](double r) { return scaled_kernel(beta.B * r) * density_part(r); };
    const double tail = Integrator::integrate(g, 1.0, std::numeric_limits<double>::infinity(),
                                              options.max_depth, piece_tolerance, &err_tail,
                                              &l1_tail);

    const double total = head + tail;
    const double error = err_head + err_tail;
    const double achieved = error / std::fabs(total);
    if (!std::isfinite(total) || achieved > options.relative_tolerance) {
        throw NumericalError("quadrature did not reach the requested tolerance", achieved);
    }
    return total / beta.B;
}

}  // namespace supou
