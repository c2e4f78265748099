#include "supou/quadrature.hpp"

#include <cmath>
#include <string>

#include "supou/errors.hpp"

namespace supou {

namespace {

// (e^z - 1 - z) / z^2
double exp_remainder_ratio(double z) {
    if (std::fabs(z) < 0.1) {
        double term = 0.5;
        double sum = term;
        for (int k = 3; k < 40; ++k) {
            term *= z / k;
            sum += term;
            if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
        }
        return sum;
    }
    return (std::expm1(z) - z) / (z * z);
}

double expm1_ratio(double z) {
    if (z == 0.0) return 1.0;
    return std::expm1(z) / z;
}

struct IntegratedKernels {
    double delta;

    // A * (e^{A delta} - 1 - A delta) / A^3
    [[nodiscard]] double variance(double a) const {
        return delta * delta * exp_remainder_ratio(a * delta);
    }
    // A * (f_{h+1} - 2 f_h + f_{h-1}) / (2 A^3) with f_h = e^{A delta h}
    [[nodiscard]] double covariance(double a, int h) const {
        const double z = a * delta;
        const double ratio = expm1_ratio(z);
        return 0.5 * delta * delta * std::exp(z * (h - 1)) * ratio * ratio;
    }
};

}  // namespace

MomentValues quadrature_moments(const ParamVector& beta, ModelKind kind, double delta,
                                std::span<const int> lags, const QuadratureOptions& options) {
    validate(beta, kind);
    if (!(delta > 0.0)) throw DomainError("delta must be positive, got " + std::to_string(delta));
    for (int h : lags) {
        if (h < 0 || (kind != ModelKind::SupOU && h < 1)) {
            throw DomainError("invalid lag " + std::to_string(h));
        }
    }

    MomentValues out;
    const double inverse_a = integrate_against_pi(beta, [](double) { return 1.0; }, options);

    if (kind == ModelKind::SupOU) {
        out.mean = -beta.mu * inverse_a;
        out.variance = -beta.sigma2 * integrate_against_pi(beta, [](double) { return 0.5; }, options);
        for (int h : lags) {
            const double t = h * delta;
            out.acov.push_back(-beta.sigma2 * integrate_against_pi(
                                                  beta, [t](double a) { return 0.5 * std::exp(a * t); }, options));
        }
        return out;
    }

    const IntegratedKernels kernels{delta};
    const double mean = -delta * beta.mu * inverse_a;
    const double variance =
        -beta.sigma2 * integrate_against_pi(beta, [&](double a) { return kernels.variance(a); }, options);
    out.mean = mean;
    out.variance = kind == ModelKind::SupOUSV ? 3.0 * variance + 2.0 * mean * mean : variance;
    for (int h : lags) {
        out.acov.push_back(-beta.sigma2 * integrate_against_pi(
                                              beta, [&](double a) { return kernels.covariance(a, h); }, options));
    }
    return out;
}

}  // namespace supou
