#include "supou/initializer.hpp"

#include <cmath>
#include <string>

#include "supou/errors.hpp"
#include "supou/stats.hpp"

namespace supou::gmm {

namespace {

constexpr double kFallbackShape = 3.0;
constexpr double kMaxRate = 1e12;

struct LatentMoments {
    double mean;
    double var;
    double rho1;
    double rho2;
};

// Moments of the latent supOU process on the observation grid. For integrated and SV
// data, V_n is treated as delta * X_{n delta}.
LatentMoments latent_moments(std::span<const double> data, const MomentConditionSet& conditions) {
    const double delta = conditions.delta;
    switch (conditions.kind) {
        case ModelKind::SupOU:
            return {stats::sample_mean(data), stats::sample_var(data), stats::sample_acf(data, 1),
                    stats::sample_acf(data, 2)};
        case ModelKind::IntegratedSupOU:
            return {stats::sample_mean(data) / delta, stats::sample_var(data) / (delta * delta),
                    stats::sample_acf(data, 1), stats::sample_acf(data, 2)};
        case ModelKind::SupOUSV: {
            std::vector<double> z(data.size());
            for (std::size_t i = 0; i < z.size(); ++i) z[i] = data[i] * data[i];
            const double m = stats::sample_mean(z);
            const double var_z = stats::sample_var(z);
            double var_v = (var_z - 2.0 * m * m) / 3.0;
            if (!(var_v > 0.0)) var_v = var_z / 3.0;
            return {m / delta, var_v / (delta * delta), stats::sample_acov(z, 1) / var_v,
                    stats::sample_acov(z, 2) / var_v};
        }
    }
    throw DomainError("unknown model kind");
}

}  // namespace

ParamVector closed_form_init(double sample_mean, double sample_var, double rho_h1, double rho_h2, double h1,
                             double h2) {
    if (!(0.0 < rho_h2 && rho_h2 < rho_h1 && rho_h1 < 1.0)) {
        throw InitializationError("closed-form start needs 0 < rho(h2) < rho(h1) < 1, got rho(h1) = " +
                                  std::to_string(rho_h1) + ", rho(h2) = " + std::to_string(rho_h2));
    }
    if (!(0.0 < h1 && h1 < h2)) throw InitializationError("closed-form start needs 0 < h1 < h2");
    if (!(sample_var > 0.0) || !std::isfinite(sample_mean)) {
        throw InitializationError("closed-form start needs a finite mean and a positive variance");
    }

    // With y = -B the root solves phi(y) = (1 + y h2)^c - 1 - y h1 = 0, phi concave, phi(0) = 0.
    const double c = std::log(rho_h1) / std::log(rho_h2);
    if (!(c * h2 > h1)) {
        throw InitializationError("autocorrelations at h1 and h2 admit no Gamma mean-reversion law");
    }
    auto phi = [&](double y) { return std::expm1(c * std::log1p(y * h2)) - y * h1; };

    double lo = 0.0;
    double hi = 1.0 / h2;
    while (phi(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > kMaxRate) throw InitializationError("no negative root for B in the closed-form start");
    }
    for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) > 0.0 ? lo : hi) = mid;
    }
    const double y = 0.5 * (lo + hi);
    const double B = -y;
    const double alpha = 1.0 - std::log(rho_h1) / std::log1p(y * h1);
    return ParamVector{-sample_mean * B * (alpha - 1.0), -2.0 * sample_var * B * (alpha - 1.0), alpha, B};
}

ParamVector initial_guess(std::span<const double> data, const MomentConditionSet& conditions) {
    validate(conditions);
    if (data.size() < 4) throw InitializationError("too few observations to derive a start value");
    const double var = stats::sample_var(data);
    if (!(var > 0.0) || !std::isfinite(var)) {
        throw InitializationError("data have zero or non-finite variance");
    }
    const LatentMoments mom = latent_moments(data, conditions);
    if (!(mom.mean > 0.0)) {
        throw InitializationError("data mean must be positive for the log-scale parameterization");
    }
    const double delta = conditions.delta;
    try {
        const ParamVector p = closed_form_init(mom.mean, mom.var, mom.rho1, mom.rho2, delta, 2.0 * delta);
        if (std::isfinite(p.mu) && std::isfinite(p.sigma2) && std::isfinite(p.alpha_pi) && p.alpha_pi > 1.0 &&
            p.alpha_pi < 1e3) {
            return p;
        }
    } catch (const InitializationError&) {
    }
    // rho(delta) = (1 - B delta)^{1 - alpha} with alpha = 3
    double B = -0.1 / delta;
    if (mom.rho1 > 0.0 && mom.rho1 < 1.0) B = (1.0 - 1.0 / std::sqrt(mom.rho1)) / delta;
    const double a1 = kFallbackShape - 1.0;
    return ParamVector{-mom.mean * B * a1, -2.0 * mom.var * B * a1, kFallbackShape, B};
}

}  // namespace supou::gmm
