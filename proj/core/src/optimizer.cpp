#include "supou/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "supou/errors.hpp"

namespace supou::gmm {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kStepShrink = 0.2;

}  // namespace

void validate(const GmmConfig& config) {
    if (config.max_iterations < 1) throw DomainError("max_iterations must be positive");
    if (!(config.gradient_step > 0.0)) throw DomainError("gradient_step must be positive");
    if (!(config.objective_tolerance > 0.0)) throw DomainError("objective_tolerance must be positive");
    if (!(config.parameter_tolerance > 0.0)) throw DomainError("parameter_tolerance must be positive");
    if (config.restart_attempts < 0) throw DomainError("restart_attempts must be nonnegative");
    if (!(config.restart_radius > 0.0)) throw DomainError("restart_radius must be positive");
    if (!(config.ridge_scale >= 0.0)) throw DomainError("ridge_scale must be nonnegative");
}

std::vector<double> numerical_gradient(const ObjectiveFn& fn, std::span<const double> theta, double step,
                                       int* evaluations) {
    const std::size_t n = theta.size();
    std::vector<double> grad(n, 0.0);
    std::vector<double> probe(theta.begin(), theta.end());
    int evals = 0;
    double center = 0.0;
    bool have_center = false;
    for (std::size_t j = 0; j < n; ++j) {
        const double h = step * std::max(1.0, std::fabs(theta[j]));
        probe[j] = theta[j] + h;
        const double up = fn(probe);
        probe[j] = theta[j] - h;
        const double down = fn(probe);
        probe[j] = theta[j];
        evals += 2;
        if (std::isfinite(up) && std::isfinite(down)) {
            grad[j] = (up - down) / (2.0 * h);
            continue;
        }
        if (!have_center) {
            center = fn(probe);
            ++evals;
            have_center = true;
        }
        if (std::isfinite(up) && std::isfinite(center)) {
            grad[j] = (up - center) / h;
        } else if (std::isfinite(down) && std::isfinite(center)) {
            grad[j] = (center - down) / h;
        }
    }
    if (evaluations != nullptr) *evaluations += evals;
    return grad;
}

MinimizeResult minimize(const ObjectiveFn& fn, std::span<const double> theta0, const GmmConfig& config) {
    validate(config);
    const std::size_t n = theta0.size();
    MinimizeResult result;
    result.theta.assign(theta0.begin(), theta0.end());
    result.value = fn(result.theta);
    result.evaluations = 1;
    if (!std::isfinite(result.value) || n == 0) {
        result.converged = std::isfinite(result.value);
        return result;
    }

    const double floor = config.objective_tolerance * std::fabs(result.value);
    auto enough_progress = [&](double f_new, double f_old) {
        return std::fabs(f_new - f_old) > config.objective_tolerance * (std::fabs(f_old) + floor);
    };

    std::vector<double>& x = result.theta;
    double f = result.value;
    std::vector<double> g = numerical_gradient(fn, x, config.gradient_step, &result.evaluations);
    std::vector<double> h_inv(n * n, 0.0);
    std::vector<double> t(n), g_old(n), x_old(n), candidate(n), hy(n);

    double diagonal_scale = 0.0;
    bool fresh_reset = false;
    int gradcount = 1;
    int ilast = gradcount;
    std::size_t count = 0;
    bool hit_limit = false;
    do {
        ++result.iterations;
        if (ilast == gradcount) {
            if (!(diagonal_scale > 0.0)) {
                double gmax = 0.0;
                for (double v : g) gmax = std::max(gmax, std::fabs(v));
                diagonal_scale = gmax > 0.0 ? 1.0 / gmax : 1.0;
            }
            std::fill(h_inv.begin(), h_inv.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) h_inv[i * n + i] = diagonal_scale;
            fresh_reset = true;
        }
        x_old = x;
        g_old = g;
        double gradproj = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s -= h_inv[i * n + j] * g[j];
            t[i] = s;
            gradproj += s * g[i];
        }

        if (gradproj < 0.0) {
            double step = 1.0;
            bool accepted = false;
            double f_new = f;
            do {
                count = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    candidate[i] = x_old[i] + step * t[i];
                    if (std::fabs(candidate[i] - x_old[i]) <=
                        config.parameter_tolerance * (1.0 + std::fabs(x_old[i]))) {
                        ++count;
                    }
                }
                if (count < n) {
                    f_new = fn(candidate);
                    ++result.evaluations;
                    accepted = std::isfinite(f_new) && f_new <= f + gradproj * step * kArmijo;
                    if (!accepted) step *= kStepShrink;
                }
            } while (!(count == n || accepted));

            if (count < n) {
                const bool enough = enough_progress(f_new, f);
                x = candidate;
                f = f_new;
                if (!enough) count = n;
            }
            if (count < n) {
                g = numerical_gradient(fn, x, config.gradient_step, &result.evaluations);
                ++gradcount;
                double d1 = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    t[i] *= step;
                    g_old[i] = g[i] - g_old[i];
                    d1 += t[i] * g_old[i];
                }
                if (d1 > 0.0) {
                    if (fresh_reset) {
                        // Shanno-Phua: rescale the identity so the update is invariant to the objective's scale.
                        double yy = 0.0;
                        for (double v : g_old) yy += v * v;
                        if (yy > 0.0) {
                            diagonal_scale = d1 / yy;
                            for (std::size_t i = 0; i < n; ++i) h_inv[i * n + i] = diagonal_scale;
                        }
                        fresh_reset = false;
                    }
                    double d2 = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        double s = 0.0;
                        for (std::size_t j = 0; j < n; ++j) s += h_inv[i * n + j] * g_old[j];
                        hy[i] = s;
                        d2 += s * g_old[i];
                    }
                    d2 = 1.0 + d2 / d1;
                    for (std::size_t i = 0; i < n; ++i) {
                        for (std::size_t j = 0; j < n; ++j) {
                            h_inv[i * n + j] += (d2 * t[i] * t[j] - hy[i] * t[j] - t[i] * hy[j]) / d1;
                        }
                    }
                } else {
                    ilast = gradcount;
                }
            } else if (ilast < gradcount) {
                // No progress along the quasi-Newton direction: retry once from steepest descent.
                count = 0;
                ilast = gradcount;
            }
        } else {
            count = 0;
            if (ilast == gradcount) {
                count = n;
            } else {
                ilast = gradcount;
            }
        }

        if (result.iterations >= config.max_iterations) {
            hit_limit = !(count == n && ilast == gradcount);
            break;
        }
    } while (!(count == n && ilast == gradcount));

    result.value = f;
    result.converged = !hit_limit;
    return result;
}

}  // namespace supou::gmm
