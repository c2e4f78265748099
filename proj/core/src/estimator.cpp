#include "supou/estimator.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "supou/errors.hpp"
#include "supou/initializer.hpp"
#include "supou/moments.hpp"
#include "supou/simulator.hpp"

namespace supou::gmm {

namespace {

constexpr std::uint64_t kRestartStream = 11;

double observable(ModelKind kind, double x) { return kind == ModelKind::SupOUSV ? x * x : x; }

std::vector<double> window_moments(std::span<const double> window, const std::vector<double>& targets,
                                   const MomentConditionSet& conditions) {
    const double z0 = observable(conditions.kind, window[0]);
    std::vector<double> f(conditions.dimension());
    f[0] = z0 - targets[0];
    f[1] = z0 * z0 - targets[1];
    for (std::size_t j = 0; j < conditions.lags.size(); ++j) {
        const double zh = observable(conditions.kind, window[static_cast<std::size_t>(conditions.lags[j])]);
        f[2 + j] = z0 * zh - targets[2 + j];
    }
    return f;
}

std::vector<double> checked_window_moments(std::span<const double> window, const ParamVector& beta,
                                           const MomentConditionSet& conditions, ModelKind expected) {
    validate(conditions);
    if (conditions.kind != expected) throw DomainError("moment conditions are for a different model kind");
    const auto len = static_cast<std::size_t>(conditions.max_lag()) + 1;
    if (window.size() != len) {
        throw DomainError("window must hold " + std::to_string(len) + " observations, got " +
                          std::to_string(window.size()));
    }
    return window_moments(window, moment_targets(beta, conditions), conditions);
}

void require_positive_definite(const Eigen::MatrixXd& w) {
    if (w.rows() != w.cols()) throw DomainError("weighting matrix must be square");
    if (!w.isApprox(w.transpose(), 1e-10)) throw DomainError("weighting matrix must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(w);
    if (llt.info() != Eigen::Success) throw DomainError("weighting matrix must be positive definite");
}

double unchecked_quadratic_form(std::span<const double> g, const Eigen::MatrixXd& w) {
    const Eigen::Map<const Eigen::VectorXd> v(g.data(), static_cast<Eigen::Index>(g.size()));
    return v.dot(w * v);
}

}  // namespace

void validate(const MomentConditionSet& conditions) {
    if (conditions.lags.empty()) throw DomainError("moment conditions need at least one lag");
    for (std::size_t i = 0; i < conditions.lags.size(); ++i) {
        if (conditions.lags[i] < 1) throw DomainError("lags must be positive integers");
        if (i > 0 && conditions.lags[i] <= conditions.lags[i - 1]) {
            throw DomainError("lags must be strictly increasing");
        }
    }
    if (conditions.max_lag() < 2) throw DomainError("the largest lag must be at least 2");
    if (!(conditions.delta > 0.0)) throw DomainError("delta must be positive");
}

MomentConditionSet default_conditions(ModelKind kind, double delta) {
    if (kind == ModelKind::SupOU) return MomentConditionSet{kind, {1, 2, 4, 5}, delta};
    return MomentConditionSet{kind, {1, 2, 3, 4, 5}, delta};
}

std::vector<double> moment_targets(const ParamVector& beta, const MomentConditionSet& conditions) {
    validate(beta, conditions.kind);
    const double delta = conditions.delta;
    std::vector<double> t(conditions.dimension());
    switch (conditions.kind) {
        case ModelKind::SupOU: {
            const double mean = supou_mean(beta);
            const double var = supou_var(beta);
            t[0] = mean;
            t[1] = mean * mean + var;
            for (std::size_t j = 0; j < conditions.lags.size(); ++j) {
                t[2 + j] = mean * mean + var * supou_acf(beta, conditions.lags[j] * delta);
            }
            break;
        }
        case ModelKind::IntegratedSupOU: {
            const double mean = intsupou_mean(beta, delta);
            t[0] = mean;
            t[1] = mean * mean + intsupou_var(beta, delta);
            for (std::size_t j = 0; j < conditions.lags.size(); ++j) {
                t[2 + j] = mean * mean + intsupou_acov(beta, delta, conditions.lags[j]);
            }
            break;
        }
        case ModelKind::SupOUSV: {
            // E Y^4 = var(Y^2) + (E Y^2)^2 = 3 var(V) + 3 E(V)^2
            const double mean = sv_sqret_mean(beta, delta);
            t[0] = mean;
            t[1] = 3.0 * intsupou_var(beta, delta) + 3.0 * mean * mean;
            for (std::size_t j = 0; j < conditions.lags.size(); ++j) {
                t[2 + j] = mean * mean + sv_sqret_acov(beta, delta, conditions.lags[j]);
            }
            break;
        }
    }
    return t;
}

std::vector<double> moment_function_supou(std::span<const double> window, const ParamVector& beta,
                                          const MomentConditionSet& conditions) {
    return checked_window_moments(window, beta, conditions, ModelKind::SupOU);
}

std::vector<double> moment_function_int(std::span<const double> window, const ParamVector& beta,
                                        const MomentConditionSet& conditions) {
    return checked_window_moments(window, beta, conditions, ModelKind::IntegratedSupOU);
}

std::vector<double> moment_function_sv(std::span<const double> window, const ParamVector& beta,
                                       const MomentConditionSet& conditions) {
    return checked_window_moments(window, beta, conditions, ModelKind::SupOUSV);
}

std::vector<double> moment_function(std::span<const double> window, const ParamVector& beta,
                                    const MomentConditionSet& conditions) {
    return checked_window_moments(window, beta, conditions, conditions.kind);
}

EmpiricalProducts empirical_products(std::span<const double> data, const MomentConditionSet& conditions) {
    validate(conditions);
    const auto m = static_cast<std::size_t>(conditions.max_lag());
    if (data.size() <= m) {
        throw InsufficientDataError("need more than " + std::to_string(m) + " observations, got " +
                                    std::to_string(data.size()));
    }
    const std::size_t n = data.size() - m;
    EmpiricalProducts out;
    out.n_used = n;
    out.averages.assign(conditions.dimension(), 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        const double z0 = observable(conditions.kind, data[t]);
        out.averages[0] += z0;
        out.averages[1] += z0 * z0;
        for (std::size_t j = 0; j < conditions.lags.size(); ++j) {
            out.averages[2 + j] += z0 * observable(conditions.kind, data[t + static_cast<std::size_t>(conditions.lags[j])]);
        }
    }
    for (double& v : out.averages) v /= static_cast<double>(n);
    return out;
}

std::vector<double> sample_moments(const EmpiricalProducts& products, const ParamVector& beta,
                                   const MomentConditionSet& conditions) {
    const std::vector<double> targets = moment_targets(beta, conditions);
    if (targets.size() != products.averages.size()) throw DomainError("moment dimension mismatch");
    std::vector<double> g(targets.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = products.averages[i] - targets[i];
    return g;
}

std::vector<double> sample_moments(std::span<const double> data, const ParamVector& beta,
                                   const MomentConditionSet& conditions) {
    validate(conditions);
    const auto m = static_cast<std::size_t>(conditions.max_lag());
    if (data.size() <= m) {
        throw InsufficientDataError("need more than " + std::to_string(m) + " observations, got " +
                                    std::to_string(data.size()));
    }
    const std::vector<double> targets = moment_targets(beta, conditions);
    const std::size_t n = data.size() - m;
    std::vector<double> g(conditions.dimension(), 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        const auto f = window_moments(data.subspan(t, m + 1), targets, conditions);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += f[i];
    }
    for (double& v : g) v /= static_cast<double>(n);
    return g;
}

double quadratic_form(std::span<const double> g, const WeightingMatrix& weighting) {
    require_positive_definite(weighting.entries);
    if (static_cast<std::size_t>(weighting.entries.rows()) != g.size()) {
        throw DomainError("weighting matrix size does not match the moment dimension");
    }
    return unchecked_quadratic_form(g, weighting.entries);
}

double objective(std::span<const double> data, const ParamVector& beta, const WeightingMatrix& weighting,
                 const MomentConditionSet& conditions) {
    const auto g = sample_moments(empirical_products(data, conditions), beta, conditions);
    return quadratic_form(g, weighting);
}

Eigen::MatrixXd moment_covariance(std::span<const double> data, const ParamVector& beta1,
                                  const MomentConditionSet& conditions) {
    validate(conditions);
    const auto m = static_cast<std::size_t>(conditions.max_lag());
    if (data.size() <= m) {
        throw InsufficientDataError("need more than " + std::to_string(m) + " observations, got " +
                                    std::to_string(data.size()));
    }
    const std::vector<double> targets = moment_targets(beta1, conditions);
    const auto d = static_cast<Eigen::Index>(conditions.dimension());
    const std::size_t n = data.size() - m;
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t t = 0; t < n; ++t) {
        const auto f = window_moments(data.subspan(t, m + 1), targets, conditions);
        const Eigen::Map<const Eigen::VectorXd> v(f.data(), d);
        s.selfadjointView<Eigen::Lower>().rankUpdate(v);
    }
    s = s.selfadjointView<Eigen::Lower>();
    return s / static_cast<double>(n);
}

WeightingMatrix estimate_weighting(std::span<const double> data, const ParamVector& beta1,
                                   const MomentConditionSet& conditions, double ridge_scale) {
    if (!(ridge_scale >= 0.0)) throw DomainError("ridge_scale must be nonnegative");
    Eigen::MatrixXd s = moment_covariance(data, beta1, conditions);
    const auto d = s.rows();
    s.diagonal().array() += ridge_scale * s.trace() / static_cast<double>(d);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    if (eig.info() != Eigen::Success) throw SingularWeightingError("eigen decomposition of S_hat failed");
    const Eigen::VectorXd lambda = eig.eigenvalues();
    const double largest = lambda.maxCoeff();
    if (!std::isfinite(largest) || !(largest > 0.0) ||
        !(lambda.minCoeff() > 64.0 * std::numeric_limits<double>::epsilon() * largest)) {
        throw SingularWeightingError("S_hat is singular up to numerical precision (smallest eigenvalue " +
                                     std::to_string(lambda.minCoeff()) + ", largest " + std::to_string(largest) +
                                     ")");
    }
    const Eigen::MatrixXd& v = eig.eigenvectors();
    Eigen::MatrixXd inverse = v * lambda.cwiseInverse().asDiagonal() * v.transpose();
    inverse = 0.5 * (inverse + inverse.transpose()).eval();
    return WeightingMatrix{std::move(inverse)};
}

std::array<double, 4> transform(const ParamVector& beta) {
    if (!(beta.mu > 0.0) || !(beta.sigma2 > 0.0) || !(beta.alpha_pi > 1.0) || !(beta.B < 0.0) ||
        !std::isfinite(beta.mu) || !std::isfinite(beta.sigma2) || !std::isfinite(beta.alpha_pi) ||
        !std::isfinite(beta.B)) {
        throw DomainError("transform needs mu > 0, sigma2 > 0, alpha_pi > 1 and B < 0");
    }
    return {std::log(beta.mu), std::log(beta.sigma2), std::log(beta.alpha_pi - 1.0), std::log(-beta.B)};
}

ParamVector untransform(std::span<const double> theta) {
    if (theta.size() != 4) throw DomainError("parameter transform expects four coordinates");
    return ParamVector{std::exp(theta[0]), std::exp(theta[1]), 1.0 + std::exp(theta[2]), -std::exp(theta[3])};
}

GmmResult two_step_gmm(std::span<const double> data, const MomentConditionSet& conditions,
                       const GmmConfig& config, std::optional<ParamVector> start) {
    validate(conditions);
    validate(config);
    const EmpiricalProducts products = empirical_products(data, conditions);
    const ParamVector init = start ? *start : initial_guess(data, conditions);
    const std::array<double, 4> theta_init = transform(init);

    auto make_objective = [&](Eigen::MatrixXd weighting) -> ObjectiveFn {
        return [&products, &conditions, weighting = std::move(weighting)](std::span<const double> theta) {
            const ParamVector beta = untransform(theta);
            try {
                const auto g = sample_moments(products, beta, conditions);
                const double value = unchecked_quadratic_form(g, weighting);
                return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
            } catch (const DomainError&) {
                return std::numeric_limits<double>::infinity();
            }
        };
    };

    GmmResult result;
    result.kind = conditions.kind;
    result.lags = conditions.lags;
    result.delta = conditions.delta;
    result.start = init;
    result.n_used = products.n_used;

    const auto d = conditions.dimension();
    const MinimizeResult step1 = minimize(make_objective(WeightingMatrix::identity(d).entries), theta_init, config);
    result.step1_estimate = untransform(step1.theta);
    result.step1_objective = step1.value;
    result.converged_step1 = step1.converged;

    result.weighting = estimate_weighting(data, result.step1_estimate, conditions, config.ridge_scale);
    const ObjectiveFn second = make_objective(result.weighting.entries);

    sim::Engine engine(sim::derive_seed(config.seed, kRestartStream));
    std::uniform_real_distribution<double> jitter(-config.restart_radius, config.restart_radius);
    auto perturbed_start = [&] {
        std::vector<double> theta(theta_init.begin(), theta_init.end());
        for (double& v : theta) v += jitter(engine);
        return theta;
    };

    std::vector<double> theta2 = step1.converged ? step1.theta : perturbed_start();
    std::optional<MinimizeResult> best;
    for (int attempt = 0; attempt <= config.restart_attempts; ++attempt) {
        MinimizeResult run = minimize(second, theta2, config);
        ++result.step2_attempts;
        const bool better = !best || (run.converged && !best->converged) ||
                            (run.converged == best->converged && run.value < best->value);
        if (better) best = std::move(run);
        if (best->converged) break;
        theta2 = perturbed_start();
    }
    result.step2_estimate = untransform(best->theta);
    result.step2_objective = best->value;
    result.converged_step2 = best->converged;
    return result;
}

}  // namespace supou::gmm
