#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "supou/optimizer.hpp"
#include "supou/params.hpp"

namespace supou::gmm {

/// Model kind, autocovariance lags and grid spacing defining the moment function.
///
/// The dimension is 2 + |lags|: a first-moment condition, a second-moment condition
/// and one cross-moment condition per lag. Lags are in units of the grid.
struct MomentConditionSet {
    ModelKind kind = ModelKind::SupOU;
    std::vector<int> lags;
    double delta = 1.0;

    [[nodiscard]] int max_lag() const { return lags.empty() ? 0 : lags.back(); }
    [[nodiscard]] std::size_t dimension() const { return 2 + lags.size(); }
};

void validate(const MomentConditionSet& conditions);

/// supOU: mean, variance and lags {1, 2, 4, 5}; integrated and SV: lags {1, ..., 5}.
[[nodiscard]] MomentConditionSet default_conditions(ModelKind kind, double delta = 1.0);

/// Stationary expectations (E z, E z^2, E z_t z_{t+h}...) where z is the observation
/// itself, or the squared return for the SV model.
[[nodiscard]] std::vector<double> moment_targets(const ParamVector& beta, const MomentConditionSet& conditions);

/// Moment functions on one window (X_t, ..., X_{t+m}); each has zero stationary mean at the true beta.
[[nodiscard]] std::vector<double> moment_function_supou(std::span<const double> window, const ParamVector& beta,
                                                        const MomentConditionSet& conditions);
[[nodiscard]] std::vector<double> moment_function_int(std::span<const double> window, const ParamVector& beta,
                                                      const MomentConditionSet& conditions);
/// The window holds raw log returns; the squares are formed here.
[[nodiscard]] std::vector<double> moment_function_sv(std::span<const double> window, const ParamVector& beta,
                                                     const MomentConditionSet& conditions);
[[nodiscard]] std::vector<double> moment_function(std::span<const double> window, const ParamVector& beta,
                                                  const MomentConditionSet& conditions);

/// Average of the moment function over the N - m sliding windows.
[[nodiscard]] std::vector<double> sample_moments(std::span<const double> data, const ParamVector& beta,
                                                 const MomentConditionSet& conditions);

/// Data-only part of the sample moments; sample_moments equals averages minus moment_targets.
struct EmpiricalProducts {
    std::vector<double> averages;
    std::size_t n_used = 0;
};

[[nodiscard]] EmpiricalProducts empirical_products(std::span<const double> data,
                                                   const MomentConditionSet& conditions);
[[nodiscard]] std::vector<double> sample_moments(const EmpiricalProducts& products, const ParamVector& beta,
                                                 const MomentConditionSet& conditions);

struct WeightingMatrix {
    Eigen::MatrixXd entries;

    [[nodiscard]] static WeightingMatrix identity(std::size_t d) {
        return WeightingMatrix{Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))};
    }
};

/// g' W g. Throws DomainError if W is not symmetric positive definite or sizes differ.
[[nodiscard]] double quadratic_form(std::span<const double> g, const WeightingMatrix& weighting);
[[nodiscard]] double objective(std::span<const double> data, const ParamVector& beta,
                               const WeightingMatrix& weighting, const MomentConditionSet& conditions);

/// S_hat = (1/n) sum f f' over the windows, at beta1.
[[nodiscard]] Eigen::MatrixXd moment_covariance(std::span<const double> data, const ParamVector& beta1,
                                                const MomentConditionSet& conditions);
/// Inverse of S_hat + (ridge_scale * trace(S_hat) / d) I.
/// Throws SingularWeightingError if the regularized matrix is still not positive definite.
[[nodiscard]] WeightingMatrix estimate_weighting(std::span<const double> data, const ParamVector& beta1,
                                                 const MomentConditionSet& conditions, double ridge_scale);

/// (log mu, log sigma2, log(alpha_pi - 1), log(-B)); needs mu > 0.
[[nodiscard]] std::array<double, 4> transform(const ParamVector& beta);
[[nodiscard]] ParamVector untransform(std::span<const double> theta);

struct GmmResult {
    ModelKind kind = ModelKind::SupOU;
    std::vector<int> lags;
    double delta = 1.0;
    ParamVector start;
    ParamVector step1_estimate;
    ParamVector step2_estimate;
    double step1_objective = 0.0;
    double step2_objective = 0.0;
    WeightingMatrix weighting;  ///< second-step inverse of S_hat
    bool converged_step1 = false;
    bool converged_step2 = false;
    int step2_attempts = 0;
    std::size_t n_used = 0;
};

/// Two-step iterated GMM: identity weighting first, then the inverse of S_hat at the
/// first-step estimate. When step 1 did not converge, or step 2 fails, step 2 is
/// restarted from the start value perturbed on the log scale.
///
/// For the SV model the data are the (demeaned) log returns. Throws InitializationError
/// when no start is given and none can be derived from the data, and
/// SingularWeightingError when S_hat cannot be inverted.
[[nodiscard]] GmmResult two_step_gmm(std::span<const double> data, const MomentConditionSet& conditions,
                                     const GmmConfig& config, std::optional<ParamVector> start = std::nullopt);

}  // namespace supou::gmm
