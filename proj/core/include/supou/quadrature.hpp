#pragma once

#include <span>
#include <vector>

#include "supou/params.hpp"

namespace supou {

struct QuadratureOptions {
    double relative_tolerance = 1e-12;
    unsigned max_depth = 30;
};

/// Mean, variance and autocovariances at the requested lags of one model.
struct MomentValues {
    double mean = 0.0;
    double variance = 0.0;
    std::vector<double> acov;
};

/// Evaluates the general integral forms of the moments against the mirrored Gamma
/// mean-reversion law by adaptive Gauss-Kronrod quadrature.
///
/// Lags are in units of delta for every kind: the supOU autocovariance is taken at
/// time lag h * delta. Throws NumericalError carrying the achieved relative error when
/// the requested tolerance is not reached.
[[nodiscard]] MomentValues quadrature_moments(const ParamVector& beta, ModelKind kind, double delta,
                                              std::span<const int> lags,
                                              const QuadratureOptions& options = {});

/// Integral of kernel(A) against the mean-reversion law, where the callable returns
/// A * kernel(A) (bounded near A = 0 for every kernel used here).
template <class ScaledKernel>
double integrate_against_pi(const ParamVector& beta, ScaledKernel&& scaled_kernel,
                            const QuadratureOptions& options);

}  // namespace supou

#include "supou/detail/quadrature_impl.hpp"
