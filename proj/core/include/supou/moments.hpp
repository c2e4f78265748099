#pragma once

#include "supou/params.hpp"

namespace supou {

// Closed-form first and second order structure under the mirrored Gamma
// mean-reversion law. All functions validate their arguments and throw
// DomainError on violations.

/// E(X_0) = -mu / (B (alpha_pi - 1)).
[[nodiscard]] double supou_mean(const ParamVector& beta);
/// var(X_0) = -sigma2 / (2 B (alpha_pi - 1)).
[[nodiscard]] double supou_var(const ParamVector& beta);
/// cov(X_0, X_h) for real h >= 0.
[[nodiscard]] double supou_acov(const ParamVector& beta, double h);
/// rho(h) = (1 - B h)^(1 - alpha_pi).
[[nodiscard]] double supou_acf(const ParamVector& beta, double h);

/// True iff alpha_pi lies in the open interval (1, 2).
[[nodiscard]] bool has_long_memory(const ParamVector& beta) noexcept;

/// Integrated process V_n over intervals of length delta. Requires mu > 0.
[[nodiscard]] double intsupou_mean(const ParamVector& beta, double delta);
/// Within 1e-8 of alpha_pi in {2, 3} the analytic limit is evaluated.
[[nodiscard]] double intsupou_var(const ParamVector& beta, double delta);
/// cov(V_1, V_{1+h}) for integer h >= 1.
[[nodiscard]] double intsupou_acov(const ParamVector& beta, double delta, int h);

/// Squared log returns of the SV model.
[[nodiscard]] double sv_sqret_mean(const ParamVector& beta, double delta);
[[nodiscard]] double sv_sqret_var(const ParamVector& beta, double delta);
[[nodiscard]] double sv_sqret_acov(const ParamVector& beta, double delta, int h);

namespace detail {

/// Half-width of the band around alpha_pi in {2, 3} where limit formulas are used.
inline constexpr double kSingularBand = 1e-8;

/// ((1 + y)^c - 1 - c y) / (c (1 - c)), continuous in c including c in {0, 1}.
[[nodiscard]] double power_remainder(double c, double y);
/// Second difference at k = h of power_remainder(c, x k), divided form as above.
[[nodiscard]] double power_second_difference(double c, double x, int h);

/// Analytic limits of the two functions above at c = 0 (alpha_pi = 3) and c = 1 (alpha_pi = 2).
[[nodiscard]] double power_remainder_limit(int c, double y);
[[nodiscard]] double power_second_difference_limit(int c, double x, int h);

}  // namespace detail

}  // namespace supou
