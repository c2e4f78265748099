#include "supou/moments.hpp"

#include <cmath>
#include <string>

#include "supou/errors.hpp"

namespace supou {

namespace {

void require_delta(double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw DomainError("delta must be positive, got " + std::to_string(delta));
    }
}

/// expm1(z) / z, continuous at 0.
double expm1_ratio(double z) {
    if (std::fabs(z) < 1e-8) return 1.0 + 0.5 * z;
    return std::expm1(z) / z;
}

// Coefficients of sum_k a_k y^k for ((1+y)^c - 1 - c y) / (c (1 - c)):
// a_2 = -1/2 and a_{k+1} = a_k (c - k) / (k + 1).
template <bool EvenOnly>
double binomial_tail_series(double c, double y) {
    double a = -0.5;
    double yk = y * y;
    double sum = a * yk;
    for (int k = 2; k < 400; ++k) {
        a *= (c - k) / (k + 1);
        yk *= y;
        if (a == 0.0) break;
        const bool even = ((k + 1) % 2) == 0;
        if (EvenOnly && !even) continue;
        const double term = a * yk;
        sum += term;
        if (std::fabs(term) <= 1e-18 * std::fabs(sum)) break;
    }
    return sum;
}

int singular_point(double alpha_pi) {
    if (std::fabs(alpha_pi - 3.0) < detail::kSingularBand) return 0;
    if (std::fabs(alpha_pi - 2.0) < detail::kSingularBand) return 1;
    return -1;
}

}  // namespace

namespace detail {

double power_remainder(double c, double y) {
    if (y == 0.0) return 0.0;
    if (y <= 0.1) return binomial_tail_series<false>(c, y);
    const double log_y = std::log1p(y);
    if (std::fabs(c) < 0.25) return (log_y * expm1_ratio(c * log_y) - y) / (1.0 - c);
    if (std::fabs(c - 1.0) < 0.25) return -((1.0 + y) * log_y * expm1_ratio((c - 1.0) * log_y) - y) / c;
    return (std::expm1(c * log_y) - c * y) / (c * (1.0 - c));
}

double power_second_difference(double c, double x, int h) {
    const double xh = x * h;
    const double u = x / (1.0 + xh);
    if (u <= 0.1) {
        // f_{h+-1} = f_h (1 +- u)^c, so only even powers of u survive.
        const double f_h = std::exp(c * std::log1p(xh));
        return f_h * 2.0 * binomial_tail_series<true>(c, u);
    }
    // The linear part of the remainder has zero second difference, leaving
    // f_h ((1+u)^c + (1-u)^c - 2) / (c (1 - c)); the bracket is formed without cancellation in c.
    const double f_h = std::exp(c * std::log1p(xh));
    const double lp = std::log1p(u);
    const double lm = std::log1p(-u);
    double bracket = 0.0;
    if (std::fabs(c) < 0.25) {
        bracket = (lp * expm1_ratio(c * lp) + lm * expm1_ratio(c * lm)) / (1.0 - c);
    } else if (std::fabs(c - 1.0) < 0.25) {
        bracket = -((1.0 + u) * lp * expm1_ratio((c - 1.0) * lp) + (1.0 - u) * lm * expm1_ratio((c - 1.0) * lm)) / c;
    } else {
        bracket = (std::expm1(c * lp) + std::expm1(c * lm)) / (c * (1.0 - c));
    }
    return f_h * bracket;
}

double power_remainder_limit(int c, double y) {
    if (c == 0) return std::log1p(y) - y;
    return y - (1.0 + y) * std::log1p(y);
}

double power_second_difference_limit(int c, double x, int h) {
    const double xh = x * h;
    const double u = x / (1.0 + xh);
    if (c == 0) return std::log1p(-u * u);
    // (1+u) log(1+u) + (1-u) log(1-u) = sum_k u^(2k) / (k (2k - 1))
    double q = 0.0;
    if (u < 0.1) {
        const double u2 = u * u;
        double uk = u2;
        for (int k = 1; k < 200; ++k) {
            const double term = uk / (k * (2.0 * k - 1.0));
            q += term;
            if (term <= 1e-18 * q) break;
            uk *= u2;
        }
    } else {
        q = (1.0 + u) * std::log1p(u) + (1.0 - u) * std::log1p(-u);
    }
    return -(1.0 + xh) * q;
}

}  // namespace detail

double supou_mean(const ParamVector& beta) {
    validate(beta);
    return -beta.mu / (beta.B * (beta.alpha_pi - 1.0));
}

double supou_var(const ParamVector& beta) {
    validate(beta);
    return -beta.sigma2 / (2.0 * beta.B * (beta.alpha_pi - 1.0));
}

double supou_acf(const ParamVector& beta, double h) {
    validate(beta);
    if (!(h >= 0.0)) throw DomainError("lag must be nonnegative, got " + std::to_string(h));
    return std::exp((1.0 - beta.alpha_pi) * std::log1p(-beta.B * h));
}

double supou_acov(const ParamVector& beta, double h) {
    return supou_var(beta) * supou_acf(beta, h);
}

bool has_long_memory(const ParamVector& beta) noexcept {
    return beta.alpha_pi > 1.0 && beta.alpha_pi < 2.0;
}

double intsupou_mean(const ParamVector& beta, double delta) {
    validate(beta, ModelKind::IntegratedSupOU);
    require_delta(delta);
    return delta * supou_mean(beta);
}

double intsupou_var(const ParamVector& beta, double delta) {
    validate(beta);
    require_delta(delta);
    const double x = -beta.B * delta;
    const int sing = singular_point(beta.alpha_pi);
    const double remainder = sing >= 0 ? detail::power_remainder_limit(sing, x)
                                       : detail::power_remainder(3.0 - beta.alpha_pi, x);
    const double b3 = beta.B * beta.B * beta.B;
    return beta.sigma2 * remainder / (b3 * (beta.alpha_pi - 1.0));
}

double intsupou_acov(const ParamVector& beta, double delta, int h) {
    validate(beta);
    require_delta(delta);
    if (h < 1) throw DomainError("integrated autocovariance needs lag >= 1, got " + std::to_string(h));
    const double x = -beta.B * delta;
    const int sing = singular_point(beta.alpha_pi);
    const double diff = sing >= 0 ? detail::power_second_difference_limit(sing, x, h)
                                  : detail::power_second_difference(3.0 - beta.alpha_pi, x, h);
    const double b3 = beta.B * beta.B * beta.B;
    return beta.sigma2 * diff / (2.0 * b3 * (beta.alpha_pi - 1.0));
}

double sv_sqret_mean(const ParamVector& beta, double delta) { return intsupou_mean(beta, delta); }

double sv_sqret_var(const ParamVector& beta, double delta) {
    const double mean = intsupou_mean(beta, delta);
    return 3.0 * intsupou_var(beta, delta) + 2.0 * mean * mean;
}

double sv_sqret_acov(const ParamVector& beta, double delta, int h) {
    validate(beta, ModelKind::SupOUSV);
    return intsupou_acov(beta, delta, h);
}

}  // namespace supou
