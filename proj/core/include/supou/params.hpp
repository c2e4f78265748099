#pragma once

#include <string>
#include <string_view>

namespace supou {

/// The semiparametric parameter (mu, sigma2, alpha_pi, B) shared by all three models.
///
/// mu and sigma2 are mean and variance of the underlying Levy process per unit time.
/// The mean-reversion law is the law of B * R with R ~ Gamma(alpha_pi, 1).
struct ParamVector {
    double mu = 0.0;
    double sigma2 = 0.0;
    double alpha_pi = 0.0;
    double B = 0.0;

    friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

enum class ModelKind { SupOU, IntegratedSupOU, SupOUSV };

[[nodiscard]] std::string_view to_string(ModelKind kind) noexcept;
/// Accepts "supou", "int"/"integrated", "sv" (case sensitive).
[[nodiscard]] ModelKind parse_model_kind(std::string_view name);

/// Throws DomainError unless sigma2 > 0, alpha_pi > 1, B < 0 and all fields are finite.
void validate(const ParamVector& beta);
/// Same as validate(beta) plus mu > 0 for the integrated and SV models.
void validate(const ParamVector& beta, ModelKind kind);

struct ObservationSchedule {
    double delta = 1.0;
    int n_obs = 1;
};

void validate(const ObservationSchedule& schedule);

/// Mean-reversion law. Only the mirrored Gamma specification is supported.
struct PiSpec {
    enum class Kind { GammaMirrored };
    Kind kind = Kind::GammaMirrored;
    double alpha_pi = 0.0;
    double B = 0.0;

    [[nodiscard]] static PiSpec from(const ParamVector& beta) {
        return PiSpec{Kind::GammaMirrored, beta.alpha_pi, beta.B};
    }
};

void validate(const PiSpec& pi);

/// Rescales (mu, sigma2, B) by the change of time unit; alpha_pi is scale free.
[[nodiscard]] ParamVector annualize(const ParamVector& beta, double factor);

}  // namespace supou
