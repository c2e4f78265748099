#include "supou/params.hpp"

#include <cmath>
#include <string>

#include "supou/errors.hpp"

namespace supou {

std::string_view to_string(ModelKind kind) noexcept {
    switch (kind) {
        case ModelKind::SupOU:
            return "supou";
        case ModelKind::IntegratedSupOU:
            return "int";
        case ModelKind::SupOUSV:
            return "sv";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "supou") return ModelKind::SupOU;
    if (name == "int" || name == "integrated") return ModelKind::IntegratedSupOU;
    if (name == "sv") return ModelKind::SupOUSV;
    throw DomainError("unknown model kind '" + std::string(name) + "' (expected supou, int or sv)");
}

void validate(const ParamVector& beta) {
    if (!std::isfinite(beta.mu) || !std::isfinite(beta.sigma2) || !std::isfinite(beta.alpha_pi) ||
        !std::isfinite(beta.B)) {
        throw DomainError("parameter vector has non-finite entries");
    }
    if (!(beta.sigma2 > 0.0)) {
        throw DomainError("sigma2 must be positive, got " + std::to_string(beta.sigma2));
    }
    if (!(beta.alpha_pi > 1.0)) {
        throw DomainError("alpha_pi must exceed 1, got " + std::to_string(beta.alpha_pi));
    }
    if (!(beta.B < 0.0)) {
        throw DomainError("B must be negative, got " + std::to_string(beta.B));
    }
}

void validate(const ParamVector& beta, ModelKind kind) {
    validate(beta);
    if (kind != ModelKind::SupOU && !(beta.mu > 0.0)) {
        throw DomainError("mu must be positive for a subordinator-driven model, got " +
                          std::to_string(beta.mu));
    }
}

void validate(const ObservationSchedule& schedule) {
    if (!(schedule.delta > 0.0) || !std::isfinite(schedule.delta)) {
        throw DomainError("delta must be positive, got " + std::to_string(schedule.delta));
    }
    if (schedule.n_obs < 1) {
        throw DomainError("n_obs must be at least 1, got " + std::to_string(schedule.n_obs));
    }
}

void validate(const PiSpec& pi) {
    if (pi.kind != PiSpec::Kind::GammaMirrored) {
        throw DomainError("only the mirrored Gamma mean-reversion law is supported");
    }
    if (!(pi.alpha_pi > 1.0) || !(pi.B < 0.0) || !std::isfinite(pi.alpha_pi) || !std::isfinite(pi.B)) {
        throw DomainError("mean-reversion law needs alpha_pi > 1 and B < 0");
    }
}

ParamVector annualize(const ParamVector& beta, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
        throw DomainError("annualization factor must be positive, got " + std::to_string(factor));
    }
    return ParamVector{factor * beta.mu, factor * beta.sigma2, beta.alpha_pi, factor * beta.B};
}

}  // namespace supou
