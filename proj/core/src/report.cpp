#include "supou/report.hpp"

namespace supou {

nlohmann::ordered_json to_json(const ParamVector& beta) {
    nlohmann::ordered_json j;
    j["mu"] = beta.mu;
    j["sigma2"] = beta.sigma2;
    j["alpha_pi"] = beta.alpha_pi;
    j["B"] = beta.B;
    return j;
}

nlohmann::ordered_json to_json(const gmm::GmmResult& result, std::optional<double> annualize_factor) {
    nlohmann::ordered_json j;
    j["model"] = std::string(to_string(result.kind));
    j["lags"] = result.lags;
    j["delta"] = result.delta;
    j["n_used"] = result.n_used;
    j["start"] = to_json(result.start);
    j["step1"] = {{"estimate", to_json(result.step1_estimate)},
                  {"objective", result.step1_objective},
                  {"converged", result.converged_step1}};
    j["step2"] = {{"estimate", to_json(result.step2_estimate)},
                  {"objective", result.step2_objective},
                  {"converged", result.converged_step2}};
    j["step2_attempts"] = result.step2_attempts;
    if (annualize_factor) {
        j["annualized"] = {{"factor", *annualize_factor},
                           {"estimate", to_json(annualize(result.step2_estimate, *annualize_factor))}};
    } else {
        j["annualized"] = nullptr;
    }
    return j;
}

}  // namespace supou
