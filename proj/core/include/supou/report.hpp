#pragma once

#include <optional>

#include <nlohmann/json.hpp>

#include "supou/estimator.hpp"
#include "supou/params.hpp"

namespace supou {

inline constexpr const char* kVersion = "0.1.0";

[[nodiscard]] nlohmann::ordered_json to_json(const ParamVector& beta);

/// Fixed field order: model, lags, delta, n_used, start, step1, step2, step2_attempts, annualized.
/// "annualized" is null unless a factor is given; it then holds the factor and the scaled
/// step-2 estimate.
[[nodiscard]] nlohmann::ordered_json to_json(const gmm::GmmResult& result,
                                             std::optional<double> annualize_factor = std::nullopt);

}  // namespace supou
