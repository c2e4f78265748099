#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "supou/params.hpp"

namespace supou::sim {

using Engine = std::mt19937_64;

/// A positive jump-size law given by a sampler and its first two moments.
struct JumpLaw {
    std::function<double(Engine&)> sample;
    double mean = 0.0;
    double second_moment = 0.0;

    /// Gamma law in rate parameterization (mean = shape / rate).
    [[nodiscard]] static JumpLaw gamma(double shape, double rate);
};

/// Compound Poisson subordinator with Gamma distributed jumps, no drift and no Gaussian part.
struct LevySpec {
    double rate = 0.1;
    double jump_shape = 3.0;
    double jump_rate = 20.0;

    [[nodiscard]] JumpLaw jump_law() const { return JumpLaw::gamma(jump_shape, jump_rate); }

    /// The spec with the given jump shape whose mean and variance per unit time are (mu, sigma2).
    [[nodiscard]] static LevySpec matching(double mu, double sigma2, double jump_shape = 3.0);
};

void validate(const LevySpec& spec);

struct LevyMoments {
    double mu = 0.0;
    double sigma2 = 0.0;
};

/// mu = rate E[U], sigma2 = rate E[U^2].
[[nodiscard]] LevyMoments levy_moments(const LevySpec& spec);
[[nodiscard]] LevyMoments levy_moments(double rate, const JumpLaw& law);

struct JumpRecord {
    double tau = 0.0;            ///< arrival time
    double size = 0.0;           ///< U > 0
    double mean_reversion = 0.0; ///< A < 0
};

struct JumpStream {
    std::vector<JumpRecord> records;  ///< strictly increasing in tau
    double window_start = 0.0;
    double window_end = 0.0;
};

struct Window {
    double start = 0.0;
    double end = 0.0;
};

struct SimulationConfig {
    double truncation_lead = 2000.0;
    int euler_substeps = 20;
    std::uint64_t seed = 0;
};

void validate(const SimulationConfig& config);

struct PathSample {
    ObservationSchedule schedule;
    std::vector<double> values;
};

/// Independent substream seed; stream ids 1 and 2 drive the jump stream and 3 the Brownian increments.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Poisson arrivals on the window with iid jump sizes and mean-reversion rates.
///
/// Arrivals are generated outward from the anchor point clamp(0, start, end): forward
/// to the window end and backward to the window start, each from its own substream.
/// Extending the window start therefore only appends older jumps.
[[nodiscard]] JumpStream sample_jump_stream(const LevySpec& spec, const PiSpec& pi, Window window,
                                            std::uint64_t seed);
[[nodiscard]] JumpStream sample_jump_stream(double rate, const JumpLaw& law, const PiSpec& pi, Window window,
                                            std::uint64_t seed);

/// X(t) = sum over tau_i <= t of exp(A_i (t - tau_i)) U_i, evaluated term by term.
[[nodiscard]] std::vector<double> evaluate_supou(const JumpStream& jumps, std::span<const double> times);
/// Same sum on the grid t0 + k dt, k < n, using a multiplicative recursion per jump.
[[nodiscard]] std::vector<double> evaluate_supou_grid(const JumpStream& jumps, double t0, double dt,
                                                      std::size_t n);

/// X(n delta) for n = 1..N.
[[nodiscard]] PathSample sample_supou(const JumpStream& jumps, const ObservationSchedule& schedule);
/// V_n = integral of X over [(n-1) delta, n delta], computed exactly per jump.
[[nodiscard]] PathSample integrate_supou(const JumpStream& jumps, const ObservationSchedule& schedule);
/// Euler scheme for the log returns with the exact volatility at the left end of each substep.
[[nodiscard]] PathSample simulate_sv_logreturns(const JumpStream& jumps, const ObservationSchedule& schedule,
                                                const SimulationConfig& config);

/// Samples the jump stream on [-truncation_lead, N delta] and observes the chosen model.
[[nodiscard]] PathSample simulate_path(ModelKind kind, const LevySpec& spec, const PiSpec& pi,
                                       const ObservationSchedule& schedule, const SimulationConfig& config);
[[nodiscard]] PathSample simulate_path(ModelKind kind, double rate, const JumpLaw& law, const PiSpec& pi,
                                       const ObservationSchedule& schedule, const SimulationConfig& config);

/// Header `t,value`, one row per observation at t = n delta, 17 significant digits.
void write_csv(const PathSample& path, std::ostream& out);

}  // namespace supou::sim
