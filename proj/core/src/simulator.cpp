#include "supou/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "supou/errors.hpp"

namespace supou::sim {

namespace {

// Terms below this cannot change a sum of order 1e-284 or more.
constexpr double kNegligible = 1e-300;
// Exact re-evaluation period of the multiplicative recursions.
constexpr std::size_t kReanchor = 32;

constexpr std::uint64_t kForwardStream = 1;
constexpr std::uint64_t kBackwardStream = 2;
constexpr std::uint64_t kBrownianStream = 3;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void require_window(const JumpStream& jumps, double lo, double hi) {
    if (lo < jumps.window_start || hi > jumps.window_end) {
        throw DomainError("evaluation range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                          "] lies outside the simulated window [" + std::to_string(jumps.window_start) + ", " +
                          std::to_string(jumps.window_end) + "]");
    }
}

// Appends arrivals from `anchor` in direction `sign` until `limit` is passed.
void sample_arrivals(double rate, const JumpLaw& law, const PiSpec& pi, double anchor, double limit,
                     double sign, std::uint64_t seed, std::vector<JumpRecord>& out) {
    Engine engine(seed);
    std::exponential_distribution<double> waiting(rate);
    std::gamma_distribution<double> reversion(pi.alpha_pi, 1.0);
    double t = anchor;
    for (;;) {
        double gap = waiting(engine);
        while (gap == 0.0) gap = waiting(engine);
        t += sign * gap;
        if ((sign > 0.0 && t > limit) || (sign < 0.0 && t < limit)) break;
        const double size = law.sample(engine);
        const double a = pi.B * reversion(engine);
        out.push_back(JumpRecord{t, size, a});
    }
}

}  // namespace

JumpLaw JumpLaw::gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("Gamma jump law needs positive shape and rate");
    JumpLaw law;
    // A fresh distribution per draw keeps the sampler stateless and shareable across threads.
    law.sample = [shape, rate](Engine& engine) {
        std::gamma_distribution<double> dist(shape, 1.0 / rate);
        return dist(engine);
    };
    law.mean = shape / rate;
    law.second_moment = shape / (rate * rate) + law.mean * law.mean;
    return law;
}

LevySpec LevySpec::matching(double mu, double sigma2, double jump_shape) {
    if (!(mu > 0.0) || !(sigma2 > 0.0) || !(jump_shape > 0.0)) {
        throw DomainError("a compound Poisson subordinator needs mu > 0, sigma2 > 0 and jump shape > 0");
    }
    // sigma2 / mu = E[U^2] / E[U] = (shape + 1) / jump_rate
    const double jump_rate = (jump_shape + 1.0) * mu / sigma2;
    const double rate = mu / (jump_shape / jump_rate);  // mu / E[U]
    return LevySpec{rate, jump_shape, jump_rate};
}

void validate(const LevySpec& spec) {
    if (!(spec.rate >= 0.0) || !(spec.jump_shape > 0.0) || !(spec.jump_rate > 0.0)) {
        throw DomainError("Levy spec needs rate >= 0 and positive Gamma jump parameters");
    }
}

LevyMoments levy_moments(double rate, const JumpLaw& law) {
    return LevyMoments{rate * law.mean, rate * law.second_moment};
}

LevyMoments levy_moments(const LevySpec& spec) {
    validate(spec);
    const double mean = spec.jump_shape / spec.jump_rate;
    const double second = spec.jump_shape / (spec.jump_rate * spec.jump_rate) + mean * mean;
    return LevyMoments{spec.rate * mean, spec.rate * second};
}

void validate(const SimulationConfig& config) {
    if (!(config.truncation_lead > 0.0)) throw DomainError("truncation lead must be positive");
    if (config.euler_substeps < 1) throw DomainError("euler substeps must be at least 1");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL));
}

JumpStream sample_jump_stream(double rate, const JumpLaw& law, const PiSpec& pi, Window window,
                              std::uint64_t seed) {
    validate(pi);
    if (!(window.start < window.end)) throw DomainError("jump window needs start < end");
    if (!(rate >= 0.0)) throw DomainError("jump rate must be nonnegative");

    JumpStream stream;
    stream.window_start = window.start;
    stream.window_end = window.end;
    if (rate == 0.0) return stream;

    const double anchor = std::clamp(0.0, window.start, window.end);
    std::vector<JumpRecord> backward;
    sample_arrivals(rate, law, pi, anchor, window.start, -1.0, derive_seed(seed, kBackwardStream), backward);
    sample_arrivals(rate, law, pi, anchor, window.end, 1.0, derive_seed(seed, kForwardStream), stream.records);
    stream.records.insert(stream.records.begin(), backward.rbegin(), backward.rend());
    return stream;
}

JumpStream sample_jump_stream(const LevySpec& spec, const PiSpec& pi, Window window, std::uint64_t seed) {
    validate(spec);
    return sample_jump_stream(spec.rate, spec.jump_law(), pi, window, seed);
}

std::vector<double> evaluate_supou(const JumpStream& jumps, std::span<const double> times) {
    std::vector<double> out(times.size(), 0.0);
    if (times.empty()) return out;
    const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
    require_window(jumps, *lo, *hi);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        double sum = 0.0;
        for (const auto& jump : jumps.records) {
            if (jump.tau > t) break;
            sum += jump.size * std::exp(jump.mean_reversion * (t - jump.tau));
        }
        out[k] = sum;
    }
    return out;
}

std::vector<double> evaluate_supou_grid(const JumpStream& jumps, double t0, double dt, std::size_t n) {
    std::vector<double> out(n, 0.0);
    if (n == 0) return out;
    if (!(dt > 0.0)) throw DomainError("grid spacing must be positive");
    const double t_last = t0 + static_cast<double>(n - 1) * dt;
    require_window(jumps, t0, t_last);

    for (const auto& jump : jumps.records) {
        if (jump.tau > t_last) break;
        std::size_t k0 = 0;
        if (jump.tau > t0) {
            k0 = static_cast<std::size_t>(std::ceil((jump.tau - t0) / dt));
            while (k0 > 0 && t0 + static_cast<double>(k0 - 1) * dt >= jump.tau) --k0;
            while (t0 + static_cast<double>(k0) * dt < jump.tau) ++k0;
        }
        const double a = jump.mean_reversion;
        const double ratio = std::exp(a * dt);
        double term = 0.0;
        for (std::size_t k = k0; k < n; ++k) {
            if ((k - k0) % kReanchor == 0) {
                term = jump.size * std::exp(a * (t0 + static_cast<double>(k) * dt - jump.tau));
            } else {
                term *= ratio;
            }
            if (term < kNegligible) break;
            out[k] += term;
        }
    }
    return out;
}

PathSample sample_supou(const JumpStream& jumps, const ObservationSchedule& schedule) {
    validate(schedule);
    const auto n = static_cast<std::size_t>(schedule.n_obs);
    return PathSample{schedule, evaluate_supou_grid(jumps, schedule.delta, schedule.delta, n)};
}

PathSample integrate_supou(const JumpStream& jumps, const ObservationSchedule& schedule) {
    validate(schedule);
    const auto n = static_cast<std::size_t>(schedule.n_obs);
    const double delta = schedule.delta;
    const double t_end = static_cast<double>(n) * delta;
    require_window(jumps, 0.0, t_end);

    std::vector<double> values(n, 0.0);
    for (const auto& jump : jumps.records) {
        if (jump.tau >= t_end) break;
        const double a = jump.mean_reversion;
        const double per_interval = jump.size * std::expm1(a * delta) / a;
        const double ratio = std::exp(a * delta);

        // Interval k covers [k delta, (k+1) delta]; the first full interval starts at `first`.
        std::size_t first = 0;
        if (jump.tau > 0.0) {
            auto k0 = static_cast<std::size_t>(std::floor(jump.tau / delta));
            if (k0 >= n) k0 = n - 1;
            const double right = static_cast<double>(k0 + 1) * delta;
            values[k0] += jump.size * std::expm1(a * (right - jump.tau)) / a;
            first = k0 + 1;
        }
        double decay = 0.0;
        for (std::size_t k = first; k < n; ++k) {
            if ((k - first) % kReanchor == 0) {
                decay = std::exp(a * (static_cast<double>(k) * delta - jump.tau));
            } else {
                decay *= ratio;
            }
            const double term = per_interval * decay;
            if (term < kNegligible) break;
            values[k] += term;
        }
    }
    return PathSample{schedule, std::move(values)};
}

PathSample simulate_sv_logreturns(const JumpStream& jumps, const ObservationSchedule& schedule,
                                  const SimulationConfig& config) {
    validate(schedule);
    validate(config);
    const auto n = static_cast<std::size_t>(schedule.n_obs);
    const auto substeps = static_cast<std::size_t>(config.euler_substeps);
    const double dt = schedule.delta / static_cast<double>(substeps);
    const double sqrt_dt = std::sqrt(dt);

    const std::vector<double> vol = evaluate_supou_grid(jumps, 0.0, dt, n * substeps);
    Engine engine(derive_seed(config.seed, kBrownianStream));
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<double> returns(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double y = 0.0;
        for (std::size_t j = 0; j < substeps; ++j) {
            const double z = normal(engine);
            y += std::sqrt(std::max(vol[i * substeps + j], 0.0)) * sqrt_dt * z;
        }
        returns[i] = y;
    }
    return PathSample{schedule, std::move(returns)};
}

PathSample simulate_path(ModelKind kind, double rate, const JumpLaw& law, const PiSpec& pi,
                         const ObservationSchedule& schedule, const SimulationConfig& config) {
    validate(schedule);
    validate(config);
    const Window window{-config.truncation_lead, static_cast<double>(schedule.n_obs) * schedule.delta};
    const JumpStream jumps = sample_jump_stream(rate, law, pi, window, config.seed);
    switch (kind) {
        case ModelKind::SupOU:
            return sample_supou(jumps, schedule);
        case ModelKind::IntegratedSupOU:
            return integrate_supou(jumps, schedule);
        case ModelKind::SupOUSV:
            return simulate_sv_logreturns(jumps, schedule, config);
    }
    throw DomainError("unknown model kind");
}

PathSample simulate_path(ModelKind kind, const LevySpec& spec, const PiSpec& pi,
                         const ObservationSchedule& schedule, const SimulationConfig& config) {
    validate(spec);
    return simulate_path(kind, spec.rate, spec.jump_law(), pi, schedule, config);
}

void write_csv(const PathSample& path, std::ostream& out) {
    out << "t,value\n";
    char buffer[64];
    for (std::size_t i = 0; i < path.values.size(); ++i) {
        const double t = static_cast<double>(i + 1) * path.schedule.delta;
        std::snprintf(buffer, sizeof buffer, "%.17g,%.17g\n", t, path.values[i]);
        out << buffer;
    }
}

}  // namespace supou::sim
