#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "supou/errors.hpp"
#include "supou/moments.hpp"
#include "supou/simulator.hpp"
#include "supou/stats.hpp"

using supou::ModelKind;
using supou::ObservationSchedule;
using supou::ParamVector;
using supou::PiSpec;
namespace sim = supou::sim;

namespace {

const ParamVector kShort{0.015, 0.003, 4.0, -0.1};
const ParamVector kLong{0.015, 0.003, 1.95, -0.1};

sim::JumpStream single_jump(double tau, double u, double a, double start = -10.0, double end = 10.0) {
    return sim::JumpStream{{sim::JumpRecord{tau, u, a}}, start, end};
}

// Standard error of the mean of a serially correlated series from its autocovariances.
double mean_standard_error(const std::vector<double>& x, std::size_t max_lag) {
    double s = supou::stats::sample_acov(x, 0);
    for (std::size_t h = 1; h <= max_lag; ++h) {
        s += 2.0 * (1.0 - static_cast<double>(h) / static_cast<double>(x.size())) * supou::stats::sample_acov(x, h);
    }
    return std::sqrt(std::max(s, 0.0) / static_cast<double>(x.size()));
}

}  // namespace

TEST_SUITE("simulator") {
    TEST_CASE("Levy moments") {
        const auto m = sim::levy_moments(sim::LevySpec{});
        CHECK(m.mu == doctest::Approx(0.015).epsilon(1e-14));
        CHECK(m.sigma2 == doctest::Approx(0.003).epsilon(1e-14));
        const auto zero = sim::levy_moments(sim::LevySpec{0.0, 3.0, 20.0});
        CHECK(zero.mu == 0.0);
        CHECK(zero.sigma2 == 0.0);
        const auto exp1 = sim::levy_moments(sim::LevySpec{1.0, 1.0, 1.0});
        CHECK(exp1.mu == doctest::Approx(1.0));
        CHECK(exp1.sigma2 == doctest::Approx(2.0));
        CHECK_THROWS_AS((void)sim::levy_moments(sim::LevySpec{0.1, 0.0, 1.0}), supou::DomainError);
    }

    TEST_CASE("exponential jump draws have the stated moments") {
        const sim::JumpLaw law = sim::JumpLaw::gamma(1.0, 1.0);
        sim::Engine rng(42);
        double s1 = 0.0, s2 = 0.0;
        const int n = 1000000;
        for (int i = 0; i < n; ++i) {
            const double u = law.sample(rng);
            s1 += u;
            s2 += u * u;
        }
        CHECK(std::fabs(s1 / n - 1.0) < 4.0 * std::sqrt(1.0 / n));
        CHECK(std::fabs(s2 / n - 2.0) < 4.0 * std::sqrt(20.0 / n));
        CHECK(law.mean == 1.0);
        CHECK(law.second_moment == 2.0);
    }

    TEST_CASE("matching reproduces the default compound Poisson spec") {
        const auto spec = sim::LevySpec::matching(0.015, 0.003);
        CHECK(spec.rate == doctest::Approx(0.1).epsilon(1e-15));
        CHECK(spec.jump_shape == 3.0);
        CHECK(spec.jump_rate == doctest::Approx(20.0).epsilon(1e-15));
        const auto m = sim::levy_moments(sim::LevySpec::matching(6.1e-6, 1.4e-9, 2.0));
        CHECK(m.mu == doctest::Approx(6.1e-6).epsilon(1e-13));
        CHECK(m.sigma2 == doctest::Approx(1.4e-9).epsilon(1e-13));
        CHECK_THROWS_AS((void)sim::LevySpec::matching(0.0, 0.003), supou::DomainError);
    }

    TEST_CASE("jump stream is deterministic and well formed") {
        const sim::LevySpec spec;
        const auto pi = PiSpec::from(kShort);
        const auto a = sim::sample_jump_stream(spec, pi, {-500.0, 300.0}, 9);
        const auto b = sim::sample_jump_stream(spec, pi, {-500.0, 300.0}, 9);
        REQUIRE(a.records.size() == b.records.size());
        for (std::size_t i = 0; i < a.records.size(); ++i) {
            CHECK(a.records[i].tau == b.records[i].tau);
            CHECK(a.records[i].size == b.records[i].size);
            CHECK(a.records[i].mean_reversion == b.records[i].mean_reversion);
        }
        for (std::size_t i = 0; i < a.records.size(); ++i) {
            CHECK(a.records[i].tau >= -500.0);
            CHECK(a.records[i].tau <= 300.0);
            CHECK(a.records[i].size > 0.0);
            CHECK(a.records[i].mean_reversion < 0.0);
            if (i > 0) CHECK(a.records[i].tau > a.records[i - 1].tau);
        }
        const auto c = sim::sample_jump_stream(spec, pi, {-500.0, 300.0}, 10);
        CHECK(c.records.front().tau != a.records.front().tau);
        CHECK_THROWS_AS((void)sim::sample_jump_stream(spec, pi, {1.0, 1.0}, 9), supou::DomainError);
    }

    TEST_CASE("arrival count and mean-reversion draws") {
        const sim::LevySpec spec;
        const auto stream = sim::sample_jump_stream(spec, PiSpec::from(kShort), {-50000.0, 50000.0}, 3);
        const double n = static_cast<double>(stream.records.size());
        CHECK(std::fabs(n - 1e4) <= 4.0 * std::sqrt(1e4));

        const auto many = sim::sample_jump_stream(sim::LevySpec{1.0, 3.0, 20.0}, PiSpec::from(kShort),
                                                  {0.0, 100000.0}, 4);
        double sum = 0.0;
        for (const auto& r : many.records) sum += r.mean_reversion;
        const double count = static_cast<double>(many.records.size());
        // A = B R with R ~ Gamma(4, 1): mean -0.4, sd 0.2
        CHECK(std::fabs(sum / count + 0.4) <= 4.0 * 0.2 / std::sqrt(count));
    }

    TEST_CASE("longer truncation only adds older jumps") {
        const sim::LevySpec spec;
        const auto pi = PiSpec::from(kLong);
        const auto short_lead = sim::sample_jump_stream(spec, pi, {-2000.0, 1000.0}, 21);
        const auto long_lead = sim::sample_jump_stream(spec, pi, {-4000.0, 1000.0}, 21);
        std::size_t matched = 0;
        for (const auto& r : short_lead.records) {
            for (const auto& q : long_lead.records) {
                if (q.tau == r.tau && q.size == r.size && q.mean_reversion == r.mean_reversion) {
                    ++matched;
                    break;
                }
            }
        }
        CHECK(matched == short_lead.records.size());
        for (const auto& q : long_lead.records) {
            if (q.tau >= -2000.0) continue;
            CHECK(q.tau < short_lead.records.front().tau);
        }
    }

    TEST_CASE("truncation at 2000 versus 4000") {
        const ObservationSchedule schedule{1.0, 2000};
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            sim::SimulationConfig c2000;
            c2000.seed = seed;
            sim::SimulationConfig c4000 = c2000;
            c4000.truncation_lead = 4000.0;
            const auto spec = sim::LevySpec::matching(kShort.mu, kShort.sigma2);
            const auto a = sim::simulate_path(ModelKind::SupOU, spec, PiSpec::from(kShort), schedule, c2000);
            const auto b = sim::simulate_path(ModelKind::SupOU, spec, PiSpec::from(kShort), schedule, c4000);
            double worst = 0.0;
            for (std::size_t i = 0; i < a.values.size(); ++i) {
                worst = std::max(worst, std::fabs(a.values[i] - b.values[i]) / b.values[i]);
            }
            CHECK(worst < 1e-8);
        }
    }

    TEST_CASE("single-jump evaluation") {
        const auto stream = single_jump(0.0, 1.0, -0.5);
        const std::vector<double> times{-1.0, 0.0, 2.0};
        const auto x = sim::evaluate_supou(stream, times);
        CHECK(x[0] == 0.0);
        CHECK(x[1] == doctest::Approx(1.0));
        CHECK(x[2] == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
        const auto empty = sim::evaluate_supou(sim::JumpStream{{}, -1.0, 5.0}, times);
        for (double v : empty) CHECK(v == 0.0);
        const std::vector<double> outside{11.0};
        CHECK_THROWS_AS((void)sim::evaluate_supou(stream, outside), supou::DomainError);
    }

    TEST_CASE("grid recursion matches the direct sum") {
        const sim::LevySpec spec;
        const auto stream = sim::sample_jump_stream(spec, PiSpec::from(kLong), {-2000.0, 600.0}, 77);
        const std::size_t n = 500;
        const auto grid = sim::evaluate_supou_grid(stream, 0.5, 1.1, n);
        std::vector<double> times(n);
        for (std::size_t k = 0; k < n; ++k) times[k] = 0.5 + 1.1 * static_cast<double>(k);
        const auto direct = sim::evaluate_supou(stream, times);
        for (std::size_t k = 0; k < n; ++k) CHECK(grid[k] == doctest::Approx(direct[k]).epsilon(1e-12));
    }

    TEST_CASE("exact integration") {
        const auto stream = single_jump(0.0, 1.0, -0.5, -1.0, 5.0);
        const auto v = sim::integrate_supou(stream, ObservationSchedule{1.0, 2});
        CHECK(v.values[0] == doctest::Approx(2.0 * (1.0 - std::exp(-0.5))).epsilon(1e-14));
        CHECK(v.values[1] == doctest::Approx(2.0 * (std::exp(-0.5) - std::exp(-1.0))).epsilon(1e-14));
        const auto mid = sim::integrate_supou(single_jump(0.25, 2.0, -1.0, -1.0, 5.0), ObservationSchedule{0.5, 1});
        CHECK(mid.values[0] == doctest::Approx(2.0 * (1.0 - std::exp(-0.25))).epsilon(1e-14));
        const auto empty = sim::integrate_supou(sim::JumpStream{{}, -1.0, 5.0}, ObservationSchedule{1.0, 3});
        for (double x : empty.values) CHECK(x == 0.0);
    }

    TEST_CASE("integrated values match a fine Riemann sum") {
        const auto stream = sim::sample_jump_stream(sim::LevySpec{}, PiSpec::from(kShort), {-300.0, 20.0}, 5);
        const auto v = sim::integrate_supou(stream, ObservationSchedule{2.0, 5});
        const std::size_t fine = 20000;
        const auto x = sim::evaluate_supou_grid(stream, 0.0, 10.0 / fine, fine + 1);
        for (int n = 0; n < 5; ++n) {
            double s = 0.0;
            const std::size_t lo = static_cast<std::size_t>(n) * fine / 5;
            const std::size_t hi = lo + fine / 5;
            for (std::size_t k = lo; k < hi; ++k) s += 0.5 * (x[k] + x[k + 1]) * (10.0 / fine);
            // jumps inside the interval make the trapezoid rule first order
            CHECK(v.values[static_cast<std::size_t>(n)] == doctest::Approx(s).epsilon(2e-3));
        }
    }

    TEST_CASE("zero volatility gives zero returns") {
        sim::SimulationConfig config;
        config.seed = 1;
        const auto y = sim::simulate_sv_logreturns(sim::JumpStream{{}, -10.0, 10.0}, ObservationSchedule{1.0, 8}, config);
        for (double v : y.values) CHECK(v == 0.0);
    }

    TEST_CASE("paths are deterministic and positive") {
        sim::SimulationConfig config;
        config.seed = 99;
        const auto spec = sim::LevySpec::matching(kShort.mu, kShort.sigma2);
        for (auto kind : {ModelKind::SupOU, ModelKind::IntegratedSupOU, ModelKind::SupOUSV}) {
            const auto a = sim::simulate_path(kind, spec, PiSpec::from(kShort), ObservationSchedule{1.0, 300}, config);
            const auto b = sim::simulate_path(kind, spec, PiSpec::from(kShort), ObservationSchedule{1.0, 300}, config);
            CHECK(a.values == b.values);
            CHECK(a.values.size() == 300);
            if (kind != ModelKind::SupOUSV) {
                for (double v : a.values) CHECK(v > 0.0);
            }
        }
        CHECK_THROWS_AS((void)sim::simulate_path(ModelKind::SupOU, spec, PiSpec::from(kShort),
                                                 ObservationSchedule{1.0, 0}, config),
                        supou::DomainError);
        sim::SimulationConfig bad = config;
        bad.euler_substeps = 0;
        CHECK_THROWS_AS((void)sim::simulate_path(ModelKind::SupOUSV, spec, PiSpec::from(kShort),
                                                 ObservationSchedule{1.0, 5}, bad),
                        supou::DomainError);
    }

    TEST_CASE("supOU and integrated paths have the model moments") {
        sim::SimulationConfig config;
        config.seed = 2024;
        const auto spec = sim::LevySpec::matching(kShort.mu, kShort.sigma2);
        const auto x = sim::simulate_path(ModelKind::SupOU, spec, PiSpec::from(kShort), ObservationSchedule{1.0, 10000}, config);
        const double se = mean_standard_error(x.values, 200);
        CHECK(std::fabs(supou::stats::sample_mean(x.values) - 0.05) <= 3.0 * se);

        config.seed = 2025;
        const auto v = sim::simulate_path(ModelKind::IntegratedSupOU, spec, PiSpec::from(kShort),
                                          ObservationSchedule{1.0, 100000}, config);
        CHECK(std::fabs(supou::stats::sample_var(v.values) / supou::intsupou_var(kShort, 1.0) - 1.0) < 0.15);
    }

    TEST_CASE("SV returns are uncorrelated with squared mean E V") {
        sim::SimulationConfig config;
        config.seed = 31;
        const auto spec = sim::LevySpec::matching(kShort.mu, kShort.sigma2);
        const auto y = sim::simulate_path(ModelKind::SupOUSV, spec, PiSpec::from(kShort), ObservationSchedule{1.0, 10000}, config);
        std::vector<double> z(y.values.size());
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = y.values[i] * y.values[i];
        CHECK(std::fabs(supou::stats::sample_mean(z) - 0.05) <= 3.0 * mean_standard_error(z, 200));
        // products y_t y_{t+1} are uncorrelated with variance about E[V]^2
        std::vector<double> prod(y.values.size() - 1);
        for (std::size_t i = 0; i + 1 < y.values.size(); ++i) prod[i] = y.values[i] * y.values[i + 1];
        CHECK(std::fabs(supou::stats::sample_acov(y.values, 1)) <= 3.0 * mean_standard_error(prod, 0));
    }

    TEST_CASE("Euler refinement changes the second moment by less than the noise") {
        const auto spec = sim::LevySpec::matching(kShort.mu, kShort.sigma2);
        sim::SimulationConfig coarse;
        coarse.seed = 8;
        sim::SimulationConfig fine = coarse;
        fine.euler_substeps = 40;
        const ObservationSchedule schedule{1.0, 20000};
        const auto a = sim::simulate_path(ModelKind::SupOUSV, spec, PiSpec::from(kShort), schedule, coarse);
        const auto b = sim::simulate_path(ModelKind::SupOUSV, spec, PiSpec::from(kShort), schedule, fine);
        // the two paths share their jumps, so the paired difference carries the noise
        std::vector<double> d(a.values.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.values[i] * a.values[i] - b.values[i] * b.values[i];
        CHECK(std::fabs(supou::stats::sample_mean(d)) < 3.0 * mean_standard_error(d, 200));
    }

    TEST_CASE("CSV export") {
        sim::PathSample path{ObservationSchedule{0.5, 2}, {0.1, 1.0 / 3.0}};
        std::ostringstream out;
        sim::write_csv(path, out);
        CHECK(out.str() == "t,value\n0.5,0.10000000000000001\n1,0.33333333333333331\n");
    }
}
