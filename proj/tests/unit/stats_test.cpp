#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "supou/errors.hpp"
#include "supou/moments.hpp"
#include "supou/simulator.hpp"
#include "supou/stats.hpp"

namespace stats = supou::stats;
using supou::DomainError;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double bisect_quantile(double p) {
    // upper tail through the exact complement 1 - p, where the cdf itself is too flat to resolve
    if (p > 0.5) return -bisect_quantile(1.0 - p);
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("stats") {
    TEST_CASE("hand-computed moments") {
        const std::vector<double> x{1.0, 2.0, 3.0};
        CHECK(stats::sample_mean(x) == 2.0);
        CHECK(stats::sample_var(x) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
        const std::vector<double> alt{1.0, -1.0, 1.0, -1.0};
        CHECK(stats::sample_acov(alt, 1) == doctest::Approx(-0.75).epsilon(1e-15));
        const std::vector<double> flat(10, 4.2);
        CHECK(stats::sample_var(flat) == 0.0);
        for (std::size_t h = 0; h < 5; ++h) CHECK(stats::sample_acov(flat, h) == 0.0);
        CHECK_THROWS_AS((void)stats::sample_acf(flat, 1), DomainError);
    }

    TEST_CASE("acov at lag 0 is the variance and acov is shift invariant") {
        std::mt19937_64 rng(1);
        std::normal_distribution<double> n01;
        std::vector<double> x(257);
        for (double& v : x) v = n01(rng);
        CHECK(stats::sample_acov(x, 0) == stats::sample_var(x));
        std::vector<double> shifted(x);
        for (double& v : shifted) v += 1234.5;
        for (std::size_t h = 0; h < 6; ++h) {
            CHECK(stats::sample_acov(shifted, h) == doctest::Approx(stats::sample_acov(x, h)).epsilon(1e-9));
        }
        CHECK(stats::sample_acf(x, 0) == 1.0);
    }

    TEST_CASE("errors on empty input and too-large lags") {
        const std::vector<double> empty;
        CHECK_THROWS_AS((void)stats::sample_mean(empty), DomainError);
        CHECK_THROWS_AS((void)stats::sample_var(empty), DomainError);
        CHECK_THROWS_AS((void)stats::demean(empty), DomainError);
        CHECK_THROWS_AS((void)stats::median(empty), DomainError);
        CHECK_THROWS_AS((void)stats::histogram(empty, 3), DomainError);
        const std::vector<double> two{1.0, 2.0};
        CHECK_THROWS_AS((void)stats::sample_acov(two, 2), DomainError);
        CHECK_NOTHROW((void)stats::sample_acov(two, 1));
    }

    TEST_CASE("demean") {
        const std::vector<double> x{1.0, 2.0, 3.0};
        CHECK(stats::demean(x) == std::vector<double>{-1.0, 0.0, 1.0});
        const std::vector<double> centered{-2.0, 0.5, 1.5};
        const auto d = stats::demean(centered);
        for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] == doctest::Approx(centered[i]).epsilon(1e-15));
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-5.0, 50.0);
        std::vector<double> y(101);
        for (double& v : y) v = u(rng);
        const auto once = stats::demean(y);
        const auto twice = stats::demean(once);
        CHECK(std::fabs(stats::sample_mean(once)) < 1e-13);
        for (std::size_t i = 0; i < once.size(); ++i) CHECK(twice[i] == doctest::Approx(once[i]).epsilon(1e-12));
    }

    TEST_CASE("median") {
        CHECK(stats::median(std::vector<double>{3.0, 1.0, 2.0}) == 2.0);
        CHECK(stats::median(std::vector<double>{4.0, 1.0, 3.0, 2.0}) == 2.5);
    }

    TEST_CASE("summary") {
        const std::vector<double> x{1.0, -1.0, 1.0, -1.0};
        const auto s = stats::summarize(x, 2);
        CHECK(s.n == 4);
        CHECK(s.mean == 0.0);
        CHECK(s.acov.at(1) == doctest::Approx(-0.75));
        CHECK(s.acf.at(0) == 1.0);
        CHECK(s.acf.at(1) == doctest::Approx(-0.75));
        const auto flat = stats::summarize(std::vector<double>(5, 2.0), 2);
        CHECK(flat.acf.empty());
    }

    TEST_CASE("normal quantile against bisection on erfc") {
        for (double p : {1e-12, 1e-6, 0.001, 0.02425, 0.1, 0.25, 0.5, 0.75, 0.9, 0.97575, 0.999, 1.0 - 1e-9}) {
            CHECK(std::fabs(stats::normal_quantile(p) - bisect_quantile(p)) < 1e-9);
        }
        CHECK(stats::normal_quantile(0.5) == 0.0);
        CHECK(stats::normal_quantile(0.75) == doctest::Approx(0.6744897501960817).epsilon(1e-14));
        CHECK(std::isinf(stats::normal_quantile(0.0)));
        CHECK(std::isinf(stats::normal_quantile(1.0)));
        CHECK_THROWS_AS((void)stats::normal_quantile(1.5), DomainError);
        CHECK_THROWS_AS((void)stats::normal_quantile(-0.1), DomainError);
    }

    TEST_CASE("QQ points") {
        const auto two = stats::normal_qq_points(std::vector<double>{1.0, -1.0});
        REQUIRE(two.size() == 2);
        CHECK(two[0].theoretical == doctest::Approx(-0.67449).epsilon(1e-5));
        CHECK(two[1].theoretical == doctest::Approx(0.67449).epsilon(1e-5));
        CHECK(two[0].sample == -1.0);
        CHECK(two[1].sample == 1.0);

        const std::size_t n = 50;
        std::vector<double> q(n);
        for (std::size_t i = 0; i < n; ++i) q[i] = stats::normal_quantile((static_cast<double>(i) + 0.5) / n);
        std::reverse(q.begin(), q.end());
        for (const auto& p : stats::normal_qq_points(q)) CHECK(p.sample == doctest::Approx(p.theoretical).epsilon(1e-15));

        std::mt19937_64 rng(8);
        std::exponential_distribution<double> e;
        std::vector<double> x(77);
        for (double& v : x) v = e(rng);
        const auto pts = stats::normal_qq_points(x);
        for (std::size_t i = 1; i < pts.size(); ++i) {
            CHECK(pts[i].theoretical > pts[i - 1].theoretical);
            CHECK(pts[i].sample >= pts[i - 1].sample);
        }
        CHECK_THROWS_AS((void)stats::normal_qq_points(std::vector<double>{1.0}), DomainError);
    }

    TEST_CASE("histogram") {
        const auto h = stats::histogram(std::vector<double>{0.0, 1.0, 2.0, 3.0}, 2);
        REQUIRE(h.size() == 2);
        CHECK(h[0].count == 2);
        CHECK(h[1].count == 2);
        CHECK(h[0].left == 0.0);
        CHECK(h[1].right == 3.0);
        const auto flat = stats::histogram(std::vector<double>(6, 5.0), 3);
        std::size_t total = 0;
        std::size_t nonempty = 0;
        for (const auto& b : flat) {
            total += b.count;
            nonempty += b.count > 0 ? 1 : 0;
        }
        CHECK(total == 6);
        CHECK(nonempty == 1);
        std::mt19937_64 rng(4);
        std::normal_distribution<double> n01;
        std::vector<double> x(1000);
        for (double& v : x) v = n01(rng);
        total = 0;
        for (const auto& b : stats::histogram(x, 17)) total += b.count;
        CHECK(total == x.size());
        CHECK_THROWS_AS((void)stats::histogram(x, 0), DomainError);
    }

    TEST_CASE("CSV writers") {
        std::ostringstream hist;
        const std::vector<stats::HistogramBin> bins{{0.0, 0.5, 3}, {0.5, 1.0, 1}};
        stats::write_histogram_csv(bins, hist);
        CHECK(hist.str() == "left,right,count\n0,0.5,3\n0.5,1,1\n");
        std::ostringstream qq;
        const std::vector<stats::QQPoint> pts{{-0.25, 1.5}};
        stats::write_qq_csv(pts, qq);
        CHECK(qq.str() == "theoretical,sample\n-0.25,1.5\n");
    }

    TEST_CASE("sample acf tracks the model acf across paths") {
        const supou::ParamVector beta{0.015, 0.003, 4.0, -0.1};
        const auto spec = supou::sim::LevySpec::matching(beta.mu, beta.sigma2);
        const int paths = 30;
        std::vector<std::vector<double>> acf(5);
        for (int p = 0; p < paths; ++p) {
            supou::sim::SimulationConfig config;
            config.seed = 500 + static_cast<std::uint64_t>(p);
            const auto x = supou::sim::simulate_path(supou::ModelKind::SupOU, spec, supou::PiSpec::from(beta),
                                                     supou::ObservationSchedule{1.0, 10000}, config);
            for (std::size_t h = 1; h <= 5; ++h) acf[h - 1].push_back(stats::sample_acf(x.values, h));
        }
        for (std::size_t h = 1; h <= 5; ++h) {
            const double m = stats::sample_mean(acf[h - 1]);
            const double sd = std::sqrt(stats::sample_var(acf[h - 1]));
            CHECK(std::fabs(m - supou::supou_acf(beta, static_cast<double>(h))) <= 3.0 * sd);
        }
    }
}
