#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

namespace supou::stats {

// Descriptive moments use the divisor n throughout; in particular
// sample_acov(x, 0) is exactly sample_var(x).

[[nodiscard]] double sample_mean(std::span<const double> x);
[[nodiscard]] double sample_var(std::span<const double> x);
[[nodiscard]] double sample_acov(std::span<const double> x, std::size_t h);
/// Throws DomainError for a series with zero variance.
[[nodiscard]] double sample_acf(std::span<const double> x, std::size_t h);

[[nodiscard]] std::vector<double> demean(std::span<const double> x);

/// Middle order statistic (average of the two middle values for even n).
[[nodiscard]] double median(std::span<const double> x);

struct SeriesSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;
    std::map<std::size_t, double> acov;
    std::map<std::size_t, double> acf;
};

/// Lags 0..max_lag; acf is left empty when the variance is zero.
[[nodiscard]] SeriesSummary summarize(std::span<const double> x, std::size_t max_lag);

/// Standard normal quantile (Wichura's AS 241 rational approximation).
[[nodiscard]] double normal_quantile(double p);

struct QQPoint {
    double theoretical = 0.0;
    double sample = 0.0;
};

/// Order statistics against normal quantiles at plotting positions (i - 0.5) / n.
[[nodiscard]] std::vector<QQPoint> normal_qq_points(std::span<const double> x);

struct HistogramBin {
    double left = 0.0;
    double right = 0.0;
    std::size_t count = 0;
};

/// Equal-width bins spanning [min, max]; the rightmost bin is closed.
[[nodiscard]] std::vector<HistogramBin> histogram(std::span<const double> x, int bins);

void write_histogram_csv(std::span<const HistogramBin> bins, std::ostream& out);
void write_qq_csv(std::span<const QQPoint> points, std::ostream& out);

}  // namespace supou::stats
