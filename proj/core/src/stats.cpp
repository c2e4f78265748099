#include "supou/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "supou/errors.hpp"

namespace supou::stats {

namespace {

void require_nonempty(std::span<const double> x) {
    if (x.empty()) throw DomainError("empty series");
}

template <std::size_t N>
double horner(const double (&c)[N], double r) {
    double v = c[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) v = v * r + c[i];
    return v;
}

}  // namespace

double sample_mean(std::span<const double> x) {
    require_nonempty(x);
    const double n = static_cast<double>(x.size());
    double sum = 0.0;
    for (double v : x) sum += v;
    const double first = sum / n;
    // one correction pass removes the rounding of the plain sum (a constant series has its value as mean)
    double residual = 0.0;
    for (double v : x) residual += v - first;
    return first + residual / n;
}

double sample_acov(std::span<const double> x, std::size_t h) {
    require_nonempty(x);
    if (h >= x.size()) {
        throw DomainError("lag " + std::to_string(h) + " needs at least " + std::to_string(h + 1) +
                          " observations");
    }
    const double mean = sample_mean(x);
    double sum = 0.0;
    for (std::size_t t = 0; t + h < x.size(); ++t) sum += (x[t] - mean) * (x[t + h] - mean);
    return sum / static_cast<double>(x.size());
}

double sample_var(std::span<const double> x) { return sample_acov(x, 0); }

double sample_acf(std::span<const double> x, std::size_t h) {
    const double var = sample_var(x);
    if (!(var > 0.0)) throw DomainError("autocorrelation of a series with zero variance");
    return sample_acov(x, h) / var;
}

std::vector<double> demean(std::span<const double> x) {
    const double mean = sample_mean(x);
    std::vector<double> out(x.begin(), x.end());
    for (double& v : out) v -= mean;
    return out;
}

double median(std::span<const double> x) {
    require_nonempty(x);
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    if (n % 2 == 1) return sorted[n / 2];
    return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

SeriesSummary summarize(std::span<const double> x, std::size_t max_lag) {
    SeriesSummary s;
    s.n = x.size();
    s.mean = sample_mean(x);
    s.variance = sample_var(x);
    for (std::size_t h = 0; h <= max_lag && h < x.size(); ++h) {
        s.acov[h] = sample_acov(x, h);
        if (s.variance > 0.0) s.acf[h] = h == 0 ? 1.0 : s.acov[h] / s.variance;
    }
    return s;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw DomainError("probability outside [0, 1]");
    }
    static constexpr double a[] = {3.3871328727963666080e0,  1.3314166789178437745e+2,
                                   1.9715909503065514427e+3, 1.3731693765509461125e+4,
                                   4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                   3.3430575583588128105e+4, 2.5090809287301226727e+3};
    static constexpr double b[] = {1.0,
                                   4.2313330701600911252e+1, 6.8718700749205790830e+2,
                                   5.3941960214247511077e+3, 2.1213794301586595867e+4,
                                   3.9307895800092710610e+4, 2.8729085735721942674e+4,
                                   5.2264952788528545610e+3};
    static constexpr double c[] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                   5.76949722146069140550e0, 3.64784832476320460504e0,
                                   1.27045825245236838258e0, 2.41780725177450611770e-1,
                                   2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static constexpr double d[] = {1.0,
                                   2.05319162663775882187e0, 1.67638483018380384940e0,
                                   6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                   1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                   1.05075007164441684324e-9};
    static constexpr double e[] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                   1.78482653991729133580e0, 2.96560571828504891230e-1,
                                   2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                   2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static constexpr double f[] = {1.0,
                                   5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                   1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                   1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                   2.04426310338993978564e-15};

    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * horner(a, r) / horner(b, r);
    }
    double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
    double value = 0.0;
    if (r <= 5.0) {
        r -= 1.6;
        value = horner(c, r) / horner(d, r);
    } else {
        r -= 5.0;
        value = horner(e, r) / horner(f, r);
    }
    return q < 0.0 ? -value : value;
}

std::vector<QQPoint> normal_qq_points(std::span<const double> x) {
    if (x.size() < 2) throw DomainError("QQ points need at least two observations");
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    std::vector<QQPoint> out;
    out.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double position = (static_cast<double>(i) + 0.5) / n;
        out.push_back(QQPoint{normal_quantile(position), sorted[i]});
    }
    return out;
}

std::vector<HistogramBin> histogram(std::span<const double> x, int bins) {
    require_nonempty(x);
    if (bins < 1) throw DomainError("histogram needs at least one bin");
    auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    double lo = *lo_it;
    double hi = *hi_it;
    if (!(hi > lo)) {
        const double widen = std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(lo));
        lo -= widen;
        hi += widen;
    }
    const double width = (hi - lo) / bins;
    std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
    for (int i = 0; i < bins; ++i) {
        out[i].left = lo + i * width;
        out[i].right = i + 1 == bins ? hi : lo + (i + 1) * width;
    }
    for (double v : x) {
        auto idx = static_cast<long>(std::floor((v - lo) / width));
        idx = std::clamp(idx, 0L, static_cast<long>(bins) - 1);
        ++out[static_cast<std::size_t>(idx)].count;
    }
    return out;
}

void write_histogram_csv(std::span<const HistogramBin> bins, std::ostream& out) {
    out << "left,right,count\n";
    char buffer[96];
    for (const auto& bin : bins) {
        std::snprintf(buffer, sizeof buffer, "%.17g,%.17g,%zu\n", bin.left, bin.right, bin.count);
        out << buffer;
    }
}

void write_qq_csv(std::span<const QQPoint> points, std::ostream& out) {
    out << "theoretical,sample\n";
    char buffer[96];
    for (const auto& p : points) {
        std::snprintf(buffer, sizeof buffer, "%.17g,%.17g\n", p.theoretical, p.sample);
        out << buffer;
    }
}

}  // namespace supou::stats
