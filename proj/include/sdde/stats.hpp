#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace sdde {

/// Sample mean and standard error of the mean.
struct MeanStdError {
    double mean = 0.0;
    double std_error = 0.0;
    long count = 0;
};

inline MeanStdError mean_std_error(const std::vector<double>& xs) {
    MeanStdError r;
    r.count = static_cast<long>(xs.size());
    if (r.count == 0) return r;
    double s = 0.0;
    for (double x : xs) s += x;
    r.mean = s / static_cast<double>(r.count);
    if (r.count < 2) return r;
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.std_error = std::sqrt(ss / (static_cast<double>(r.count) * (static_cast<double>(r.count) - 1.0)));
    return r;
}

/// Wilson score interval for a binomial proportion. Behaves correctly when
/// the estimate sits at 0 or 1, which is exactly the regime the hitting
/// probes operate in.
struct WilsonInterval {
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

inline WilsonInterval wilson_interval(long successes, long n, double z = 1.959963984540054) {
    WilsonInterval w;
    if (n <= 0) return w;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    w.estimate = p;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    // exact endpoints: the lower limit is positive iff at least one success
    w.lower = successes == 0 ? 0.0 : std::max(0.0, center - half);
    w.upper = successes == n ? 1.0 : std::min(1.0, center + half);
    return w;
}

/// One-sample Kolmogorov-Smirnov statistic against a CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double F = cdf(sample[i]);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - F));
        d = std::max(d, std::abs(F - static_cast<double>(i) / n));
    }
    return d;
}

/// Kolmogorov tail function Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
inline double kolmogorov_tail(double x) {
    if (x <= 0.0) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 101; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-16) break;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

/// Asymptotic KS p-value with the Stephens small-sample correction.
inline double ks_pvalue(double d, long n) {
    const double sn = std::sqrt(static_cast<double>(n));
    return kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
}

}  // namespace sdde
