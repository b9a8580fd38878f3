#ifndef GXLEARN_STATS_HPP
#define GXLEARN_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "gxlearn/errors.hpp"

namespace gxlearn {

/// Quantile by linear interpolation between order statistics (R type 7):
/// h = (n-1)*p, result = x[floor(h)] + frac(h) * (x[floor(h)+1] - x[floor(h)]).
/// `sorted` must be ascending and non-empty.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw data_error("quantile of empty sample");
    if (p <= 0.0) return sorted.front();
    if (p >= 1.0) return sorted.back();
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double median_sorted(const std::vector<double>& sorted) {
    return quantile_sorted(sorted, 0.5);
}

inline double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return median_sorted(values);
}

/// Five-number box summary with Tukey whiskers (outermost points within 1.5 IQR of the hinges).
struct BoxStats {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    double whisker_lo = 0.0;
    double whisker_hi = 0.0;
    std::size_t n = 0;
};

inline BoxStats box_stats_from(std::vector<double> values) {
    if (values.empty()) throw data_error("box statistics of empty sample");
    std::sort(values.begin(), values.end());
    BoxStats b;
    b.n = values.size();
    b.median = median_sorted(values);
    b.q1 = quantile_sorted(values, 0.25);
    b.q3 = quantile_sorted(values, 0.75);
    b.iqr = b.q3 - b.q1;
    const double lo_fence = b.q1 - 1.5 * b.iqr;
    const double hi_fence = b.q3 + 1.5 * b.iqr;
    b.whisker_lo = b.q1;
    b.whisker_hi = b.q3;
    for (double v : values) {
        if (v >= lo_fence) { b.whisker_lo = v; break; }
    }
    for (auto it = values.rbegin(); it != values.rend(); ++it) {
        if (*it <= hi_fence) { b.whisker_hi = *it; break; }
    }
    return b;
}

inline double mean_of(const std::vector<double>& values) {
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

/// Population (divide-by-n) variance.
inline double population_variance(const std::vector<double>& values) {
    const double m = mean_of(values);
    double s = 0.0;
    for (double v : values) s += (v - m) * (v - m);
    return s / static_cast<double>(values.size());
}

/// Standard normal CDF.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

/// Two-sided Wald p-value for a z statistic: 2 * (1 - Phi(|z|)).
inline double wald_p_value(double z) {
    if (!std::isfinite(z)) return std::isnan(z) ? 1.0 : 0.0;
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

/// Same, from a coefficient and its standard error. A zero or undefined
/// standard error yields p=1 for a zero coefficient and p=0 otherwise.
inline double wald_p_value(double coefficient, double standard_error) {
    if (coefficient == 0.0) return 1.0;
    return wald_p_value(coefficient / standard_error);
}

/// Rounds half away from zero at the given number of decimals.
inline double round_half_away(double x, int decimals) {
    double scale = 1.0;
    for (int i = 0; i < decimals; ++i) scale *= 10.0;
    return (x >= 0.0 ? std::floor(x * scale + 0.5) : std::ceil(x * scale - 0.5)) / scale;
}

} // namespace gxlearn

#endif
