#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ruinlab {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return lo <= x && x <= hi; }
};

// Wilson score interval for a binomial proportion (default ~95%).
inline Interval wilson_interval(std::size_t hits, std::size_t n, double z = 1.959963984540054) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(hits) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    // Degenerate counts pin the matching endpoint exactly (the algebra gives
    // 0 resp. 1 there, but not always in floating point).
    const double lo = hits == 0 ? 0.0 : std::max(0.0, center - half);
    const double hi = hits == n ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

inline double binomial_stderr(std::size_t hits, std::size_t n) {
    if (n == 0) return 0.0;
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

// Streaming first/second moment accumulator; mergeable so that per-block
// partial results can be combined in a fixed order.
struct MomentAccumulator {
    std::size_t n = 0;
    double sum = 0.0;
    double sumsq = 0.0;
    double max_value = -1e308;

    void add(double x) {
        ++n;
        sum += x;
        sumsq += x * x;
        if (x > max_value) max_value = x;
    }
    void merge(const MomentAccumulator& o) {
        n += o.n;
        sum += o.sum;
        sumsq += o.sumsq;
        if (o.max_value > max_value) max_value = o.max_value;
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double variance() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double v = (sumsq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
        return std::max(0.0, v);
    }
    double stderr_mean() const {
        return n ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
    }
    // Single heaviest sample carrying >10% of the total mass is the classic
    // symptom of an infinite-variance summand; callers switch to a robust CI.
    bool top_heavy() const { return n > 0 && sum > 0.0 && max_value > 0.1 * sum; }
};

inline double median_inplace(std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("median of empty vector");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
        m = 0.5 * (m + v[mid - 1]);
    }
    return m;
}

// Median-of-means over the given block means, with a MAD-based spread
// estimate: robust against a handful of wild blocks.
struct RobustMean {
    double value = 0.0;
    double stderr_value = 0.0;
};

inline RobustMean median_of_means(std::vector<double> block_means) {
    if (block_means.empty()) throw std::invalid_argument("median_of_means: no blocks");
    std::vector<double> tmp = block_means;
    const double med = median_inplace(tmp);
    std::vector<double> dev(block_means.size());
    for (std::size_t i = 0; i < block_means.size(); ++i)
        dev[i] = std::fabs(block_means[i] - med);
    const double mad = median_inplace(dev);
    // 1.4826 rescales MAD to a normal-consistent sigma across blocks.
    const double spread = 1.4826 * mad / std::sqrt(static_cast<double>(block_means.size()));
    return {med, spread};
}

// CI of a ratio num/den from independent estimates via the delta method on
// logs; degenerate inputs produce a [0, inf) style wide interval.
inline Interval ratio_interval(double num, double num_se, double den, double den_se,
                               double z = 1.959963984540054) {
    if (!(num > 0.0) || !(den > 0.0)) return {0.0, 1e308};
    const double rel = std::sqrt((num_se / num) * (num_se / num) + (den_se / den) * (den_se / den));
    const double r = num / den;
    return {r * std::exp(-z * rel), r * std::exp(z * rel)};
}

}  // namespace ruinlab
