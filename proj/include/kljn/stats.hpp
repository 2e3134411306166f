#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace kljn {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

inline double mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean: empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("variance: need >= 2 samples");
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double stddev(const std::vector<double>& v) { return std::sqrt(variance(v)); }

// Standardized sample kurtosis (3.0 for a Gaussian).
inline double kurtosis(const std::vector<double>& v) {
    if (v.size() < 4) throw std::invalid_argument("kurtosis: need >= 4 samples");
    const double m = mean(v);
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = x - m;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    const double n = static_cast<double>(v.size());
    m2 /= n;
    m4 /= n;
    return m4 / (m2 * m2);
}

// Pearson correlation of two equal-length samples.
inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("correlation: need equal-length samples, n >= 2");
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

// Wilson score interval for a binomial proportion. z defaults to the 95%
// two-sided normal quantile.
inline Interval wilson_interval(std::size_t k, std::size_t n, double confidence = 0.95) {
    if (n == 0) throw std::invalid_argument("wilson_interval: n must be >= 1");
    if (k > n) throw std::invalid_argument("wilson_interval: k must be <= n");
    double z = 1.959963984540054;  // 95%
    if (confidence != 0.95) {
        // inverse normal CDF via Acklam's rational approximation, adequate here
        const double p = 0.5 + confidence / 2.0;
        const double t = std::sqrt(-2.0 * std::log(1.0 - p));
        z = t - (2.515517 + 0.802853 * t + 0.010328 * t * t) /
                    (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t);
    }
    const double nn = static_cast<double>(n);
    const double phat = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (phat + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
    Interval ci{center - half, center + half};
    if (ci.lo < 0.0 || k == 0) ci.lo = 0.0;
    if (ci.hi > 1.0 || k == n) ci.hi = 1.0;
    return ci;
}

// Two-sample Kolmogorov-Smirnov test. Returns {D, p_value} using the
// asymptotic Kolmogorov distribution.
inline std::pair<double, double> ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        const double fa = static_cast<double>(i) / na;
        const double fb = static_cast<double>(j) / nb;
        d = std::max(d, std::fabs(fa - fb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    double p = 0.0;
    double sign = 1.0;
    for (int kk = 1; kk <= 100; ++kk) {
        const double term = sign * std::exp(-2.0 * kk * kk * lambda * lambda);
        p += term;
        sign = -sign;
        if (std::fabs(term) < 1e-12) break;
    }
    p = std::clamp(2.0 * p, 0.0, 1.0);
    return {d, p};
}

}  // namespace kljn
