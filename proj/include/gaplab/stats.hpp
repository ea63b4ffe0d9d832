// Copyright 2026 The gaplab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace gaplab::stats {

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
    double estimate = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double half_width() const { return 0.5 * (hi - lo); }
};

/// Wilson score interval for k successes in n trials.
inline Interval wilson(std::size_t k, std::size_t n, double z = kZ95) {
    if (n == 0) return {0.0, 0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {p, std::max(0.0, std::min(centre - half, p)), std::min(1.0, std::max(centre + half, p))};
}

struct MeanEstimate {
    double mean = 0.0;
    double variance = 0.0;  // sample variance (n - 1 denominator)
    double std_error = 0.0;
    std::size_t n = 0;
};

inline MeanEstimate mean_estimate(std::span<const double> x) {
    MeanEstimate m;
    m.n = x.size();
    if (x.empty()) return m;
    // Two-pass for accuracy.
    m.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - m.mean) * (v - m.mean);
    m.variance = x.size() > 1 ? ss / static_cast<double>(x.size() - 1) : 0.0;
    m.std_error = std::sqrt(m.variance / static_cast<double>(x.size()));
    return m;
}

/// |estimate - target| in units of the standard error (0 when both coincide exactly).
inline double z_score(const MeanEstimate& m, double target) {
    const double d = std::abs(m.mean - target);
    if (d == 0.0) return 0.0;
    return m.std_error > 0.0 ? d / m.std_error : INFINITY;
}

/// Linear-interpolation quantile of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) return NAN;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    if (i + 1 >= sorted.size()) return sorted.back();
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

struct Summary {
    double mean = 0.0, min = 0.0, q05 = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, q95 = 0.0, max = 0.0;
    std::size_t n = 0;
    double iqr() const { return q75 - q25; }
};

inline Summary summarize(std::vector<double> x) {
    Summary s;
    s.n = x.size();
    if (x.empty()) return s;
    std::sort(x.begin(), x.end());
    s.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    s.min = x.front();
    s.max = x.back();
    s.q05 = quantile_sorted(x, 0.05);
    s.q25 = quantile_sorted(x, 0.25);
    s.median = quantile_sorted(x, 0.5);
    s.q75 = quantile_sorted(x, 0.75);
    s.q95 = quantile_sorted(x, 0.95);
    return s;
}

inline double median(std::vector<double> x) { return summarize(std::move(x)).median; }

/// Kolmogorov survival function Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
inline double kolmogorov_sf(double lambda) {
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    for (int j = 1; j <= 200; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 == 1 ? term : -term);
        if (term < 1e-17) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// sup |F_n - F| for sorted data against a continuous CDF.
inline double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf) {
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic (Stephens-corrected) p-value.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return {d, kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d)};
}

/// P(X > x) for X ~ chi^2 with dof degrees of freedom.
inline double chi2_sf(double x, double dof) {
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

}  // namespace gaplab::stats
