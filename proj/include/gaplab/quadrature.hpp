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

#include <array>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaplab {

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

struct QuadratureOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    int max_intervals = 4000;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes (nonnegative half) and weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                              0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[static_cast<std::size_t>(j)];
        const double s = f(c - dx) + f(c + dx);
        kron += kWgk[static_cast<std::size_t>(j)] * s;
        if (j % 2 == 1) gauss += kWg[static_cast<std::size_t>(j / 2)] * s;
    }
    return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod 7/15 on a finite interval. The integrand is
/// never evaluated at the endpoints.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
    std::priority_queue<detail::Segment> heap;
    detail::Segment first = detail::gk15(f, a, b);
    double value = first.value;
    double error = first.error;
    heap.push(first);
    int intervals = 1;
    while (error > std::max(opt.abs_tol, opt.rel_tol * std::abs(value))) {
        if (intervals >= opt.max_intervals) {
            throw QuadratureError("integrate: no convergence after " + std::to_string(intervals) +
                                  " intervals (estimate " + std::to_string(value) + ", error " +
                                  std::to_string(error) + ")");
        }
        detail::Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        detail::Segment left = detail::gk15(f, worst.a, mid);
        detail::Segment right = detail::gk15(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++intervals;
        if (!std::isfinite(value)) throw QuadratureError("integrate: non-finite integrand");
    }
    // Re-sum to shed accumulated rounding from the running updates.
    double v = 0.0, e = 0.0;
    while (!heap.empty()) {
        v += heap.top().value;
        e += heap.top().error;
        heap.pop();
    }
    return {v, e, intervals};
}

/// Integral over [a, infinity) through x = a + t / (1 - t).
template <class F>
QuadratureResult integrate_to_infinity(F&& f, double a, const QuadratureOptions& opt = {}) {
    auto g = [&](double t) {
        const double s = 1.0 - t;
        return f(a + t / s) / (s * s);
    };
    return integrate(g, 0.0, 1.0, opt);
}

}  // namespace gaplab
