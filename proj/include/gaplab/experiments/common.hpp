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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gaplab/bounds.hpp"
#include "gaplab/linalg.hpp"
#include "gaplab/parallel.hpp"
#include "gaplab/record.hpp"
#include "gaplab/stats.hpp"

namespace gaplab {

struct RunContext {
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

/// Stream keys. Each purpose draws from its own family of substreams so that,
/// e.g., changing a reference-sample budget never perturbs the main samples.
namespace keys {
inline constexpr std::uint64_t kSamples = 1;
inline constexpr std::uint64_t kReference = 2;
inline constexpr std::uint64_t kSetup = 3;
inline constexpr std::uint64_t kHamiltonian = 4;
inline constexpr std::uint64_t kComparison = 5;
inline constexpr std::uint64_t kInner = 6;
}  // namespace keys

/// n points spaced geometrically on [lo, hi].
inline std::vector<double> geometric_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("geometric_grid: need 0 < lo <= hi");
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> g(n);
    const double r = std::log(hi / lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo * std::exp(r * static_cast<double>(i));
    g.back() = hi;
    return g;
}

inline std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

/// Trace-norm deviation grid: 16 geometric points on [0.01, 2].
inline std::vector<double> default_eps_grid() { return geometric_grid(0.01, 2.0, 16); }

using BoundFn = std::function<std::optional<BoundValue>(double)>;

/// Appends one row per grid point with the empirical P(statistic > eps).
/// `values` must be sorted ascending.
inline void add_tail_rows(ExperimentRecord& rec, const std::string& group, const std::string& statistic,
                          const std::vector<double>& values, const std::vector<double>& grid, const BoundFn& bound,
                          bool in_soundness = true) {
    for (double eps : grid) {
        const auto above = static_cast<std::size_t>(values.end() - std::upper_bound(values.begin(), values.end(), eps));
        TailRow row;
        row.group = group;
        row.statistic = statistic;
        row.param = eps;
        row.n = values.size();
        row.count = above;
        row.wilson = stats::wilson(above, values.size());
        if (bound) row.bound = bound(eps);
        row.in_soundness = in_soundness;
        rec.rows.push_back(std::move(row));
    }
}

inline BoundFn bound_for(BoundSpec base) {
    return [base](double eps) -> std::optional<BoundValue> {
        BoundSpec s = base;
        s.eps = eps;
        return bound_value(s);
    };
}

/// <psi|B|psi> with a fast path for diagonal B.
class ObservableEval {
public:
    explicit ObservableEval(Observable b) : b_(std::move(b)) {
        if (detail::is_diagonal(b_.matrix())) diag_ = b_.matrix().diagonal();
    }

    const Observable& observable() const { return b_; }
    bool diagonal() const { return diag_.has_value(); }

    cplx operator()(const Vector& psi) const {
        if (diag_) return (psi.cwiseAbs2().cast<cplx>().array() * diag_->array()).sum();
        return b_.expectation(psi);
    }

    /// Column-wise expectations of a D x K block of states.
    Vector columns(const Matrix& psis) const {
        if (diag_) return (psis.cwiseAbs2().cast<cplx>().transpose() * (*diag_));
        const Matrix y = b_.matrix() * psis;
        return psis.cwiseProduct(y.conjugate()).colwise().sum().conjugate().transpose();
    }

    /// tr(rho B).
    cplx trace_with(const DensityMatrix& rho) const {
        if (diag_ && !rho.has_dense_basis()) {
            cplx s = 0.0;
            const auto& p = rho.eigenvalues();
            const auto& perm = rho.permutation();
            for (std::size_t k = 0; k < perm.size(); ++k)
                s += p(static_cast<Eigen::Index>(k)) * (*diag_)(static_cast<Eigen::Index>(perm[k]));
            return s;
        }
        return (rho.matrix() * b_.matrix()).trace();
    }

private:
    Observable b_;
    std::optional<Vector> diag_;
};

/// Alternating +1/-1 diagonal observable (operator norm 1).
inline Observable alternating_observable(std::size_t D) {
    RealVector d(static_cast<Eigen::Index>(D));
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = (i % 2 == 0) ? 1.0 : -1.0;
    return Observable::diagonal(d);
}

/// True when all nonzero eigenvalues coincide, i.e. rho = P_R / d_R.
inline bool is_normalized_projection(const DensityMatrix& rho, double tol = 1e-12) {
    const auto& p = rho.eigenvalues();
    const double top = p(0);
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p(i) > tol && std::abs(p(i) - top) > tol) return false;
    return true;
}

inline bool is_maximally_mixed(const DensityMatrix& rho, double tol = 1e-14) {
    return rho.rank(tol) == rho.dim() && is_normalized_projection(rho, tol);
}

inline void record_summary(ExperimentRecord& rec, const std::string& name, const std::vector<double>& v) {
    rec.summaries[name] = stats::summarize(v);
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::vector<double> sorted_copy(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
}

inline nlohmann::json shape_json(const HilbertDim& s) { return {{"d_a", s.d_a}, {"d_b", s.d_b}}; }

}  // namespace gaplab
