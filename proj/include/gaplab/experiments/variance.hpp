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

// Var <psi|A|psi> under GAP(rho) for random (rho, A) against the closed-form
// upper bound and, for a subset of cases, the exact K-kernel value.

#pragma once

#include <limits>
#include <string>
#include <vector>

#include "gaplab/experiments/common.hpp"
#include "gaplab/measures.hpp"
#include "gaplab/moments.hpp"

namespace gaplab {

struct VarianceOptions {
    std::size_t cases = 100;
    std::size_t D = 64;
    std::size_t n = 10000;
    std::size_t exact_cases = 10;  // cases also compared with the exact variance
};

/// Random full-rank spectrum (normalized exponential weights) with ||rho|| < max_norm,
/// in a Haar-random basis.
inline DensityMatrix random_density(std::size_t D, Stream& rng, double max_norm = 0.25) {
    for (;;) {
        std::vector<double> p(D);
        double s = 0.0;
        for (auto& v : p) s += (v = rng.exponential());
        double top = 0.0;
        for (auto& v : p) top = std::max(top, v /= s);
        if (top >= max_norm) continue;
        return DensityMatrix::from_spectrum(p, haar_unitary(D, rng), HilbertDim::flat(D));
    }
}

/// Complex Ginibre matrix scaled to operator norm 1.
inline Observable random_operator(std::size_t D, Stream& rng) {
    const auto n = static_cast<Eigen::Index>(D);
    Matrix a(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) a(i, j) = rng.complex_normal();
    return Observable(a / operator_norm(a));
}

struct VarianceCase {
    double norm_rho = 0.0;
    double purity = 0.0;
    double norm_a = 0.0;
    double variance = 0.0;     // sample variance of <psi|A|psi>
    double variance_se = 0.0;  // standard error of the sample variance
    double bound = 0.0;
    double exact = std::numeric_limits<double>::quiet_NaN();
    double mean_z = 0.0;       // |mean - tr(A rho)| / standard error
    double exact_z = std::numeric_limits<double>::quiet_NaN();
    bool sound() const { return variance - 3.0 * variance_se <= bound; }
};

inline VarianceCase run_variance_case(const DensityMatrix& rho, const Observable& a, std::size_t n, bool exact,
                                      std::uint64_t seed, std::uint64_t key, unsigned workers) {
    VarianceCase vc;
    vc.norm_rho = rho.norm();
    vc.purity = rho.purity();
    vc.norm_a = a.norm();
    vc.bound = variance_bound(rho, a);
    // Work in rho's eigenbasis: <psi|A|psi> = c^* (U^* A U) c.
    const Matrix u = rho.basis();
    const Matrix ae = u.adjoint() * a.matrix() * u;
    GaussianFamily fam(rho);
    const auto x = generate_chunked<cplx>(n, seed, key, workers, [&](std::size_t, Stream& rng) {
        const Vector c = fam.gap_coeffs(rng);
        return c.dot(ae * c);
    });
    cplx mean = 0.0;
    for (const auto& v : x) mean += v;
    mean /= static_cast<double>(n);
    double m2 = 0.0, m4 = 0.0;
    for (const auto& v : x) {
        const double d = std::norm(v - mean);
        m2 += d;
        m4 += d * d;
    }
    const double nn = static_cast<double>(n);
    vc.variance = m2 / (nn - 1.0);
    m4 /= nn;
    vc.variance_se = std::sqrt(std::max(0.0, m4 - (m2 / nn) * (m2 / nn)) / nn);
    const cplx target = (a.matrix() * rho.matrix()).trace();
    vc.mean_z = std::abs(mean - target) / std::sqrt(vc.variance / nn);
    if (exact) {
        const KmlKernel k(rho.eigenvalues());
        vc.exact = gap_variance_exact(rho, a, k);
        vc.exact_z = std::abs(vc.variance - vc.exact) / vc.variance_se;
    }
    return vc;
}

inline ExperimentRecord run_variance_soundness(const VarianceOptions& opt, const RunContext& ctx) {
    Stopwatch clock;
    ExperimentRecord rec;
    rec.tag = "variance";
    rec.seed = ctx.seed;
    rec.config = {{"cases", opt.cases}, {"D", opt.D}, {"n", opt.n}, {"exact_cases", opt.exact_cases}};
    if (opt.n < 2) throw std::invalid_argument("variance: n must be at least 2");
    Table table{{"case", "norm_rho", "purity", "norm_a", "variance", "variance_se", "bound", "exact", "mean_z", "exact_z"},
                {}};
    std::size_t violations = 0, mean_fail = 0, exact_fail = 0;
    double worst_ratio = 0.0;
    for (std::size_t i = 0; i < opt.cases; ++i) {
        Stream setup(ctx.seed, (static_cast<std::uint64_t>(i) << 8) | keys::kSetup);
        const DensityMatrix rho = random_density(opt.D, setup);
        const Observable a = random_operator(opt.D, setup);
        const auto vc = run_variance_case(rho, a, opt.n, i < opt.exact_cases, ctx.seed,
                                          (static_cast<std::uint64_t>(i) << 8) | keys::kSamples, ctx.workers);
        rec.samples += opt.n;
        if (!vc.sound()) ++violations;
        if (vc.mean_z > 4.0) ++mean_fail;
        if (std::isfinite(vc.exact_z) && vc.exact_z > 4.0) ++exact_fail;
        worst_ratio = std::max(worst_ratio, vc.variance / vc.bound);
        table.rows.push_back({static_cast<double>(i), vc.norm_rho, vc.purity, vc.norm_a, vc.variance, vc.variance_se,
                              vc.bound, vc.exact, vc.mean_z, vc.exact_z});
    }
    rec.tables["cases"] = std::move(table);
    rec.metrics["violations"] = static_cast<double>(violations);
    rec.metrics["max_variance_over_bound"] = worst_ratio;
    rec.add_check("variance_below_bound", violations == 0, std::to_string(violations) + " violations");
    rec.add_check("mean_matches_trace", mean_fail == 0, std::to_string(mean_fail) + " cases beyond 4 sigma");
    rec.add_check("variance_matches_exact", exact_fail == 0, std::to_string(exact_fail) + " cases beyond 4 sigma");
    rec.wall_seconds = clock.seconds();
    return rec;
}

}  // namespace gaplab
