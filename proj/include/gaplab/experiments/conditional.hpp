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

// Conditional wave functions: distribution of psi_a over a random ONB of H_b
// versus GAP(tr_b rho), tested on the functionals f_k(psi_a) = |<phi_k|psi_a>|^2.

#pragma once

#include <string>
#include <vector>

#include "gaplab/experiments/common.hpp"
#include "gaplab/measures.hpp"

namespace gaplab {

enum class BornMode { Exact, Sampled, Both };

struct ConditionalOptions {
    std::size_t n_outer = 200;
    std::size_t n_inner = 10000;  // Born draws per outer sample (Sampled / Both)
    std::size_t n_ref = 100000;   // samples for GAP(tr_b rho)(f)
    std::size_t n_functions = 5;
    BornMode born = BornMode::Exact;
    bool constant_f = false;
    bool full_haar = false;  // draw the full d_b x d_b unitary instead of the reduced form
    std::vector<double> eps_grid = geometric_grid(1e-3, 1.0, 16);
};

/// Haar isometry d_b x k: thin QR of a Ginibre matrix with R-diagonal phases removed.
inline Matrix haar_isometry(std::size_t rows, std::size_t cols, Stream& rng) {
    const auto r = static_cast<Eigen::Index>(rows);
    const auto c = static_cast<Eigen::Index>(cols);
    Matrix g(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) g(i, j) = rng.complex_normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(r, c);
    for (Eigen::Index j = 0; j < c; ++j) {
        const cplx d = qr.matrixQR()(j, j);
        const double a = std::abs(d);
        q.col(j) *= (a > 0.0 ? d / a : cplx(1.0, 0.0));
    }
    return q;
}

/// Columns _b<m|psi> for a Haar-random ONB {|m>} of H_b, drawn in O(d_a^2 d_b).
///
/// With Psi the d_a x d_b coefficient matrix and Psi^* = Q1 R1 (thin QR),
/// Psi conj(B) = R1^* (Q1^* conj(B)); Q1^* conj(B) is distributed as the first
/// d_a rows of a Haar unitary, i.e. the transpose of a Haar isometry.
inline Matrix haar_partials(const PureState& psi, Stream& rng) {
    const auto& shape = psi.shape();
    const auto da = static_cast<Eigen::Index>(shape.d_a);
    const auto db = static_cast<Eigen::Index>(shape.d_b);
    using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Matrix m = Eigen::Map<const RowMat>(psi.amplitudes().data(), da, db);
    if (db < da) return m * haar_unitary(shape.d_b, rng).conjugate();
    Eigen::HouseholderQR<Matrix> qr(m.adjoint());
    const Matrix r1 = qr.matrixQR().topRows(da).triangularView<Eigen::Upper>();
    return r1.adjoint() * haar_isometry(shape.d_b, shape.d_a, rng).transpose();
}

/// Born_a^{psi,B}(f_k) for all k by summing over every outcome m:
/// sum_m w_m |<phi_k|psi_a^m>|^2 = sum_m |<phi_k| _b<m|psi>|^2.
inline RealVector born_expectation_exact(const Matrix& partials, const Matrix& phis) {
    const RealVector w = partials.colwise().squaredNorm().transpose();
    const double total = w.sum();
    if (!(total > 1e-300)) throw NumericalError("born_expectation: all Born weights vanish");
    return (phis.adjoint() * partials).cwiseAbs2().rowwise().sum() / total;
}

struct SampledBorn {
    RealVector mean;
    RealVector std_error;
};

/// Monte Carlo estimate of Born_a^{psi,B}(f_k) from n Born draws of M.
inline SampledBorn born_expectation_sampled(const Matrix& partials, const Matrix& phis, std::size_t n, Stream& rng) {
    const RealVector w = partials.colwise().squaredNorm().transpose();
    const DiscreteDistribution pick(w);
    const Matrix overlaps = phis.adjoint() * partials;  // K x d_b
    const Eigen::Index K = phis.cols();
    RealVector s = RealVector::Zero(K), s2 = RealVector::Zero(K);
    for (std::size_t i = 0; i < n; ++i) {
        const auto m = static_cast<Eigen::Index>(pick(rng));
        for (Eigen::Index k = 0; k < K; ++k) {
            const double v = std::norm(overlaps(k, m)) / w(m);
            s(k) += v;
            s2(k) += v * v;
        }
    }
    const double nn = static_cast<double>(n);
    SampledBorn out;
    out.mean = s / nn;
    const RealVector var = ((s2 / nn - out.mean.cwiseAbs2()) * (nn / std::max(1.0, nn - 1.0))).cwiseMax(0.0);
    out.std_error = (var / nn).cwiseSqrt();
    return out;
}

inline ExperimentRecord run_conditional_born(const DensityMatrix& rho, const ConditionalOptions& opt,
                                             const RunContext& ctx) {
    Stopwatch clock;
    const HilbertDim shape = rho.shape();
    ExperimentRecord rec;
    rec.tag = "conditional";
    rec.seed = ctx.seed;
    rec.config = {{"shape", shape_json(shape)}, {"n_outer", opt.n_outer}, {"n_inner", opt.n_inner},
                  {"n_ref", opt.n_ref}};
    const bool hypothesis = shape.d_b >= std::max<std::size_t>(4, shape.d_a);
    rec.metrics["hypothesis_ok"] = hypothesis ? 1.0 : 0.0;
    rec.add_check("hypothesis_d_b", true, hypothesis ? "d_b >= max(4, d_a)" : "flagged: d_b < max(4, d_a)");

    const auto da = static_cast<Eigen::Index>(shape.d_a);
    const auto K = static_cast<Eigen::Index>(opt.n_functions);
    Stream setup(ctx.seed, keys::kSetup);
    Matrix phis(da, K);
    for (Eigen::Index k = 0; k < K; ++k) phis.col(k) = uniform_sphere_vector(shape.d_a, setup);

    // GAP(tr_b rho)(f_k): exact value <phi_k|rho_a|phi_k> and an independent MC estimate.
    const DensityMatrix rho_a = partial_trace_b(rho);
    RealVector exact_ref(K), mc_ref(K);
    for (Eigen::Index k = 0; k < K; ++k) exact_ref(k) = opt.constant_f ? 1.0 : rho_a.expectation(phis.col(k));
    {
        GaussianFamily fam_a(rho_a);
        const auto vals = generate_chunked<RealVector>(opt.n_ref, ctx.seed, keys::kReference, ctx.workers,
                                                       [&](std::size_t, Stream& rng) {
            const Vector v = fam_a.gap(rng);
            return RealVector((phis.adjoint() * v).cwiseAbs2());
        });
        double worst_z = 0.0;
        for (Eigen::Index k = 0; k < K; ++k) {
            std::vector<double> col(vals.size());
            for (std::size_t i = 0; i < vals.size(); ++i) col[i] = opt.constant_f ? 1.0 : vals[i](k);
            const auto m = stats::mean_estimate(col);
            mc_ref(k) = m.mean;
            worst_z = std::max(worst_z, stats::z_score(m, exact_ref(k)));
            rec.metrics["reference_f" + std::to_string(k)] = m.mean;
            rec.metrics["reference_exact_f" + std::to_string(k)] = exact_ref(k);
        }
        rec.add_check("reference_matches_exact", worst_z <= 4.0, "max z=" + format_double(worst_z));
    }

    struct Outer {
        RealVector exact;
        RealVector sampled;
        RealVector sampled_se;
    };
    GaussianFamily fam(rho);
    const bool want_exact = opt.born != BornMode::Sampled;
    const bool want_sampled = opt.born != BornMode::Exact;
    const auto outer = generate_chunked<Outer>(
        opt.n_outer, ctx.seed, keys::kSamples, ctx.workers,
        [&](std::size_t i, Stream& rng) {
            const PureState psi = PureState::normalized(fam.gap(rng), shape);
            const Matrix partials =
                opt.full_haar ? born_decomposition(psi, haar_unitary(shape.d_b, rng)).partials : haar_partials(psi, rng);
            Outer o;
            if (opt.constant_f) {
                o.exact = o.sampled = RealVector::Ones(K);
                o.sampled_se = RealVector::Zero(K);
                return o;
            }
            if (want_exact) o.exact = born_expectation_exact(partials, phis);
            if (want_sampled) {
                Stream inner(ctx.seed, keys::kInner, i);
                auto s = born_expectation_sampled(partials, phis, opt.n_inner, inner);
                o.sampled = std::move(s.mean);
                o.sampled_se = std::move(s.std_error);
            }
            return o;
        },
        64);
    rec.samples = opt.n_outer;

    std::vector<double> pooled;
    std::vector<std::vector<double>> per_f(static_cast<std::size_t>(K));
    double chi2 = 0.0;
    std::size_t dof = 0;
    for (const auto& o : outer) {
        const RealVector& born = want_exact ? o.exact : o.sampled;
        for (Eigen::Index k = 0; k < K; ++k) {
            const double g = std::abs(born(k) - mc_ref(k));
            pooled.push_back(g);
            per_f[static_cast<std::size_t>(k)].push_back(g);
            if (opt.born == BornMode::Both && o.sampled_se(k) > 0.0) {
                const double z = (o.sampled(k) - o.exact(k)) / o.sampled_se(k);
                chi2 += z * z;
                ++dof;
            }
        }
    }
    if (opt.born == BornMode::Both && dof > 0) {
        const double p = stats::chi2_sf(chi2, static_cast<double>(dof));
        rec.metrics["exact_vs_sampled_chi2"] = chi2;
        rec.metrics["exact_vs_sampled_p_value"] = p;
        rec.add_check("exact_matches_sampled", p > 1e-4, "chi2=" + format_double(chi2) + " dof=" + std::to_string(dof));
    }
    record_summary(rec, "born_gap", pooled);
    for (std::size_t k = 0; k < per_f.size(); ++k) record_summary(rec, "born_gap_f" + std::to_string(k), per_f[k]);
    add_tail_rows(rec, "born", "conditional_born_gap", sorted_copy(std::move(pooled)), opt.eps_grid, nullptr, false);
    rec.wall_seconds = clock.seconds();
    return rec;
}

}  // namespace gaplab
