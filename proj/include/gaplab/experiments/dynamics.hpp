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

// Dynamical typicality: psi_t = exp(-iHt) psi with psi ~ GAP(rho), compared
// against tr(rho_t B) and tr_b rho_t, instantaneously and averaged over [0, T].

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gaplab/experiments/common.hpp"
#include "gaplab/measures.hpp"

namespace gaplab {

struct DynamicsOptions {
    std::vector<double> eps_grid = geometric_grid(1e-3, 2.0, 16);
    std::size_t n = 1000;
    std::size_t n_t = 64;       // trapezoid nodes on [0, T]
    std::optional<double> T;    // default: 10 / (central mean level spacing)
    std::optional<Observable> hamiltonian;  // default: GUE from the run seed
    std::optional<Observable> observable;   // default: alternating diagonal
};

/// Mean level spacing over the central half of a sorted spectrum.
inline double central_level_spacing(const RealVector& energies) {
    const auto D = energies.size();
    if (D < 2) throw std::invalid_argument("central_level_spacing: need at least two levels");
    const Eigen::Index lo = D / 4;
    const Eigen::Index hi = std::max<Eigen::Index>(lo + 1, (3 * D) / 4);
    return (energies(hi) - energies(lo)) / static_cast<double>(hi - lo);
}

/// Composite trapezoid average (1/T) int_0^T over `stride`-spaced entries of
/// uniformly spaced samples v[0..K-1].
inline double trapezoid_average(const std::vector<double>& v, std::size_t stride) {
    const std::size_t last = v.size() - 1;
    const std::size_t intervals = last / stride;
    double s = 0.5 * (v[0] + v[last]);
    for (std::size_t k = stride; k < last; k += stride) s += v[k];
    return s / static_cast<double>(intervals);
}

inline ExperimentRecord run_dynamical_typicality(const DensityMatrix& rho, const DynamicsOptions& opt,
                                                 const RunContext& ctx) {
    Stopwatch clock;
    if (opt.n_t < 2) throw std::invalid_argument("dynamics: n_t must be at least 2");
    const HilbertDim shape = rho.shape();
    const std::size_t D = rho.dim();
    ExperimentRecord rec;
    rec.tag = "dynamics";
    rec.seed = ctx.seed;

    Observable h = [&] {
        if (opt.hamiltonian) return *opt.hamiltonian;
        Stream hr(ctx.seed, keys::kHamiltonian);
        return Observable(gue_hamiltonian(D, hr));
    }();
    if (h.dim() != D) throw DimensionError("dynamics: Hamiltonian dimension mismatch");
    const Evolution evo(h);  // throws for non-Hermitian H
    const ObservableEval B(opt.observable ? *opt.observable : alternating_observable(D));
    if (B.observable().dim() != D) throw DimensionError("dynamics: observable dimension mismatch");

    const double spacing = central_level_spacing(evo.energies());
    const double T = opt.T ? *opt.T : 10.0 / spacing;
    if (!(T > 0.0)) throw std::invalid_argument("dynamics: T must be positive");
    rec.config = {{"shape", shape_json(shape)}, {"n", opt.n}, {"n_t", opt.n_t}, {"T", T}};
    rec.metrics["T"] = T;
    rec.metrics["level_spacing"] = spacing;

    // Refined grid of 2 n_t - 1 nodes; the coarse grid is every second node.
    const std::size_t K = 2 * opt.n_t - 1;
    std::vector<double> t(K);
    for (std::size_t k = 0; k < K; ++k) t[k] = T * static_cast<double>(k) / static_cast<double>(K - 1);
    const auto Kx = static_cast<Eigen::Index>(K);
    Matrix phases(static_cast<Eigen::Index>(D), Kx);
    for (Eigen::Index k = 0; k < Kx; ++k) phases.col(k) = evo.phases(t[static_cast<std::size_t>(k)]);
    const Matrix& V = evo.eigenvectors();

    // References tr(rho_t B) and tr_b rho_t per node.
    std::vector<double> ref_obs(K);
    std::vector<Matrix> ref_red(K);
    const bool invariant = is_maximally_mixed(rho);
    Matrix rho_h;
    if (!invariant) rho_h = V.adjoint() * rho.matrix() * V;
    for (std::size_t k = 0; k < K; ++k) {
        if (invariant) {
            ref_obs[k] = B.trace_with(rho).real();
            ref_red[k] = partial_trace_b_matrix(rho);
        } else {
            const Vector& ph = phases.col(static_cast<Eigen::Index>(k));
            const Matrix rt = V * (ph.asDiagonal() * rho_h * ph.conjugate().asDiagonal()) * V.adjoint();
            ref_obs[k] = (rt * B.observable().matrix()).trace().real();
            ref_red[k] = partial_trace_b(rt, shape);
        }
    }
    {
        const Matrix hm = h.matrix();
        const Matrix rm = rho.matrix();
        const double comm = detail::max_abs(hm * rm - rm * hm);
        rec.metrics["commutator_norm"] = comm;
        if (comm <= 1e-12 * std::max(1.0, h.norm())) {
            double drift = 0.0;
            for (double v : ref_obs) drift = std::max(drift, std::abs(v - ref_obs[0]));
            rec.metrics["reference_drift"] = drift;
            rec.add_check("invariant_reference", drift <= 1e-9, "drift=" + format_double(drift));
        }
    }

    struct Sample {
        double inst_obs = 0.0;   // at t = T
        double avg_obs = 0.0;    // coarse trapezoid
        double avg_obs_fine = 0.0;
        double avg_red = 0.0;
        double avg_red_fine = 0.0;
    };
    GaussianFamily fam(rho);
    const auto samples = generate_chunked<Sample>(opt.n, ctx.seed, keys::kSamples, ctx.workers,
                                                  [&](std::size_t, Stream& rng) {
        const Vector psi0 = fam.gap(rng);
        const Vector c = V.adjoint() * psi0;
        const Matrix psit = V * (phases.array().colwise() * c.array()).matrix();
        const Vector obs = B.columns(psit);
        std::vector<double> dob(K), dred(K);
        for (std::size_t k = 0; k < K; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            dob[k] = std::abs(obs(kk).real() - ref_obs[k]);
            dred[k] = trace_norm_hermitian(partial_trace_b(Vector(psit.col(kk)), shape) - ref_red[k]);
        }
        return Sample{dob.back(), trapezoid_average(dob, 2), trapezoid_average(dob, 1), trapezoid_average(dred, 2),
                      trapezoid_average(dred, 1)};
    });
    rec.samples = opt.n;

    std::vector<double> inst, avg_obs, avg_red;
    double s_obs = 0.0, s_obs_f = 0.0, s_red = 0.0, s_red_f = 0.0, max_rel = 0.0;
    for (const auto& s : samples) {
        inst.push_back(s.inst_obs);
        avg_obs.push_back(s.avg_obs);
        avg_red.push_back(s.avg_red);
        s_obs += s.avg_obs;
        s_obs_f += s.avg_obs_fine;
        s_red += s.avg_red;
        s_red_f += s.avg_red_fine;
        if (s.avg_obs_fine > 0.0) max_rel = std::max(max_rel, std::abs(s.avg_obs - s.avg_obs_fine) / s.avg_obs_fine);
    }
    // Self-convergence of the time integral under doubling of the node count.
    const double rel_obs = s_obs_f > 0.0 ? std::abs(s_obs - s_obs_f) / s_obs_f : 0.0;
    const double rel_red = s_red_f > 0.0 ? std::abs(s_red - s_red_f) / s_red_f : 0.0;
    rec.metrics["trapezoid_rel_change_observable"] = rel_obs;
    rec.metrics["trapezoid_rel_change_reduced"] = rel_red;
    rec.metrics["trapezoid_rel_change_observable_max_sample"] = max_rel;
    rec.add_check("trapezoid_self_convergence", rel_obs < 0.01 && rel_red < 0.01,
                  "observable=" + format_double(rel_obs) + " reduced=" + format_double(rel_red));

    record_summary(rec, "instantaneous_observable", inst);
    record_summary(rec, "time_avg_observable", avg_obs);
    record_summary(rec, "time_avg_reduced", avg_red);
    const double nr = rho.norm();
    const double nb = B.observable().norm();
    add_tail_rows(rec, "instantaneous", "observable_deviation", sorted_copy(inst), opt.eps_grid,
                  bound_for({.tag = BoundTag::LevyB, .norm_rho = nr, .norm_b = nb}));
    add_tail_rows(rec, "time-avg", "time_avg_observable", sorted_copy(avg_obs), opt.eps_grid,
                  bound_for({.tag = BoundTag::DynTimeAvg, .norm_rho = nr, .norm_b = nb}));
    add_tail_rows(rec, "time-avg-reduced", "time_avg_reduced", sorted_copy(avg_red), opt.eps_grid,
                  bound_for({.tag = BoundTag::DynReduced, .d_a = static_cast<double>(shape.d_a), .norm_rho = nr}));
    rec.wall_seconds = clock.seconds();
    return rec;
}

}  // namespace gaplab
