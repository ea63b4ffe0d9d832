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

// Static concentration experiments: reduced states, Lipschitz functionals,
// entanglement entropy and the Gaussian / adjusted-Gaussian measures.

#pragma once

#include <string>
#include <vector>

#include "gaplab/experiments/common.hpp"
#include "gaplab/measures.hpp"

namespace gaplab {

// ---------------------------------------------------------------------------
// Canonical typicality

struct CanonicalOptions {
    std::vector<double> eps_grid = default_eps_grid();
    std::size_t n = 10000;
    MeasureKind measure = MeasureKind::GAP;
    AtomBasis atoms = AtomBasis::Eigen;  // delta measure only
};

/// Deviation ||rho_a^psi - tr_b rho_mu||_tr for psi drawn from the chosen measure.
inline std::vector<double> reduced_state_deviations(const MeasureSpec& mu, const Matrix& reference,
                                                    std::size_t n, const RunContext& ctx) {
    const HilbertDim shape = mu.rho().shape();
    return generate_chunked<double>(n, ctx.seed, keys::kSamples, ctx.workers, [&](std::size_t, Stream& rng) {
        const Vector psi = mu.draw(rng);
        return trace_norm_hermitian(partial_trace_b(psi, shape) - reference);
    });
}

inline ExperimentRecord run_canonical_typicality(const DensityMatrix& rho, const CanonicalOptions& opt,
                                                 const RunContext& ctx) {
    Stopwatch clock;
    const HilbertDim shape = rho.shape();
    ExperimentRecord rec;
    rec.tag = "canonical";
    rec.seed = ctx.seed;
    rec.config = {{"shape", shape_json(shape)}, {"n", opt.n}, {"measure", to_string(opt.measure)}};

    Stream setup(ctx.seed, keys::kSetup);
    MeasureSpec mu = [&] {
        switch (opt.measure) {
            case MeasureKind::GAP: return MeasureSpec::gap(rho);
            case MeasureKind::UniformSphere: return MeasureSpec::uniform(shape);
            case MeasureKind::DeltaMixture: return MeasureSpec::delta(rho, opt.atoms, setup);
            default: throw std::invalid_argument("canonical: measure must be gap, uniform or delta");
        }
    }();
    const Matrix reference = partial_trace_b_matrix(mu.rho());
    auto dev = reduced_state_deviations(mu, reference, opt.n, ctx);
    rec.samples = opt.n;
    record_summary(rec, "deviation", dev);
    const auto sorted = sorted_copy(std::move(dev));

    const double da = static_cast<double>(shape.d_a);
    const double nr = mu.rho().norm();
    const double pur = mu.rho().purity();
    // The bounds concern GAP(rho); for the uniform measure rho = I / D.
    const bool covered = opt.measure != MeasureKind::DeltaMixture;
    add_tail_rows(rec, "exp", "trace_norm_reduced", sorted, opt.eps_grid,
                  bound_for({.tag = BoundTag::ExpEps, .d_a = da, .norm_rho = nr}), covered);
    add_tail_rows(rec, "poly", "trace_norm_reduced", sorted, opt.eps_grid,
                  bound_for({.tag = BoundTag::PolyEps, .d_a = da, .norm_rho = nr, .purity = pur}), covered);
    if (is_normalized_projection(mu.rho())) {
        const double dr = static_cast<double>(mu.rho().rank(1e-12));
        add_tail_rows(rec, "unif-poly", "trace_norm_reduced", sorted, opt.eps_grid,
                      bound_for({.tag = BoundTag::UnifPolyEps, .d_a = da, .dim = dr}), covered);
        add_tail_rows(rec, "unif-exp", "trace_norm_reduced", sorted, opt.eps_grid,
                      bound_for({.tag = BoundTag::UnifExpEps, .d_a = da, .dim = dr}), covered);
    }
    rec.metrics["norm_rho"] = nr;
    rec.metrics["purity"] = pur;
    rec.wall_seconds = clock.seconds();
    return rec;
}

// ---------------------------------------------------------------------------
// Entanglement entropy

struct EntropyOptions {
    std::vector<double> eps_grid = geometric_grid(1e-3, 1.0, 16);
    std::size_t n = 10000;
};

inline ExperimentRecord run_entropy_typicality(const DensityMatrix& rho, const EntropyOptions& opt,
                                               const RunContext& ctx) {
    Stopwatch clock;
    const HilbertDim shape = rho.shape();
    ExperimentRecord rec;
    rec.tag = "entropy";
    rec.seed = ctx.seed;
    rec.config = {{"shape", shape_json(shape)}, {"n", opt.n}};
    const double s_ref = von_neumann_entropy(partial_trace_b_matrix(rho));
    GaussianFamily fam(rho);
    auto gap = generate_chunked<double>(opt.n, ctx.seed, keys::kSamples, ctx.workers, [&](std::size_t, Stream& rng) {
        return std::abs(von_neumann_entropy(partial_trace_b(fam.gap(rng), shape)) - s_ref);
    });
    rec.samples = opt.n;
    rec.metrics["reference_entropy"] = s_ref;
    rec.metrics["max_entropy"] = std::log(static_cast<double>(shape.d_a));
    record_summary(rec, "entropy_gap", gap);
    add_tail_rows(rec, "entropy", "entropy_gap", sorted_copy(std::move(gap)), opt.eps_grid, nullptr, false);
    rec.wall_seconds = clock.seconds();
    return rec;
}

// ---------------------------------------------------------------------------
// Levy's lemma for GAP

struct LevyOptions {
    std::vector<double> eps_grid = geometric_grid(1e-3, 2.0, 16);
    std::size_t n = 10000;  // total budget; half estimates GAP(rho)(f)
    std::optional<Observable> observable;  // default: alternating diagonal
    bool constant_f = false;
    bool compare_uniform = true;  // only used when rho = I / D
};

inline ExperimentRecord run_levy_gap(const DensityMatrix& rho, const LevyOptions& opt, const RunContext& ctx) {
    Stopwatch clock;
    const std::size_t D = rho.dim();
    ExperimentRecord rec;
    rec.tag = "levy";
    rec.seed = ctx.seed;
    rec.config = {{"D", D}, {"n", opt.n}, {"constant_f", opt.constant_f}};
    const ObservableEval B(opt.observable ? *opt.observable : alternating_observable(D));
    if (B.observable().dim() != D) throw DimensionError("levy: observable dimension mismatch");
    if (!B.observable().is_hermitian()) throw std::invalid_argument("levy: observable must be Hermitian");
    GaussianFamily fam(rho);
    auto f = [&](const Vector& psi) { return opt.constant_f ? 1.0 : B(psi).real(); };

    const std::size_t n_ref = opt.n / 2;
    const std::size_t n_tail = opt.n - n_ref;
    const auto ref_vals = generate_chunked<double>(n_ref, ctx.seed, keys::kReference, ctx.workers,
                                                   [&](std::size_t, Stream& rng) { return f(fam.gap(rng)); });
    const auto vals = generate_chunked<double>(n_tail, ctx.seed, keys::kSamples, ctx.workers,
                                               [&](std::size_t, Stream& rng) { return f(fam.gap(rng)); });
    const auto ref = stats::mean_estimate(ref_vals);
    const double exact_mean = opt.constant_f ? 1.0 : B.trace_with(rho).real();
    rec.samples = opt.n;
    rec.metrics["reference_mean"] = ref.mean;
    rec.metrics["reference_std_error"] = ref.std_error;
    rec.metrics["exact_mean"] = exact_mean;
    rec.add_check("reference_mean_matches_trace", stats::z_score(ref, exact_mean) <= 4.0,
                  "z=" + format_double(stats::z_score(ref, exact_mean)));

    std::vector<double> lip(vals.size()), obs(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
        lip[i] = std::abs(vals[i] - ref.mean);
        obs[i] = std::abs(vals[i] - exact_mean);
    }
    record_summary(rec, "lipschitz_deviation", lip);
    const double nr = rho.norm();
    const double nb = opt.constant_f ? 1.0 : B.observable().norm();
    const double eta = 2.0 * nb;
    rec.metrics["eta"] = eta;
    add_tail_rows(rec, "levy-gap", "lipschitz_deviation", sorted_copy(lip), opt.eps_grid,
                  bound_for({.tag = BoundTag::LevyGAP, .norm_rho = nr, .eta = eta}));
    add_tail_rows(rec, "levy-b", "observable_deviation", sorted_copy(obs), opt.eps_grid,
                  bound_for({.tag = BoundTag::LevyB, .norm_rho = nr, .norm_b = nb}));

    if (opt.compare_uniform && is_maximally_mixed(rho)) {
        const auto uvals =
            generate_chunked<double>(n_tail, ctx.seed, keys::kComparison, ctx.workers,
                                     [&](std::size_t, Stream& rng) { return f(uniform_sphere_vector(D, rng)); });
        std::vector<double> udev(uvals.size());
        for (std::size_t i = 0; i < uvals.size(); ++i) udev[i] = std::abs(uvals[i] - exact_mean);
        add_tail_rows(rec, "levy-uniform", "observable_deviation", sorted_copy(udev), opt.eps_grid,
                      bound_for({.tag = BoundTag::LevyUniform, .dim = static_cast<double>(D), .eta = eta}));
        if (!opt.constant_f) {
            const auto ks = stats::ks_two_sample(vals, uvals);
            rec.metrics["ks_uniform_statistic"] = ks.statistic;
            rec.metrics["ks_uniform_p_value"] = ks.p_value;
            rec.add_check("gap_matches_uniform", ks.p_value > 0.01, "p=" + format_double(ks.p_value));
        }
    }
    rec.wall_seconds = clock.seconds();
    return rec;
}

// ---------------------------------------------------------------------------
// Gaussian and adjusted-Gaussian concentration

struct GaussianOptions {
    std::vector<double> eps_grid = geometric_grid(0.01, 2.0, 16);
    std::vector<double> r_grid = linear_grid(0.1, 0.7, 7);
    std::size_t n = 100000;
    bool constant_f = false;
};

/// f(psi) = Re<phi, psi> with a fixed random unit phi (eta = 1, mean 0 under G and GA).
inline ExperimentRecord run_gaussian_concentration(const DensityMatrix& rho, const GaussianOptions& opt,
                                                   const RunContext& ctx) {
    Stopwatch clock;
    const std::size_t D = rho.dim();
    ExperimentRecord rec;
    rec.tag = "gaussian";
    rec.seed = ctx.seed;
    rec.config = {{"D", D}, {"n", opt.n}, {"constant_f", opt.constant_f}};
    Stream setup(ctx.seed, keys::kSetup);
    const Vector phi = uniform_sphere_vector(D, setup);
    GaussianFamily fam(rho);
    auto f = [&](const Vector& v) { return opt.constant_f ? 0.0 : phi.dot(v).real(); };
    struct Draw {
        double f = 0.0;
        double norm = 0.0;
    };
    const auto g = generate_chunked<Draw>(opt.n, ctx.seed, keys::kSamples, ctx.workers, [&](std::size_t, Stream& rng) {
        const Vector v = fam.gaussian(rng);
        return Draw{f(v), v.norm()};
    });
    const auto ga = generate_chunked<Draw>(opt.n, ctx.seed, keys::kComparison, ctx.workers,
                                           [&](std::size_t, Stream& rng) {
                                               const Vector v = fam.ga(rng);
                                               return Draw{f(v), v.norm()};
                                           });
    rec.samples = 2 * opt.n;
    const double nr = rho.norm();
    std::vector<double> dg, dga, sq_norm_g;
    for (const auto& d : g) {
        dg.push_back(std::abs(d.f));
        sq_norm_g.push_back(d.norm * d.norm);
    }
    for (const auto& d : ga) dga.push_back(std::abs(d.f));
    record_summary(rec, "gaussian_deviation", dg);
    record_summary(rec, "ga_deviation", dga);
    rec.metrics["gaussian_mean_sq_norm"] = stats::mean_estimate(sq_norm_g).mean;
    add_tail_rows(rec, "gauss-conc", "lipschitz_deviation", sorted_copy(dg), opt.eps_grid,
                  bound_for({.tag = BoundTag::GaussConc, .norm_rho = nr, .eta = 1.0}));
    add_tail_rows(rec, "ga-conc", "lipschitz_deviation", sorted_copy(dga), opt.eps_grid,
                  bound_for({.tag = BoundTag::GAConc, .norm_rho = nr, .eta = 1.0}));

    // Small-norm event ||psi|| < r under GA(rho).
    std::vector<double> norms;
    for (const auto& d : ga) norms.push_back(d.norm);
    std::sort(norms.begin(), norms.end());
    for (double r : opt.r_grid) {
        const auto below = static_cast<std::size_t>(std::lower_bound(norms.begin(), norms.end(), r) - norms.begin());
        TailRow row;
        row.group = "ga-tail";
        row.statistic = "norm_below";
        row.param = r;
        row.n = norms.size();
        row.count = below;
        row.wilson = stats::wilson(below, norms.size());
        row.bound = bound_value({.tag = BoundTag::GATail, .norm_rho = nr, .r = r});
        rec.rows.push_back(std::move(row));
    }
    rec.wall_seconds = clock.seconds();
    return rec;
}

}  // namespace gaplab
