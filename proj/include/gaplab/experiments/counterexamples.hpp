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

// Measures with density matrix rho that do not concentrate: finite delta
// mixtures and von Mises-Fisher laws; and the near-pure GAP(rho) whose overlap
// angle with the dominant eigenvector has a D-independent limit law.

#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "gaplab/experiments/common.hpp"
#include "gaplab/measures.hpp"
#include "gaplab/quadrature.hpp"

namespace gaplab {

// ---------------------------------------------------------------------------
// Delta mixture sum_n p_n delta_{|n>}

struct DeltaOptions {
    AtomBasis atoms = AtomBasis::Eigen;
    std::size_t n = 10000;
    std::vector<double> eps_grid = default_eps_grid();
};

inline ExperimentRecord run_counterexample_delta(const DensityMatrix& rho, const DeltaOptions& opt,
                                                 const RunContext& ctx) {
    Stopwatch clock;
    const HilbertDim shape = rho.shape();
    ExperimentRecord rec;
    rec.tag = "delta";
    rec.seed = ctx.seed;
    rec.config = {{"shape", shape_json(shape)},
                  {"n", opt.n},
                  {"atoms", opt.atoms == AtomBasis::Eigen ? "eigen" : "haar_random"}};
    Stream setup(ctx.seed, keys::kSetup);
    const DeltaMixture mix(rho, opt.atoms, setup);
    const Matrix reference = partial_trace_b_matrix(mix.rho());

    // Exact deviation of every atom with positive weight.
    const auto& p = mix.rho().eigenvalues();
    std::vector<double> atom_dev(mix.rho().dim(), 0.0);
    Table atoms{{"atom", "weight", "deviation"}, {}};
    for (std::size_t k = 0; k < atom_dev.size(); ++k) {
        const double w = p(static_cast<Eigen::Index>(k));
        if (!(w > 0.0)) continue;
        atom_dev[k] = trace_norm_hermitian(partial_trace_b(mix.rho().eigenvector(k), shape) - reference);
        atoms.rows.push_back({static_cast<double>(k), w, atom_dev[k]});
    }
    rec.tables["atoms"] = std::move(atoms);

    auto dev = generate_chunked<double>(opt.n, ctx.seed, keys::kSamples, ctx.workers,
                                        [&](std::size_t, Stream& rng) { return atom_dev[mix(rng).atom]; });
    rec.samples = opt.n;
    record_summary(rec, "deviation", dev);
    if (is_maximally_mixed(rho) && opt.atoms == AtomBasis::Eigen) {
        // Product eigenbasis: every atom is a product state, so its marginal is pure.
        const double expected = 2.0 * (1.0 - 1.0 / static_cast<double>(shape.d_a));
        double worst = 0.0;
        for (double d : atom_dev) worst = std::max(worst, std::abs(d - expected));
        rec.metrics["max_atom_error"] = worst;
        rec.add_check("atom_deviation_exact", worst <= 1e-10, "max error=" + format_double(worst));
    }
    // The typicality bounds do not apply to this measure; attached for comparison only.
    const double da = static_cast<double>(shape.d_a);
    add_tail_rows(rec, "exp", "trace_norm_reduced", sorted_copy(std::move(dev)), opt.eps_grid,
                  bound_for({.tag = BoundTag::ExpEps, .d_a = da, .norm_rho = mix.rho().norm()}), false);
    rec.wall_seconds = clock.seconds();
    return rec;
}

// ---------------------------------------------------------------------------
// von Mises-Fisher on the real sphere S^{D-1}

/// E<mu, x> under VMF(mu, kappa) on S^{D-1}, by quadrature of the marginal
/// density of t = <mu, x>, proportional to e^{kappa t} (1 - t^2)^{(D-3)/2}.
inline double vmf_mean_overlap(std::size_t D, double kappa) {
    if (D < 2) throw std::invalid_argument("vmf_mean_overlap: D must be at least 2");
    const double a = 0.5 * (static_cast<double>(D) - 3.0);
    // Log-density maximum for scaling: kappa t + a log(1 - t^2).
    const double t_star = (a > 0.0 && kappa > 0.0) ? (std::sqrt(a * a + kappa * kappa) - a) / kappa : 0.0;
    const double log_max = a > 0.0 ? kappa * t_star + a * std::log1p(-t_star * t_star) : 0.0;
    auto w = [&](double t) {
        const double s = 1.0 - t * t;
        if (s <= 0.0) return 0.0;
        return std::exp(kappa * t + a * std::log(s) - log_max);
    };
    QuadratureOptions q;
    q.rel_tol = 1e-12;
    // Split at the mode so the adaptive rule sees the peak.
    const double z = integrate(w, -1.0, t_star, q).value + integrate(w, t_star, 1.0, q).value;
    auto tw = [&](double t) { return t * w(t); };
    const double m = integrate(tw, -1.0, t_star, q).value + integrate(tw, t_star, 1.0, q).value;
    return m / z;
}

struct VmfOptions {
    std::vector<std::size_t> dims{64, 256, 1024};
    std::vector<double> kappas{0.0, 1.0, 4.0, 16.0};
    std::size_t n = 10000;
    std::vector<double> eps_grid = geometric_grid(1e-3, 1.0, 16);
};

/// Exploratory record: tails of |f - VMF(f)| for f(x) = <mu, x> (eta = 1),
/// alongside the uniform-measure Levy bound for the complex dimension D / 2.
inline ExperimentRecord run_counterexample_vmf(const VmfOptions& opt, const RunContext& ctx) {
    Stopwatch clock;
    ExperimentRecord rec;
    rec.tag = "vmf";
    rec.seed = ctx.seed;
    rec.config = {{"dims", opt.dims}, {"kappas", opt.kappas}, {"n", opt.n}};
    std::uint64_t case_index = 0;
    for (std::size_t D : opt.dims) {
        if (D < 2) throw std::invalid_argument("vmf: D must be at least 2");
        RealVector mu = RealVector::Zero(static_cast<Eigen::Index>(D));
        mu(0) = 1.0;
        for (double kappa : opt.kappas) {
            const std::string label = "D=" + std::to_string(D) + ";kappa=" + format_double(kappa);
            const double oracle = vmf_mean_overlap(D, kappa);
            const auto t = generate_chunked<double>(opt.n, ctx.seed, (case_index++ << 8) | keys::kSamples,
                                                    ctx.workers,
                                                    [&](std::size_t, Stream& rng) { return sample_vmf(mu, kappa, rng)(0); });
            const auto est = stats::mean_estimate(t);
            const double z = stats::z_score(est, oracle);
            rec.metrics["oracle_mean[" + label + "]"] = oracle;
            rec.metrics["mc_mean[" + label + "]"] = est.mean;
            rec.add_check("mean_matches_quadrature[" + label + "]", z <= 4.0, "z=" + format_double(z));
            std::vector<double> dev(t.size());
            for (std::size_t i = 0; i < t.size(); ++i) dev[i] = std::abs(t[i] - oracle);
            record_summary(rec, "deviation[" + label + "]", dev);
            add_tail_rows(rec, label, "lipschitz_deviation", sorted_copy(std::move(dev)), opt.eps_grid,
                          bound_for({.tag = BoundTag::LevyUniform, .dim = 0.5 * static_cast<double>(D), .eta = 1.0}),
                          false);
            rec.samples += opt.n;
        }
    }
    rec.wall_seconds = clock.seconds();
    return rec;
}

// ---------------------------------------------------------------------------
// Overlap angle for rho = p|0><0| + (1-p)(I - |0><0|)/(D-1)

/// Limit density of theta = arccos|<0|psi>| on (0, pi/2) as D -> infinity:
/// 2 (1-p)^2 / p * cos(theta) / sin^5(theta) * exp((1 - 1/p) cot^2(theta)).
inline double theta_density(double theta, double p) {
    if (theta <= 0.0 || theta > 0.5 * std::numbers::pi) return 0.0;
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double cot = c / s;
    return 2.0 * (1.0 - p) * (1.0 - p) / p * c / std::pow(s, 5) * std::exp((1.0 - 1.0 / p) * cot * cot);
}

/// Closed-form CDF of theta_density. With u = cot^2(theta) and a = (1-p)/p,
/// F = (1-p)^2/p * e^{-a u} ((1 + u)/a + 1/a^2).
inline double theta_cdf(double theta, double p) {
    if (theta <= 0.0) return 0.0;
    if (theta >= 0.5 * std::numbers::pi) return 1.0;
    const double cot = std::cos(theta) / std::sin(theta);
    const double u = cot * cot;
    const double a = (1.0 - p) / p;
    return (1.0 - p) * (1.0 - p) / p * std::exp(-a * u) * ((1.0 + u) / a + 1.0 / (a * a));
}

inline DensityMatrix near_pure_density(std::size_t D, double p, HilbertDim shape) {
    if (D < 2) throw std::invalid_argument("near_pure_density: D must be at least 2");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("near_pure_density: p must lie in (0, 1)");
    if (shape.D() != D) throw DimensionError("near_pure_density: shape does not match D");
    std::vector<double> q(D, (1.0 - p) / static_cast<double>(D - 1));
    q[0] = p;
    return DensityMatrix::diagonal(q, shape);
}

struct ThetaOptions {
    std::size_t D = 4096;
    double p = 0.3;
    std::size_t n = 100000;
    std::size_t bins = 50;
    HilbertDim shape{4, 1024};  // for the reduced-state spread; |0> = |0>_a |0>_b
};

inline ExperimentRecord run_theta_density(const ThetaOptions& opt, const RunContext& ctx) {
    Stopwatch clock;
    ExperimentRecord rec;
    rec.tag = "theta";
    rec.seed = ctx.seed;
    rec.config = {{"D", opt.D}, {"p", opt.p}, {"n", opt.n}, {"bins", opt.bins}, {"shape", shape_json(opt.shape)}};
    if (opt.bins == 0) throw std::invalid_argument("theta: bins must be positive");
    const DensityMatrix rho = near_pure_density(opt.D, opt.p, opt.shape);
    const Matrix reference = partial_trace_b_matrix(rho);
    GaussianFamily fam(rho);
    struct Draw {
        double theta = 0.0;
        double deviation = 0.0;
    };
    const auto draws = generate_chunked<Draw>(opt.n, ctx.seed, keys::kSamples, ctx.workers, [&](std::size_t, Stream& rng) {
        const Vector psi = fam.gap(rng);
        const double overlap = std::min(1.0, std::abs(psi(0)));
        return Draw{std::acos(overlap), trace_norm_hermitian(partial_trace_b(psi, opt.shape) - reference)};
    });
    rec.samples = opt.n;

    const double half_pi = 0.5 * std::numbers::pi;
    QuadratureOptions q;
    q.rel_tol = 1e-12;
    const double norm = integrate([&](double t) { return theta_density(t, opt.p); }, 0.0, half_pi, q).value;
    rec.metrics["density_normalization"] = norm;
    rec.add_check("density_normalizes", std::abs(norm - 1.0) < 1e-6, "integral=" + format_double(norm));

    std::vector<double> theta(draws.size()), dev(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i) {
        theta[i] = draws[i].theta;
        dev[i] = draws[i].deviation;
    }
    std::sort(theta.begin(), theta.end());
    const double ks = stats::ks_statistic(theta, [&](double t) { return theta_cdf(t, opt.p); });
    rec.metrics["ks_distance"] = ks;
    rec.add_check("ks_below_0.02", ks < 0.02, "KS=" + format_double(ks));

    Table hist{{"bin_lo", "bin_hi", "count", "empirical_density", "analytic_density"}, {}};
    const double width = half_pi / static_cast<double>(opt.bins);
    std::vector<std::size_t> counts(opt.bins, 0);
    for (double t : theta) counts[std::min(opt.bins - 1, static_cast<std::size_t>(t / width))]++;
    for (std::size_t b = 0; b < opt.bins; ++b) {
        const double lo = width * static_cast<double>(b);
        const double hi = lo + width;
        const double emp = static_cast<double>(counts[b]) / (static_cast<double>(theta.size()) * width);
        const double ana = (theta_cdf(hi, opt.p) - theta_cdf(lo, opt.p)) / width;
        hist.rows.push_back({lo, hi, static_cast<double>(counts[b]), emp, ana});
    }
    rec.tables["theta_hist"] = std::move(hist);

    const auto s = stats::summarize(dev);
    rec.summaries["deviation"] = s;
    rec.summaries["theta"] = stats::summarize(theta);
    rec.metrics["deviation_iqr"] = s.iqr();
    rec.add_check("reduced_state_spread", s.iqr() > 0.05, "IQR=" + format_double(s.iqr()));
    rec.wall_seconds = clock.seconds();
    return rec;
}

}  // namespace gaplab
