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

// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gaplab/experiments.hpp"
#include "gaplab/runner/cli.hpp"

namespace {

using namespace gaplab;
namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string name;
    double budget_seconds;
    std::function<Outcome()> run;
};

std::string fmt(double x) { return format_double(x); }

unsigned workers() { return default_workers(); }

int cli(const std::vector<std::string>& args, std::string* out_text = nullptr) {
    std::vector<std::string> a{"gaplab"};
    a.insert(a.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : a) argv.push_back(s.c_str());
    std::ostringstream out, err;
    const int code = runner::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    return code;
}

std::string three_sf(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", x);
    return buf;
}

// ---------------------------------------------------------------------------

Outcome crossover() {
    std::string out;
    if (cli({"bounds", "crossover", "--format", "csv"}, &out) != 0) return {false, "command failed"};
    std::istringstream in(out);
    std::string header, row;
    std::getline(in, header);
    if (!std::getline(in, row)) return {false, "no interval"};
    std::vector<std::string> f;
    std::stringstream ss(row);
    for (std::string t; std::getline(ss, t, ',');) f.push_back(t);
    const double lo = std::stod(f.at(3)), hi = std::stod(f.at(4));
    const bool ok = three_sf(lo) == "4.67e+13" && three_sf(hi) == "9.17e+31";
    return {ok, "interval [" + fmt(lo) + ", " + fmt(hi) + "]"};
}

Outcome kml_exact() {
    double worst = 0.0;
    for (std::size_t D : {2u, 4u, 64u, 512u}) {
        const KmlKernel k(RealVector::Constant(static_cast<Eigen::Index>(D), 1.0 / static_cast<double>(D)));
        const double exact = static_cast<double>(D) / static_cast<double>(D + 1);
        for (std::size_t l : {std::size_t{0}, D - 1}) worst = std::max(worst, std::abs(k(0, l) - exact) / exact);
    }
    Stream rng(2026, 1);
    std::size_t bound_violations = 0;
    for (int s = 0; s < 100; ++s) {
        const auto D = static_cast<Eigen::Index>(2 + rng.uniform_index(63));
        RealVector p(D);
        for (Eigen::Index i = 0; i < D; ++i) p(i) = rng.exponential();
        p /= p.sum();
        const KmlKernel k(p);
        for (Eigen::Index m = 0; m < D; ++m)
            for (Eigen::Index l = m; l < D; ++l)
                if (k(static_cast<std::size_t>(m), static_cast<std::size_t>(l)) > k.upper_bound() * (1.0 + 1e-12))
                    ++bound_violations;
    }
    return {worst <= 1e-9 && bound_violations == 0,
            "max rel error " + fmt(worst) + ", bound violations " + std::to_string(bound_violations)};
}

Outcome fourth_moment() {
    const std::size_t D = 8, N = 1000000;
    std::vector<double> p(D);
    for (std::size_t i = 0; i < D; ++i) p[i] = static_cast<double>(D - i);
    double s = 0.0;
    for (double v : p) s += v;
    for (auto& v : p) v /= s;
    const auto rho = DensityMatrix::diagonal(p, HilbertDim::flat(D));
    const GaussianFamily fam(rho);
    const KmlKernel k(rho.eigenvalues());
    const std::size_t chunks = (N + kChunkSize - 1) / kChunkSize;
    std::vector<Eigen::MatrixXd> sum(chunks, Eigen::MatrixXd::Zero(D, D)), sum2(chunks, Eigen::MatrixXd::Zero(D, D));
    for_each_chunk(N, 7, 1, workers(), [&](std::size_t c, std::size_t b, std::size_t e, Stream& rng) {
        for (std::size_t i = b; i < e; ++i) {
            const Eigen::VectorXd a = fam.gap_coeffs(rng).cwiseAbs2();
            const Eigen::MatrixXd x = a * a.transpose();
            sum[c] += x;
            sum2[c] += x.cwiseAbs2();
        }
    });
    Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(D, D), s2 = s1;
    for (std::size_t c = 0; c < chunks; ++c) {
        s1 += sum[c];
        s2 += sum2[c];
    }
    const double n = static_cast<double>(N);
    double worst = 0.0;
    for (std::size_t m = 0; m < D; ++m)
        for (std::size_t l = m; l < D; ++l) {
            const auto mi = static_cast<Eigen::Index>(m), li = static_cast<Eigen::Index>(l);
            const double mean = s1(mi, li) / n;
            const double var = (s2(mi, li) / n - mean * mean) * n / (n - 1.0);
            worst = std::max(worst, std::abs(mean - gap_fourth_moment(k, m, l)) / std::sqrt(var / n));
        }
    return {worst <= 4.0, "max z over 36 pairs " + fmt(worst)};
}

Outcome variance() {
    VarianceOptions o;
    o.cases = 100;
    o.D = 64;
    o.n = 10000;
    const auto rec = run_variance_soundness(o, {2026, workers()});
    std::string detail;
    for (const auto& c : rec.checks) detail += c.name + ": " + c.detail + "; ";
    detail += "max Var/bound " + fmt(rec.metrics.at("max_variance_over_bound"));
    return {rec.all_checks_pass(), detail};
}

Outcome sampler_fidelity() {
    const std::size_t D = 16, N = 100000;
    Stream setup(3, 0);
    const DensityMatrix rho = random_density(D, setup, 1.0);
    const MeasureSpec mu = MeasureSpec::gap(rho);
    const std::size_t chunks = (N + kChunkSize - 1) / kChunkSize;
    std::vector<Matrix> acc(chunks, Matrix::Zero(D, D));
    for_each_chunk(N, 3, 1, workers(), [&](std::size_t c, std::size_t b, std::size_t e, Stream& rng) {
        for (std::size_t i = b; i < e; ++i) {
            const Vector v = mu.draw(rng);
            acc[c] += v * v.adjoint();
        }
    });
    Matrix emp = Matrix::Zero(D, D);
    for (const auto& a : acc) emp += a;
    emp /= static_cast<double>(N);
    const double dist = trace_norm_hermitian(0.5 * (emp + emp.adjoint()) - rho.matrix());

    // GAP(I/D) coordinates against the uniform-sphere moments 1/D and (1 + delta)/(D (D + 1)).
    const MeasureSpec unif = MeasureSpec::gap(DensityMatrix::maximally_mixed(HilbertDim::flat(D)));
    const auto draws = generate_chunked<Eigen::VectorXd>(N, 4, 1, workers(), [&](std::size_t, Stream& rng) {
        return Eigen::VectorXd(unif.draw(rng).cwiseAbs2());
    });
    const double dd = static_cast<double>(D);
    double worst = 0.0;
    auto z_of = [&](auto&& value, double target) {
        std::vector<double> x(N);
        for (std::size_t i = 0; i < N; ++i) x[i] = value(draws[i]);
        return stats::z_score(stats::mean_estimate(x), target);
    };
    for (Eigen::Index m = 0; m < static_cast<Eigen::Index>(D); ++m) {
        worst = std::max(worst, z_of([&](const Eigen::VectorXd& a) { return a(m); }, 1.0 / dd));
        worst = std::max(worst, z_of([&](const Eigen::VectorXd& a) { return a(m) * a(m); }, 2.0 / (dd * (dd + 1.0))));
        const Eigen::Index l = (m + 1) % static_cast<Eigen::Index>(D);
        worst = std::max(worst, z_of([&](const Eigen::VectorXd& a) { return a(m) * a(l); }, 1.0 / (dd * (dd + 1.0))));
    }
    return {dist < 0.05 && worst <= 4.0, "trace distance " + fmt(dist) + ", max moment z " + fmt(worst)};
}

Outcome density_chi2() {
    // D = 2, rho = diag(3/4, 1/4). With u = |c_0|^2 uniform under the uniform measure and
    // GAP density proportional to <psi|rho^{-1}|psi>^{-3}, g(u) = b + (a - b) u with
    // a = 1/p_0, b = 1/p_1, the CDF is (b^-2 - g(u)^-2) / (b^-2 - a^-2).
    const double p0 = 0.75, p1 = 0.25, a = 1.0 / p0, b = 1.0 / p1;
    auto cdf = [&](double u) {
        const double g = b + (a - b) * u;
        return (1.0 / (b * b) - 1.0 / (g * g)) / (1.0 / (b * b) - 1.0 / (a * a));
    };
    const std::size_t N = 1000000, bins = 50;
    const MeasureSpec mu = MeasureSpec::gap(DensityMatrix::diagonal(std::vector<double>{p0, p1}, HilbertDim::flat(2)));
    const auto u = generate_chunked<double>(N, 5, 1, workers(),
                                            [&](std::size_t, Stream& rng) { return std::norm(mu.draw(rng)(0)); });
    std::vector<double> count(bins, 0.0);
    for (double x : u) count[std::min(bins - 1, static_cast<std::size_t>(x * bins))] += 1.0;
    double chi2 = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
        const double lo = static_cast<double>(i) / bins, hi = static_cast<double>(i + 1) / bins;
        const double expected = static_cast<double>(N) * (cdf(hi) - cdf(lo));
        chi2 += (count[i] - expected) * (count[i] - expected) / expected;
    }
    const double pval = stats::chi2_sf(chi2, static_cast<double>(bins - 1));
    return {pval > 0.01, "chi2 " + fmt(chi2) + " on " + std::to_string(bins - 1) + " dof, p " + fmt(pval)};
}

Outcome gaussian_levy_soundness() {
    const auto rho = DensityMatrix::maximally_mixed(HilbertDim::flat(256));
    GaussianOptions g;
    g.n = 100000;
    const auto rg = run_gaussian_concentration(rho, g, {2026, workers()});
    LevyOptions l;
    l.n = 100000;
    const auto rl = run_levy_gap(rho, l, {2026, workers()});
    std::size_t rows = 0;
    for (const auto* r : {&rg, &rl})
        for (const auto& row : r->rows) rows += row.counts_for_soundness();
    const std::size_t v = rg.soundness_violations() + rl.soundness_violations();
    return {v == 0 && rl.all_checks_pass(),
            std::to_string(v) + " violations over " + std::to_string(rows) + " rows (gauss-conc, ga-conc, ga-tail, "
            "levy-gap, levy-b, levy-uniform)"};
}

Outcome canonical_scaling() {
    std::vector<double> med;
    for (std::size_t db : {64u, 256u, 1024u}) {
        CanonicalOptions o;
        o.n = 10000;
        const auto rec = run_canonical_typicality(DensityMatrix::maximally_mixed({4, db}), o, {2026, workers()});
        med.push_back(rec.summaries.at("deviation").median);
    }
    const double r1 = med[0] / med[1], r2 = med[1] / med[2];
    const bool ok = std::abs(r1 - 2.0) <= 0.4 && std::abs(r2 - 2.0) <= 0.4;
    return {ok, "medians " + fmt(med[0]) + ", " + fmt(med[1]) + ", " + fmt(med[2]) + "; ratios " + fmt(r1) + ", " +
                    fmt(r2)};
}

Outcome dynamics() {
    const HilbertDim shape{4, 64};
    Stream setup(2026, 9);
    std::vector<double> p(256, 0.0);
    for (std::size_t i = 0; i < 64; ++i) p[i] = 1.0 / 64.0;
    const auto rho = DensityMatrix::from_spectrum(p, haar_unitary(256, setup), shape);
    DynamicsOptions o;
    o.n = 1000;
    o.n_t = 64;
    o.T = 10.0;
    const auto rec = run_dynamical_typicality(rho, o, {2026, workers()});
    const Check* conv = nullptr;
    for (const auto& c : rec.checks)
        if (c.name == "trapezoid_self_convergence") conv = &c;
    const bool ok = rec.soundness_ok() && conv && conv->passed;
    return {ok, std::to_string(rec.soundness_violations()) + " violations; trapezoid " + (conv ? conv->detail : "?")};
}

Outcome conditional() {
    std::vector<double> med;
    for (std::size_t db : {64u, 512u}) {
        ConditionalOptions o;
        const auto rec = run_conditional_born(DensityMatrix::maximally_mixed({4, db}), o, {2026, workers()});
        med.push_back(rec.summaries.at("born_gap").median);
    }
    const double drop = 1.0 - med[1] / med[0];
    return {drop >= 0.30, "median " + fmt(med[0]) + " -> " + fmt(med[1]) + " (decrease " + fmt(100.0 * drop) + "%)"};
}

Outcome delta() {
    double worst = 0.0;
    bool all = true;
    for (const auto& shape : {HilbertDim{2, 512}, HilbertDim{4, 64}, HilbertDim{8, 8}, HilbertDim{3, 5}}) {
        DeltaOptions o;
        o.n = 1000;
        const auto rec = run_counterexample_delta(DensityMatrix::maximally_mixed(shape), o, {1, workers()});
        all = all && rec.all_checks_pass();
        worst = std::max(worst, rec.metrics.at("max_atom_error"));
    }
    DeltaOptions h;
    h.atoms = AtomBasis::HaarRandom;
    h.n = 10000;
    const auto rec = run_counterexample_delta(DensityMatrix::maximally_mixed({2, 512}), h, {2026, workers()});
    const double med = rec.summaries.at("deviation").median;
    return {all && worst <= 1e-10 && med < 0.1, "max atom error " + fmt(worst) + ", Haar median " + fmt(med)};
}

Outcome theta() {
    const double p = 0.3;
    const double norm = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double t) { return theta_density(t, p); }, 0.0, 0.5 * std::numbers::pi, 15, 1e-13);
    ThetaOptions o;
    const auto rec = run_theta_density(o, {2026, workers()});
    bool checks = true;
    for (const auto& c : rec.checks)
        if (c.name == "density_normalizes" || c.name == "ks_below_0.02") checks = checks && c.passed;
    const double ks = rec.metrics.at("ks_distance");
    return {checks && std::abs(norm - 1.0) < 1e-6 && ks < 0.02,
            "integral " + fmt(norm) + ", KS " + fmt(ks) + " (D=4096, p=0.3, N=1e5)"};
}

Outcome reproducibility() {
    const fs::path root = fs::temp_directory_path() / "gaplab_acceptance_repro";
    fs::remove_all(root);
    fs::create_directories(root);
    const std::vector<json> configs{
        {{"experiment", "canonical"}, {"shape", {{"d_a", 4}, {"d_b", 16}}}, {"n", 20000}},
        {{"experiment", "entropy"}, {"shape", {{"d_a", 2}, {"d_b", 16}}}, {"n", 9000}},
        {{"experiment", "levy"}, {"dim", 64}, {"n", 20000}},
        {{"experiment", "gaussian"}, {"dim", 32}, {"n", 9000}},
        {{"experiment", "dynamics"}, {"shape", {{"d_a", 2}, {"d_b", 8}}}, {"rho", {{"kind", "near_pure"}, {"p", 0.2}}},
         {"n", 300}, {"n_t", 16}},
        {{"experiment", "conditional"}, {"shape", {{"d_a", 2}, {"d_b", 8}}}, {"n_outer", 300}, {"n_inner", 300},
         {"n_ref", 9000}, {"born", "both"}},
        {{"experiment", "delta"}, {"shape", {{"d_a", 2}, {"d_b", 8}}}, {"atoms", "haar_random"}, {"n", 9000}},
        {{"experiment", "vmf"}, {"dims", {8, 16}}, {"kappas", {0, 2}}, {"n", 9000}},
        {{"experiment", "theta"}, {"shape", {{"d_a", 4}, {"d_b", 64}}}, {"n", 9000}},
        {{"experiment", "variance"}, {"dim", 8}, {"cases", 3}, {"n", 9000}, {"exact_cases", 1}},
    };
    std::size_t compared = 0;
    std::vector<std::string> mismatched;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        json doc = configs[i];
        doc["seed"] = 100 + i;
        const auto cfg = root / ("c" + std::to_string(i) + ".json");
        std::ofstream(cfg) << doc.dump();
        std::vector<fs::path> dirs;
        for (unsigned w : {1u, 4u, 8u}) {
            const auto dir = root / ("r" + std::to_string(i) + "_w" + std::to_string(w));
            const int code = cli({"run", "--config", cfg.string(), "--out-dir", dir.string(), "--workers",
                                  std::to_string(w)});
            if (code != runner::exit_code::kOk && code != runner::exit_code::kFailedCheck)
                return {false, doc["experiment"].get<std::string>() + " exited " + std::to_string(code)};
            dirs.push_back(dir);
        }
        for (const auto& e : fs::directory_iterator(dirs[0])) {
            const auto ref = runner::read_file(e.path());
            for (std::size_t d = 1; d < dirs.size(); ++d) {
                ++compared;
                if (runner::read_file(dirs[d] / e.path().filename()) != ref)
                    mismatched.push_back(e.path().filename().string());
            }
        }
    }
    // Raw sample streams as well.
    std::string s1, s4, s8;
    const std::vector<std::string> base{"sample", "--measure", "gap", "--eigenvalues", "0.4,0.3,0.2,0.1", "--n", "20000"};
    auto with = [&](const char* w) {
        auto a = base;
        a.insert(a.end(), {"--workers", w});
        return a;
    };
    cli(with("1"), &s1);
    cli(with("4"), &s4);
    cli(with("8"), &s8);
    compared += 2;
    if (s1 != s4 || s1 != s8) mismatched.push_back("sample csv");
    fs::remove_all(root);
    std::string detail = std::to_string(compared) + " file comparisons over workers {1, 4, 8}";
    for (const auto& m : mismatched) detail += "; differs: " + m;
    return {mismatched.empty() && compared > 0, detail};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"crossover endpoints 4.67e13 / 9.17e31 (3 s.f.)", 1.0, crossover},
        {"K_ml uniform closed form (1e-9) and 1/(1-p_max) bound", 5.0, kml_exact},
        {"GAP fourth moments within 4 sigma (D=8, N=1e6)", 60.0, fourth_moment},
        {"variance bound soundness (100 cases, D=64, N=1e4)", 600.0, variance},
        {"sampler fidelity (D=16, N=1e5) and GAP(I/D) moments", 0.0, sampler_fidelity},
        {"GAP density chi-square at D=2 (N=1e6)", 0.0, density_chi2},
        {"Gaussian, GA-tail and Levy soundness at I/256 (N=1e5)", 0.0, gaussian_levy_soundness},
        {"canonical typicality halves when d_b quadruples", 600.0, canonical_scaling},
        {"dynamical typicality soundness and trapezoid convergence", 0.0, dynamics},
        {"conditional Born gap decreases >= 30% from d_b=64 to 512", 0.0, conditional},
        {"delta-mixture counterexample", 0.0, delta},
        {"theta density normalization and KS < 0.02", 300.0, theta},
        {"byte-identical reruns across worker counts", 0.0, reproducibility},
    };
    std::size_t failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string note;
        if (c.budget_seconds > 0.0 && secs > c.budget_seconds) {
            o.pass = false;
            note = " [over " + fmt(c.budget_seconds) + " s budget]";
        }
        if (!o.pass) ++failed;
        std::printf("%s  %s: %s (%.2f s)%s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), secs,
                    note.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
