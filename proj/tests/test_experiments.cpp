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

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "gaplab/experiments.hpp"
#include "gaplab/runner/io.hpp"
#include "test_support.hpp"

namespace gaplab {
namespace {

using testing::random_dm_matrix;
using testing::random_unit;

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return k;
}

DensityMatrix mixed(std::size_t da, std::size_t db) { return DensityMatrix::maximally_mixed({da, db}); }

DensityMatrix product_pure(std::size_t da, std::size_t db, std::uint64_t seed) {
    Stream rng(seed, 99);
    return DensityMatrix::pure(PureState::product(random_unit(da, rng), random_unit(db, rng)));
}

std::size_t total_count(const ExperimentRecord& rec, const std::string& group) {
    std::size_t c = 0;
    for (const auto& r : rec.rows)
        if (r.group == group) c += r.count;
    return c;
}

bool has_group(const ExperimentRecord& rec, const std::string& group) {
    for (const auto& r : rec.rows)
        if (r.group == group) return true;
    return false;
}

const Check* find_check(const ExperimentRecord& rec, const std::string& name) {
    for (const auto& c : rec.checks)
        if (c.name == name) return &c;
    return nullptr;
}

// --- canonical -------------------------------------------------------------

TEST(Canonical, MaximallyMixedIsSoundWithAllBoundFamilies) {
    CanonicalOptions o;
    o.n = 2000;
    const auto rec = run_canonical_typicality(mixed(4, 64), o, {7, 1});
    EXPECT_TRUE(rec.soundness_ok()) << rec.soundness_violations() << " violations";
    for (const char* g : {"exp", "poly", "unif-poly", "unif-exp"}) EXPECT_TRUE(has_group(rec, g)) << g;
    EXPECT_EQ(rec.rows.size(), 4 * o.eps_grid.size());
    // Haar average: E tr rho_a^2 = (d_a + d_b) / (D + 1), and ||X||_tr <= sqrt(d_a) ||X||_HS.
    const double hs2 = (4.0 + 64.0) / 257.0 - 0.25;
    EXPECT_LT(rec.summaries.at("deviation").mean, 2.0 * std::sqrt(hs2));
}

TEST(Canonical, PureProductStateHasNoDeviation) {
    CanonicalOptions o;
    o.n = 200;
    const auto rec = run_canonical_typicality(product_pure(3, 5, 1), o, {2, 1});
    EXPECT_LT(rec.summaries.at("deviation").max, 1e-10);
    EXPECT_EQ(total_count(rec, "exp"), 0u);
}

TEST(Canonical, DeltaRowsAreExcludedFromSoundness) {
    CanonicalOptions o;
    o.n = 300;
    o.measure = MeasureKind::DeltaMixture;
    const auto rec = run_canonical_typicality(mixed(2, 8), o, {3, 1});
    for (const auto& r : rec.rows) EXPECT_FALSE(r.in_soundness);
    EXPECT_NEAR(rec.summaries.at("deviation").min, 1.0, 1e-10);
}

TEST(Canonical, DeviationIsEquivariantUnderLocalUnitaries) {
    Stream rng(11, 0);
    const HilbertDim shape{2, 8};
    const Matrix r = random_dm_matrix(16, rng);
    const Matrix u = kron(haar_unitary(2, rng), haar_unitary(8, rng));
    const auto rho = DensityMatrix::from_matrix(r, shape);
    const auto rho_u = DensityMatrix::from_matrix(u * r * u.adjoint(), shape);
    CanonicalOptions o;
    o.n = 4000;
    o.eps_grid = geometric_grid(0.05, 1.0, 8);
    const auto a = run_canonical_typicality(rho, o, {21, 1});
    const auto b = run_canonical_typicality(rho_u, o, {22, 1});
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const double p1 = a.rows[i].wilson.estimate, p2 = b.rows[i].wilson.estimate;
        const double pooled = 0.5 * (p1 + p2);
        const double se = std::sqrt(pooled * (1.0 - pooled) * 2.0 / static_cast<double>(o.n));
        if (se == 0.0) {
            EXPECT_EQ(p1, p2);
            continue;
        }
        EXPECT_LT(std::abs(p1 - p2) / se, 4.0) << a.rows[i].group << " eps=" << a.rows[i].param;
    }
}

// --- entropy ---------------------------------------------------------------

TEST(Entropy, SmallSubsystemIsNearlyMaximal) {
    EntropyOptions o;
    o.n = 300;
    const auto rec = run_entropy_typicality(mixed(2, 1024), o, {5, 1});
    EXPECT_LT(rec.summaries.at("entropy_gap").median, 0.05);
    EXPECT_NEAR(rec.metrics.at("reference_entropy"), std::log(2.0), 1e-12);
}

TEST(Entropy, PureProductGivesZero) {
    EntropyOptions o;
    o.n = 100;
    const auto rec = run_entropy_typicality(product_pure(2, 4, 3), o, {5, 1});
    EXPECT_LT(rec.summaries.at("entropy_gap").max, 1e-8);
}

TEST(Entropy, GapShrinksWithEnvironment) {
    EntropyOptions o;
    o.n = 300;
    const auto small = run_entropy_typicality(mixed(4, 16), o, {5, 1});
    const auto large = run_entropy_typicality(mixed(4, 256), o, {5, 1});
    EXPECT_LT(large.summaries.at("entropy_gap").median, 0.5 * small.summaries.at("entropy_gap").median);
}

// --- Levy ------------------------------------------------------------------

TEST(Levy, ConstantFunctionNeverDeviates) {
    LevyOptions o;
    o.n = 400;
    o.constant_f = true;
    const auto rec = run_levy_gap(mixed(8, 8), o, {1, 1});
    for (const auto& r : rec.rows) EXPECT_EQ(r.count, 0u) << r.group;
    EXPECT_DOUBLE_EQ(rec.metrics.at("reference_mean"), 1.0);
}

TEST(Levy, MaximallyMixedIsSoundAndMatchesUniform) {
    LevyOptions o;
    o.n = 4000;
    const auto rec = run_levy_gap(mixed(1024, 1), o, {9, 1});
    EXPECT_TRUE(rec.soundness_ok());
    EXPECT_TRUE(rec.all_checks_pass());
    ASSERT_NE(find_check(rec, "gap_matches_uniform"), nullptr);
    EXPECT_TRUE(has_group(rec, "levy-uniform"));
}

TEST(Levy, RejectsMismatchedObservable) {
    LevyOptions o;
    o.observable = alternating_observable(3);
    EXPECT_THROW(run_levy_gap(mixed(4, 1), o, {1, 1}), DimensionError);
}

TEST(Levy, TruncatedReferenceConvergesToTrace) {
    Stream rng(4, 0);
    const std::size_t D = 32;
    std::vector<double> p(D);
    double s = 0.0;
    for (auto& v : p) s += (v = rng.exponential());
    for (auto& v : p) v /= s;
    const auto rho = DensityMatrix::diagonal(p, HilbertDim::flat(D));
    const Observable B = alternating_observable(D);
    const double target = (B.matrix() * rho.matrix()).trace().real();
    for (std::size_t n : {4u, 16u, 32u}) {
        const auto rho_n = truncate_density(rho, n);
        LevyOptions o;
        o.n = 8000;
        o.observable = B;
        const auto rec = run_levy_gap(rho_n, o, {13, 1});
        const double err = std::abs(rec.metrics.at("reference_mean") - target);
        const double allowed = B.norm() * trace_norm_hermitian(rho_n.matrix() - rho.matrix()) +
                               4.0 * rec.metrics.at("reference_std_error");
        EXPECT_LE(err, allowed) << "n=" << n;
        if (n == D) {
            EXPECT_LT(err / rec.metrics.at("reference_std_error"), 4.0);
        }
    }
}

// --- Gaussian --------------------------------------------------------------

TEST(Gaussian, ConstantFunctionHasEmptyTails) {
    GaussianOptions o;
    o.n = 500;
    o.constant_f = true;
    const auto rec = run_gaussian_concentration(mixed(16, 1), o, {1, 1});
    EXPECT_EQ(total_count(rec, "gauss-conc"), 0u);
    EXPECT_EQ(total_count(rec, "ga-conc"), 0u);
}

TEST(Gaussian, SoundAtMaximallyMixed) {
    GaussianOptions o;
    o.n = 20000;
    const auto rec = run_gaussian_concentration(mixed(64, 1), o, {3, 1});
    EXPECT_TRUE(rec.soundness_ok()) << rec.soundness_violations();
    EXPECT_NEAR(rec.metrics.at("gaussian_mean_sq_norm"), 1.0, 0.01);
    EXPECT_TRUE(has_group(rec, "ga-tail"));
}

// --- dynamics --------------------------------------------------------------

TEST(Dynamics, InvariantStateHasConstantReference) {
    DynamicsOptions o;
    o.n = 60;
    o.n_t = 32;
    o.T = 10.0;
    const auto rec = run_dynamical_typicality(mixed(4, 16), o, {6, 1});
    const Check* c = find_check(rec, "invariant_reference");
    ASSERT_NE(c, nullptr);
    EXPECT_TRUE(c->passed) << c->detail;
    EXPECT_TRUE(rec.soundness_ok());
}

TEST(Dynamics, NonCommutingStateSkipsInvariantCheck) {
    Stream rng(2, 0);
    DynamicsOptions o;
    o.n = 40;
    o.n_t = 32;
    o.T = 5.0;
    const auto rho = DensityMatrix::from_matrix(random_dm_matrix(16, rng), {4, 4});
    const auto rec = run_dynamical_typicality(rho, o, {6, 1});
    EXPECT_EQ(find_check(rec, "invariant_reference"), nullptr);
    EXPECT_GT(rec.metrics.at("commutator_norm"), 1e-6);
    EXPECT_TRUE(rec.soundness_ok());
}

TEST(Dynamics, TrapezoidConvergesOnFineGrid) {
    DynamicsOptions o;
    o.n = 60;
    o.n_t = 64;
    o.T = 10.0;
    const auto rec = run_dynamical_typicality(mixed(4, 16), o, {8, 1});
    EXPECT_LT(rec.metrics.at("trapezoid_rel_change_observable"), 0.01);
    EXPECT_LT(rec.metrics.at("trapezoid_rel_change_reduced"), 0.01);
}

TEST(Dynamics, RejectsTooFewNodes) {
    DynamicsOptions o;
    o.n_t = 1;
    EXPECT_THROW(run_dynamical_typicality(mixed(2, 2), o, {1, 1}), std::invalid_argument);
}

// --- conditional -----------------------------------------------------------

TEST(Conditional, ConstantFunctionGivesZeroGap) {
    ConditionalOptions o;
    o.n_outer = 20;
    o.n_ref = 200;
    o.constant_f = true;
    const auto rec = run_conditional_born(mixed(4, 16), o, {1, 1});
    EXPECT_DOUBLE_EQ(rec.summaries.at("born_gap").max, 0.0);
}

TEST(Conditional, SampledBornMatchesExact) {
    ConditionalOptions o;
    o.n_outer = 30;
    o.n_inner = 2000;
    o.n_ref = 4000;
    o.born = BornMode::Both;
    const auto rec = run_conditional_born(mixed(4, 16), o, {12, 1});
    EXPECT_TRUE(rec.all_checks_pass());
    ASSERT_NE(find_check(rec, "exact_matches_sampled"), nullptr);
    EXPECT_EQ(rec.summaries.count("born_gap_f4"), 1u);
}

TEST(Conditional, FullHaarAgreesWithReducedSampler) {
    ConditionalOptions o;
    o.n_outer = 400;
    o.n_ref = 4000;
    auto reduced = run_conditional_born(mixed(2, 8), o, {31, 1});
    o.full_haar = true;
    auto full = run_conditional_born(mixed(2, 8), o, {32, 1});
    const double a = reduced.summaries.at("born_gap").mean, b = full.summaries.at("born_gap").mean;
    EXPECT_NEAR(a, b, 0.25 * std::max(a, b));
}

// --- counterexamples -------------------------------------------------------

TEST(Delta, EigenbasisAtomsAreExact) {
    DeltaOptions o;
    o.n = 500;
    const auto rec = run_counterexample_delta(mixed(4, 8), o, {1, 1});
    const Check* c = find_check(rec, "atom_deviation_exact");
    ASSERT_NE(c, nullptr);
    EXPECT_TRUE(c->passed) << c->detail;
    EXPECT_NEAR(rec.summaries.at("deviation").median, 1.5, 1e-10);
    EXPECT_EQ(rec.tables.at("atoms").rows.size(), 32u);
}

TEST(Delta, TrivialSubsystemGivesZero) {
    DeltaOptions o;
    o.n = 100;
    const auto rec = run_counterexample_delta(mixed(1, 16), o, {1, 1});
    EXPECT_LT(rec.summaries.at("deviation").max, 1e-12);
}

TEST(Delta, HaarAtomsAreNearlyTypical) {
    DeltaOptions o;
    o.n = 500;
    o.atoms = AtomBasis::HaarRandom;
    const auto rec = run_counterexample_delta(mixed(2, 512), o, {1, 1});
    EXPECT_LT(rec.summaries.at("deviation").median, 0.1);
}

TEST(Vmf, MeansMatchQuadrature) {
    VmfOptions o;
    o.dims = {8, 32};
    o.kappas = {0.0, 4.0};
    o.n = 3000;
    const auto rec = run_counterexample_vmf(o, {1, 1});
    EXPECT_EQ(rec.checks.size(), 4u);
    EXPECT_TRUE(rec.all_checks_pass());
    for (const auto& r : rec.rows) EXPECT_FALSE(r.in_soundness);
}

TEST(Theta, SmallRunNormalizes) {
    ThetaOptions o;
    o.shape = {4, 64};
    o.D = 256;
    o.n = 2000;
    const auto rec = run_theta_density(o, {1, 1});
    const Check* c = find_check(rec, "density_normalizes");
    ASSERT_NE(c, nullptr);
    EXPECT_TRUE(c->passed) << c->detail;
    EXPECT_EQ(rec.tables.at("theta_hist").rows.size(), o.bins);
}

TEST(Theta, TinyWeightPushesAngleToRight) {
    ThetaOptions o;
    o.shape = {4, 64};
    o.D = 256;
    o.p = 2.0 / 256.0;
    o.n = 1000;
    const auto rec = run_theta_density(o, {1, 1});
    EXPECT_GT(rec.summaries.at("theta").median, 1.3);
    EXPECT_LE(rec.summaries.at("theta").max, 0.5 * std::numbers::pi);
}

TEST(Variance, SmallRunPasses) {
    VarianceOptions o;
    o.cases = 3;
    o.D = 16;
    o.n = 3000;
    o.exact_cases = 2;
    const auto rec = run_variance_soundness(o, {4, 1});
    EXPECT_TRUE(rec.all_checks_pass());
    EXPECT_EQ(rec.tables.at("cases").rows.size(), 3u);
}

// --- reproducibility -------------------------------------------------------

TEST(Reproducibility, CanonicalIndependentOfWorkers) {
    CanonicalOptions o;
    o.n = 9000;  // spans several chunks
    const auto a = run_canonical_typicality(mixed(4, 16), o, {17, 1});
    const auto b = run_canonical_typicality(mixed(4, 16), o, {17, 3});
    EXPECT_EQ(tail_csv(a), tail_csv(b));
    EXPECT_EQ(summary_json(a).dump(), summary_json(b).dump());
}

TEST(Reproducibility, ConditionalIndependentOfWorkers) {
    ConditionalOptions o;
    o.n_outer = 150;
    o.n_ref = 500;
    o.born = BornMode::Both;
    o.n_inner = 200;
    const auto a = run_conditional_born(mixed(2, 8), o, {5, 1});
    const auto b = run_conditional_born(mixed(2, 8), o, {5, 3});
    EXPECT_EQ(summary_json(a).dump(), summary_json(b).dump());
}

TEST(Reproducibility, SeedChangesOutput) {
    CanonicalOptions o;
    o.n = 500;
    EXPECT_NE(tail_csv(run_canonical_typicality(mixed(4, 16), o, {1, 1})),
              tail_csv(run_canonical_typicality(mixed(4, 16), o, {2, 1})));
}

// --- records and files -----------------------------------------------------

TEST(Record, TailCsvLayout) {
    CanonicalOptions o;
    o.n = 100;
    const auto rec = run_canonical_typicality(mixed(2, 4), o, {3, 1});
    const auto csv = tail_csv(rec);
    const auto first = csv.substr(0, csv.find('\n'));
    EXPECT_EQ(first, "# config_hash=" + config_hash(rec.config) + " seed=3 version=" + kVersion);
    const auto second_start = csv.find('\n') + 1;
    EXPECT_EQ(csv.substr(second_start, csv.find('\n', second_start) - second_start), kTailCsvHeader);
    EXPECT_EQ(count_data_lines(csv), rec.rows.size());
}

TEST(Record, FormatDoubleRoundTrips) {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 4.9e-324, -2.5, 1e300, 0.0})
        EXPECT_EQ(std::strtod(format_double(x).c_str(), nullptr), x) << format_double(x);
    EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(format_double(std::nan("")), "nan");
    EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Record, ConfigHashIgnoresKeyOrder) {
    const auto a = nlohmann::json::parse(R"({"b": 1, "a": [1, 2]})");
    const auto b = nlohmann::json::parse(R"({"a": [1, 2], "b": 1})");
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_NE(config_hash(a), config_hash(nlohmann::json::parse(R"({"a": [2, 1], "b": 1})")));
    EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Record, CountDataLinesSkipsCommentsAndHeader) {
    EXPECT_EQ(count_data_lines(""), 0u);
    EXPECT_EQ(count_data_lines("# c\nh\n"), 0u);
    EXPECT_EQ(count_data_lines("# c\nh\n1\n2"), 2u);
}

TEST(Record, SoundnessIgnoresFlaggedRows) {
    ExperimentRecord rec;
    TailRow r;
    r.n = 100;
    r.count = 100;
    r.wilson = stats::wilson(100, 100);
    r.bound = bound_value({.tag = BoundTag::ExpEps, .d_a = 2.0, .eps = 1.0, .norm_rho = 1e-6});
    rec.rows.push_back(r);
    EXPECT_EQ(rec.soundness_violations(), 1u);
    rec.rows[0].in_soundness = false;
    EXPECT_TRUE(rec.soundness_ok());
}

// Column contracts relied on by the figure scripts.
TEST(PlotInputs, ThetaHistogramColumns) {
    ThetaOptions o;
    o.shape = {2, 32};
    o.D = 64;
    o.n = 200;
    o.bins = 10;
    const auto rec = run_theta_density(o, {1, 1});
    const auto csv = table_csv(rec, rec.tables.at("theta_hist"));
    const auto second = csv.find('\n') + 1;
    EXPECT_EQ(csv.substr(second, csv.find('\n', second) - second),
              "bin_lo,bin_hi,count,empirical_density,analytic_density");
    EXPECT_EQ(count_data_lines(csv), 10u);
}

TEST(PlotInputs, SummaryCarriesScalingAndTailFields) {
    CanonicalOptions o;
    o.n = 100;
    const auto j = summary_json(run_canonical_typicality(mixed(2, 8), o, {1, 1}));
    for (const char* k : {"config", "seed", "version", "rows", "checks", "summaries", "metrics"})
        EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_TRUE(j["summaries"]["deviation"].contains("median"));
    for (const char* k : {"group", "statistic", "param", "p_hat", "wilson_lo", "wilson_hi", "bound", "bound_clamped"})
        EXPECT_TRUE(j["rows"][0].contains(k)) << k;
}

TEST(Bundle, WritesChecksummedFiles) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "gaplab_bundle_test";
    fs::remove_all(dir);
    DeltaOptions o;
    o.n = 50;
    const auto rec = run_counterexample_delta(mixed(2, 4), o, {8, 1});
    const auto b = runner::write_bundle(rec, dir, "delta");
    ASSERT_TRUE(fs::exists(dir / "delta.csv"));
    ASSERT_TRUE(fs::exists(dir / "delta.atoms.csv"));
    ASSERT_TRUE(fs::exists(b.summary_path));
    for (const auto& f : b.files) {
        const auto content = runner::read_file(dir / f.name);
        EXPECT_EQ(f.checksum, hex64(fnv1a64(content)));
        EXPECT_EQ(f.rows, count_data_lines(content));
        const auto [hash, seed] = runner::csv_provenance(content);
        EXPECT_EQ(hash, config_hash(rec.config));
        EXPECT_EQ(seed, "8");
    }
    const auto s = nlohmann::json::parse(runner::read_file(b.summary_path));
    EXPECT_EQ(s["files"]["delta.atoms.csv"]["rows"], 8);
    EXPECT_FALSE(fs::exists(dir / "delta.csv.tmp"));
    fs::remove_all(dir);
}

}  // namespace
}  // namespace gaplab
