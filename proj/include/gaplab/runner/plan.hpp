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

#include <functional>
#include <memory>
#include <string>

#include "gaplab/runner/config.hpp"

namespace gaplab::runner {

/// A fully parsed experiment, ready to execute.
using Plan = std::function<ExperimentRecord(const RunContext&)>;

namespace detail {

inline DensityMatrix parse_state(const Node& cfg, std::uint64_t seed) {
    const HilbertDim shape = parse_shape(cfg);
    DensityMatrix rho = parse_rho(cfg, shape, seed);
    if (cfg.has("truncate")) {
        const auto n = cfg.positive("truncate");
        if (n > shape.D()) throw ConfigError(cfg.at("truncate"), "must not exceed the dimension");
        rho = truncate_density(rho, n);
    }
    return rho;
}

inline AtomBasis parse_atoms(const Node& cfg) {
    return cfg.text("atoms", "eigen", {"eigen", "haar_random"}) == "eigen" ? AtomBasis::Eigen : AtomBasis::HaarRandom;
}

}  // namespace detail

/// Parses every experiment-specific setting; nothing is sampled here except
/// optional random bases of rho, which depend only on the seed.
inline Plan make_plan(const RunConfig& rc) {
    const json& doc = rc.canonical;
    const Node cfg(doc, "");
    const std::string& tag = rc.experiment;
    const std::uint64_t seed = rc.seed;

    if (tag == "canonical") {
        auto rho = std::make_shared<DensityMatrix>(detail::parse_state(cfg, seed));
        CanonicalOptions o;
        o.n = cfg.count("n", o.n);
        o.eps_grid = cfg.grid("eps", o.eps_grid);
        o.measure = *measure_kind_from_string(cfg.text("measure", "gap", {"gap", "uniform", "delta"}));
        o.atoms = detail::parse_atoms(cfg);
        return [rho, o](const RunContext& ctx) { return run_canonical_typicality(*rho, o, ctx); };
    }
    if (tag == "entropy") {
        auto rho = std::make_shared<DensityMatrix>(detail::parse_state(cfg, seed));
        EntropyOptions o;
        o.n = cfg.count("n", o.n);
        o.eps_grid = cfg.grid("eps", o.eps_grid);
        return [rho, o](const RunContext& ctx) { return run_entropy_typicality(*rho, o, ctx); };
    }
    if (tag == "levy") {
        auto rho = std::make_shared<DensityMatrix>(detail::parse_state(cfg, seed));
        LevyOptions o;
        o.n = cfg.count("n", o.n);
        o.eps_grid = cfg.grid("eps", o.eps_grid);
        o.constant_f = cfg.text("f", "alternating", {"alternating", "constant"}) == "constant";
        o.compare_uniform = cfg.flag("compare_uniform", o.compare_uniform);
        return [rho, o](const RunContext& ctx) { return run_levy_gap(*rho, o, ctx); };
    }
    if (tag == "gaussian") {
        auto rho = std::make_shared<DensityMatrix>(detail::parse_state(cfg, seed));
        GaussianOptions o;
        o.n = cfg.count("n", o.n);
        o.eps_grid = cfg.grid("eps", o.eps_grid);
        o.r_grid = cfg.grid("r", o.r_grid);
        o.constant_f = cfg.text("f", "linear", {"linear", "constant"}) == "constant";
        return [rho, o](const RunContext& ctx) { return run_gaussian_concentration(*rho, o, ctx); };
    }
    if (tag == "dynamics") {
        auto rho = std::make_shared<DensityMatrix>(detail::parse_state(cfg, seed));
        DynamicsOptions o;
        o.n = cfg.count("n", o.n);
        o.eps_grid = cfg.grid("eps", o.eps_grid);
        o.n_t = cfg.count("n_t", o.n_t);
        if (o.n_t < 2) throw ConfigError("/n_t", "must be at least 2");
        if (cfg.has("T")) {
            o.T = cfg.number("T");
            if (!(*o.T > 0.0)) throw ConfigError("/T", "must be positive");
        }
        return [rho, o](const RunContext& ctx) { return run_dynamical_typicality(*rho, o, ctx); };
    }
    if (tag == "conditional") {
        auto rho = std::make_shared<DensityMatrix>(detail::parse_state(cfg, seed));
        ConditionalOptions o;
        o.n_outer = cfg.count("n_outer", o.n_outer);
        o.n_inner = cfg.positive("n_inner", o.n_inner);
        o.n_ref = cfg.positive("n_ref", o.n_ref);
        o.n_functions = cfg.positive("functions", o.n_functions);
        const auto born = cfg.text("born", "exact", {"exact", "sampled", "both"});
        o.born = born == "exact" ? BornMode::Exact : born == "sampled" ? BornMode::Sampled : BornMode::Both;
        o.constant_f = cfg.text("f", "projectors", {"projectors", "constant"}) == "constant";
        o.full_haar = cfg.flag("full_haar", o.full_haar);
        o.eps_grid = cfg.grid("eps", o.eps_grid);
        return [rho, o](const RunContext& ctx) { return run_conditional_born(*rho, o, ctx); };
    }
    if (tag == "delta") {
        auto rho = std::make_shared<DensityMatrix>(detail::parse_state(cfg, seed));
        DeltaOptions o;
        o.n = cfg.count("n", o.n);
        o.eps_grid = cfg.grid("eps", o.eps_grid);
        o.atoms = detail::parse_atoms(cfg);
        return [rho, o](const RunContext& ctx) { return run_counterexample_delta(*rho, o, ctx); };
    }
    if (tag == "vmf") {
        VmfOptions o;
        if (cfg.has("dims")) o.dims = cfg.counts("dims");
        for (std::size_t i = 0; i < o.dims.size(); ++i)
            if (o.dims[i] < 2) throw ConfigError("/dims/" + std::to_string(i), "must be at least 2");
        if (cfg.has("kappas")) o.kappas = cfg.numbers("kappas");
        for (std::size_t i = 0; i < o.kappas.size(); ++i)
            if (!(o.kappas[i] >= 0.0)) throw ConfigError("/kappas/" + std::to_string(i), "must be nonnegative");
        o.n = cfg.count("n", o.n);
        o.eps_grid = cfg.grid("eps", o.eps_grid);
        return [o](const RunContext& ctx) { return run_counterexample_vmf(o, ctx); };
    }
    if (tag == "theta") {
        ThetaOptions o;
        if (cfg.has("shape")) {
            const Node s = cfg.child("shape");
            s.allow_only({"d_a", "d_b"});
            o.shape = HilbertDim(s.positive("d_a"), s.positive("d_b"));
        }
        o.D = o.shape.D();
        if (o.D < 2) throw ConfigError("/shape", "dimension must be at least 2");
        o.p = cfg.number("p", o.p);
        if (!(o.p > 0.0 && o.p < 1.0)) throw ConfigError("/p", "must lie in (0, 1)");
        o.n = cfg.count("n", o.n);
        o.bins = cfg.positive("bins", o.bins);
        return [o](const RunContext& ctx) { return run_theta_density(o, ctx); };
    }
    if (tag == "variance") {
        VarianceOptions o;
        o.D = cfg.positive("dim", o.D);
        if (o.D < 5) throw ConfigError("/dim", "must be at least 5 so that ||rho|| < 1/4 is attainable");
        o.cases = cfg.count("cases", o.cases);
        o.n = cfg.count("n", o.n);
        if (o.n < 2) throw ConfigError("/n", "must be at least 2");
        o.exact_cases = cfg.count("exact_cases", o.exact_cases);
        return [o](const RunContext& ctx) { return run_variance_soundness(o, ctx); };
    }
    throw ConfigError("/experiment", "unsupported experiment '" + tag + "'");
}

}  // namespace gaplab::runner
