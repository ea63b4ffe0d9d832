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

// JSON run configuration: strict schema validation (unknown keys are errors,
// reported with their JSON-pointer path) and construction of rho.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "gaplab/experiments.hpp"

namespace gaplab::runner {

using nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& msg)
        : std::runtime_error((path.empty() ? std::string("/") : path) + ": " + msg), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// Typed accessor over a JSON object that tracks its pointer path.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    }

    const std::string& path() const { return path_; }
    bool has(const std::string& key) const { return j_.contains(key); }
    std::string at(const std::string& key) const { return path_ + "/" + key; }
    const json& raw(const std::string& key) const { return j_.at(key); }

    void allow_only(const std::set<std::string>& keys) const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!keys.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
    }

    Node child(const std::string& key) const {
        if (!has(key)) throw ConfigError(at(key), "missing required object");
        return Node(j_.at(key), at(key));
    }

    double number(const std::string& key) const {
        if (!has(key)) throw ConfigError(at(key), "missing required number");
        const auto& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(at(key), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(at(key), "must be finite");
        return x;
    }
    double number(const std::string& key, double dflt) const { return has(key) ? number(key) : dflt; }

    std::size_t count(const std::string& key) const {
        if (!has(key)) throw ConfigError(at(key), "missing required integer");
        const auto& v = j_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw ConfigError(at(key), "expected a nonnegative integer");
        return v.get<std::size_t>();
    }
    std::size_t count(const std::string& key, std::size_t dflt) const { return has(key) ? count(key) : dflt; }

    std::size_t positive(const std::string& key) const {
        const auto v = count(key);
        if (v == 0) throw ConfigError(at(key), "must be positive");
        return v;
    }
    std::size_t positive(const std::string& key, std::size_t dflt) const { return has(key) ? positive(key) : dflt; }

    bool flag(const std::string& key, bool dflt) const {
        if (!has(key)) return dflt;
        if (!j_.at(key).is_boolean()) throw ConfigError(at(key), "expected true or false");
        return j_.at(key).get<bool>();
    }

    std::string text(const std::string& key, const std::string& dflt, const std::vector<std::string>& choices) const {
        if (!has(key)) return dflt;
        if (!j_.at(key).is_string()) throw ConfigError(at(key), "expected a string");
        auto s = j_.at(key).get<std::string>();
        if (!choices.empty() && std::find(choices.begin(), choices.end(), s) == choices.end()) {
            std::string all;
            for (const auto& c : choices) all += (all.empty() ? "" : ", ") + c;
            throw ConfigError(at(key), "'" + s + "' is not one of {" + all + "}");
        }
        return s;
    }

    std::vector<double> numbers(const std::string& key) const {
        const auto& v = j_.at(key);
        if (!v.is_array()) throw ConfigError(at(key), "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ConfigError(at(key) + "/" + std::to_string(i), "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::vector<std::size_t> counts(const std::string& key) const {
        const auto& v = j_.at(key);
        if (!v.is_array()) throw ConfigError(at(key), "expected an array of integers");
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number_integer() || v[i].get<long long>() <= 0)
                throw ConfigError(at(key) + "/" + std::to_string(i), "expected a positive integer");
            out.push_back(v[i].get<std::size_t>());
        }
        return out;
    }

    /// Either an explicit list or {"lo", "hi", "points", "spacing": geometric|linear}.
    std::vector<double> grid(const std::string& key, const std::vector<double>& dflt) const {
        if (!has(key)) return dflt;
        std::vector<double> g;
        if (j_.at(key).is_array()) {
            g = numbers(key);
        } else {
            const Node n = child(key);
            n.allow_only({"lo", "hi", "points", "spacing"});
            const double lo = n.number("lo");
            const double hi = n.number("hi");
            const auto pts = n.positive("points");
            const auto spacing = n.text("spacing", "geometric", {"geometric", "linear"});
            if (hi < lo) throw ConfigError(n.at("hi"), "must be >= lo");
            if (spacing == "geometric") {
                if (!(lo > 0.0)) throw ConfigError(n.at("lo"), "geometric grids need lo > 0");
                g = geometric_grid(lo, hi, pts);
            } else {
                g = linear_grid(lo, hi, pts);
            }
        }
        if (g.empty()) throw ConfigError(at(key), "grid is empty");
        for (double x : g)
            if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError(at(key), "grid values must be finite and >= 0");
        return g;
    }

private:
    const json& j_;
    std::string path_;
};

inline const std::vector<std::string>& experiment_tags() {
    static const std::vector<std::string> tags{"canonical", "levy",  "dynamics", "conditional", "delta",
                                               "vmf",       "theta", "entropy",  "gaussian",    "variance"};
    return tags;
}

inline HilbertDim parse_shape(const Node& cfg) {
    if (cfg.has("shape") && cfg.has("dim")) throw ConfigError(cfg.at("dim"), "give either shape or dim, not both");
    if (cfg.has("shape")) {
        const Node s = cfg.child("shape");
        s.allow_only({"d_a", "d_b"});
        return HilbertDim(s.positive("d_a"), s.positive("d_b"));
    }
    if (cfg.has("dim")) return HilbertDim::flat(cfg.positive("dim"));
    throw ConfigError(cfg.at("shape"), "missing: give shape {d_a, d_b} or dim");
}

inline std::vector<double> read_numbers_file(const std::string& path, const std::string& where) {
    std::ifstream in(path);
    if (!in) throw ConfigError(where, "cannot open '" + path + "'");
    std::vector<double> v;
    std::string tok;
    while (in >> tok) {
        if (tok[0] == '#') {
            std::getline(in, tok);
            continue;
        }
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError(where, "'" + tok + "' in '" + path + "' is not a number");
        }
    }
    if (v.empty()) throw ConfigError(where, "'" + path + "' contains no numbers");
    return v;
}

/// Gibbs weights exp(-beta E_n) / Z, computed with the minimum energy shifted to 0.
inline std::vector<double> thermal_weights(const std::vector<double>& energies, double beta) {
    const double e0 = beta >= 0.0 ? *std::min_element(energies.begin(), energies.end())
                                  : *std::max_element(energies.begin(), energies.end());
    std::vector<double> p(energies.size());
    double z = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) z += (p[i] = std::exp(-beta * (energies[i] - e0)));
    for (auto& v : p) v /= z;
    return p;
}

/// Builds rho from the "rho" object:
///   {"kind": "uniform"}
///   {"kind": "projection", "rank": R}
///   {"kind": "thermal", "beta": b, one of "energies": [...], "energies_file": path,
///                       "synthetic": "linear" | "gue"}
///   {"kind": "eigenvalues", "values": [...]}       (normalized; sorted internally)
///   {"kind": "near_pure", "p": p}                   p|0><0| + (1-p)(I-|0><0|)/(D-1)
///   {"kind": "sqrt_peak"}                           one eigenvalue 1/sqrt(D), rest equal
/// plus optional "basis": "computational" | "haar".
inline DensityMatrix parse_rho(const Node& cfg, const HilbertDim& shape, std::uint64_t seed) {
    const std::size_t D = shape.D();
    if (!cfg.has("rho")) return DensityMatrix::maximally_mixed(shape);
    const Node r = cfg.child("rho");
    const auto kind =
        r.text("kind", "", {"uniform", "projection", "thermal", "eigenvalues", "near_pure", "sqrt_peak"});
    if (kind.empty()) throw ConfigError(r.at("kind"), "missing required string");
    std::vector<double> p;
    if (kind == "uniform") {
        r.allow_only({"kind", "basis"});
        p.assign(D, 1.0 / static_cast<double>(D));
    } else if (kind == "projection") {
        r.allow_only({"kind", "rank", "basis"});
        const auto R = r.positive("rank");
        if (R > D) throw ConfigError(r.at("rank"), "rank exceeds the dimension " + std::to_string(D));
        p.assign(D, 0.0);
        for (std::size_t i = 0; i < R; ++i) p[i] = 1.0 / static_cast<double>(R);
    } else if (kind == "thermal") {
        r.allow_only({"kind", "beta", "energies", "energies_file", "synthetic", "basis"});
        const double beta = r.number("beta");
        const int sources = int(r.has("energies")) + int(r.has("energies_file")) + int(r.has("synthetic"));
        if (sources != 1) throw ConfigError(r.path(), "thermal needs exactly one of energies, energies_file, synthetic");
        std::vector<double> e;
        if (r.has("energies")) {
            e = r.numbers("energies");
        } else if (r.has("energies_file")) {
            e = read_numbers_file(r.text("energies_file", "", {}), r.at("energies_file"));
        } else {
            const auto syn = r.text("synthetic", "linear", {"linear", "gue"});
            if (syn == "linear") {
                e = linear_grid(-1.0, 1.0, D);
            } else {
                Stream hr(seed, keys::kHamiltonian);
                Eigen::SelfAdjointEigenSolver<Matrix> es(gue_hamiltonian(D, hr), Eigen::EigenvaluesOnly);
                e.assign(es.eigenvalues().data(), es.eigenvalues().data() + D);
            }
        }
        if (e.size() != D)
            throw ConfigError(r.path(), "spectrum has " + std::to_string(e.size()) + " energies, dimension is " +
                                            std::to_string(D));
        p = thermal_weights(e, beta);
    } else if (kind == "eigenvalues") {
        r.allow_only({"kind", "values", "basis"});
        p = r.numbers("values");
        if (p.size() != D)
            throw ConfigError(r.at("values"),
                              "has " + std::to_string(p.size()) + " entries, dimension is " + std::to_string(D));
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] < 0.0) throw ConfigError(r.at("values") + "/" + std::to_string(i), "must be nonnegative");
            s += p[i];
        }
        if (!(s > 0.0)) throw ConfigError(r.at("values"), "must not all vanish");
        for (auto& v : p) v /= s;
    } else if (kind == "near_pure") {
        r.allow_only({"kind", "p", "basis"});
        const double q = r.number("p");
        if (!(q > 0.0 && q < 1.0)) throw ConfigError(r.at("p"), "must lie in (0, 1)");
        if (D < 2) throw ConfigError(r.path(), "near_pure needs D >= 2");
        p.assign(D, (1.0 - q) / static_cast<double>(D - 1));
        p[0] = q;
    } else {
        r.allow_only({"kind", "basis"});
        if (D < 2) throw ConfigError(r.path(), "sqrt_peak needs D >= 2");
        const double top = 1.0 / std::sqrt(static_cast<double>(D));
        p.assign(D, (1.0 - top) / static_cast<double>(D - 1));
        p[0] = top;
    }
    const auto basis = r.text("basis", "computational", {"computational", "haar"});
    if (basis == "haar") {
        Stream br(seed, keys::kSetup, 1);
        std::sort(p.begin(), p.end(), std::greater<>());
        return DensityMatrix::from_spectrum(p, haar_unitary(D, br), shape);
    }
    return DensityMatrix::diagonal(p, shape);
}

struct OutputSpec {
    std::string dir = ".";
    std::string prefix;
};

/// A validated configuration: the canonical form (hashed and echoed into
/// outputs, excluding worker count and output location) plus run settings.
struct RunConfig {
    json canonical;
    std::string experiment;
    std::uint64_t seed = 1;
    unsigned workers = 0;  // 0: all cores
    OutputSpec output;
};

inline const std::set<std::string>& common_keys() {
    static const std::set<std::string> k{"experiment", "seed", "workers", "output"};
    return k;
}

inline std::set<std::string> experiment_keys(const std::string& tag) {
    std::set<std::string> k = common_keys();
    auto add = [&](std::initializer_list<const char*> extra) {
        for (const char* e : extra) k.insert(e);
    };
    if (tag == "canonical") add({"shape", "dim", "rho", "truncate", "n", "eps", "measure", "atoms"});
    if (tag == "entropy") add({"shape", "dim", "rho", "truncate", "n", "eps"});
    if (tag == "levy") add({"shape", "dim", "rho", "truncate", "n", "eps", "f", "compare_uniform"});
    if (tag == "gaussian") add({"shape", "dim", "rho", "truncate", "n", "eps", "r", "f"});
    if (tag == "dynamics") add({"shape", "dim", "rho", "truncate", "n", "eps", "n_t", "T"});
    if (tag == "conditional")
        add({"shape", "dim", "rho", "truncate", "n_outer", "n_inner", "n_ref", "functions", "born", "f", "full_haar",
             "eps"});
    if (tag == "delta") add({"shape", "dim", "rho", "truncate", "n", "eps", "atoms"});
    if (tag == "vmf") add({"dims", "kappas", "n", "eps"});
    if (tag == "theta") add({"shape", "p", "n", "bins"});
    if (tag == "variance") add({"dim", "cases", "n", "exact_cases"});
    return k;
}

/// Validates the whole document (including every experiment-specific key)
/// without running anything. Throws ConfigError.
inline RunConfig validate_config(const json& doc, std::optional<std::uint64_t> seed_override = std::nullopt,
                                 std::optional<unsigned> workers_override = std::nullopt) {
    const Node cfg(doc, "");
    RunConfig rc;
    rc.experiment = cfg.text("experiment", "", experiment_tags());
    if (rc.experiment.empty()) throw ConfigError("/experiment", "missing required string");
    cfg.allow_only(experiment_keys(rc.experiment));
    if (cfg.has("seed")) {
        const auto& s = cfg.raw("seed");
        if (!s.is_number_unsigned()) throw ConfigError("/seed", "expected a nonnegative integer");
        rc.seed = s.get<std::uint64_t>();
    }
    if (seed_override) rc.seed = *seed_override;
    rc.workers = static_cast<unsigned>(cfg.count("workers", 0));
    if (workers_override) rc.workers = *workers_override;
    if (cfg.has("output")) {
        const Node o = cfg.child("output");
        o.allow_only({"dir", "prefix"});
        rc.output.dir = o.text("dir", ".", {});
        rc.output.prefix = o.text("prefix", "", {});
    }
    if (rc.output.prefix.empty()) rc.output.prefix = rc.experiment;
    rc.canonical = doc;
    rc.canonical.erase("workers");
    rc.canonical.erase("output");
    rc.canonical["seed"] = rc.seed;
    return rc;
}

}  // namespace gaplab::runner
