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

// Command-line front end: bounds, run, sample, verify, report.
//
// Exit codes:
//   0  success (run: every check and every soundness row passed)
//   1  verify found a mismatch
//   2  invalid arguments or configuration
//   3  computation or I/O failure
//   4  run finished and wrote its files, but a check or soundness row failed

#pragma once

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gaplab/runner/config.hpp"
#include "gaplab/runner/io.hpp"
#include "gaplab/runner/plan.hpp"

namespace gaplab::runner {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kMismatch = 1;
inline constexpr int kUsage = 2;
inline constexpr int kCompute = 3;
inline constexpr int kFailedCheck = 4;
}  // namespace exit_code

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// "0.1,0.2,0.5" or "lo:hi:points" (geometric) or "lo:hi:points:linear".
inline std::vector<double> parse_value_list(const std::string& text, const std::string& flag) {
    auto to_num = [&](const std::string& tok) {
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (const std::exception&) {
            throw UsageError(flag + ": '" + tok + "' is not a number");
        }
    };
    std::vector<std::string> parts;
    const char sep = text.find(':') != std::string::npos ? ':' : ',';
    std::stringstream ss(text);
    for (std::string tok; std::getline(ss, tok, sep);) parts.push_back(tok);
    if (parts.empty()) throw UsageError(flag + ": empty list");
    if (sep == ',') {
        std::vector<double> v;
        for (const auto& p : parts) v.push_back(to_num(p));
        return v;
    }
    if (parts.size() < 3 || parts.size() > 4) throw UsageError(flag + ": range must be lo:hi:points[:linear]");
    const double lo = to_num(parts[0]), hi = to_num(parts[1]);
    const double pts = to_num(parts[2]);
    if (!(pts >= 1.0) || pts != std::floor(pts)) throw UsageError(flag + ": points must be a positive integer");
    if (hi < lo) throw UsageError(flag + ": hi must be >= lo");
    const bool linear = parts.size() == 4;
    if (linear && parts[3] != "linear" && parts[3] != "geometric")
        throw UsageError(flag + ": spacing must be linear or geometric");
    if (linear && parts[3] == "linear") return linear_grid(lo, hi, static_cast<std::size_t>(pts));
    if (!(lo > 0.0)) throw UsageError(flag + ": geometric ranges need lo > 0");
    return geometric_grid(lo, hi, static_cast<std::size_t>(pts));
}

inline json load_json_file(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError& e) {
        throw ConfigError("", e.what());
    }
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", "'" + path + "' is not valid JSON: " + e.what());
    }
}

inline unsigned resolve_workers(unsigned w) { return w == 0 ? default_workers() : w; }

// ---------------------------------------------------------------------------
// bounds

struct BoundsArgs {
    std::string bound;
    std::optional<double> d_a, dim, norm_rho, purity, eta, norm_b, r;
    std::string eps, delta;
    std::string format = "summary";
    std::string out;
    bool list = false;
};

inline const std::vector<std::string> kBoundsColumns{"bound", "d_a",      "dim",    "eps",   "delta",
                                                     "norm_rho", "purity", "eta",   "norm_b", "r",
                                                     "log10_value", "value", "clamped", "hypothesis_ok"};

inline std::string opt_text(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

/// Evaluates one bound over the eps x delta product (both ascending).
inline std::vector<std::vector<std::string>> bounds_table(const BoundsArgs& a) {
    const auto tag = bound_tag_from_string(a.bound);
    if (!tag) {
        std::string all;
        for (const auto& info : kBoundTable) all += (all.empty() ? "" : ", ") + std::string(info.name);
        throw UsageError("--bound: unknown bound '" + a.bound + "' (one of " + all + ")");
    }
    std::vector<std::optional<double>> eps{std::nullopt}, delta{std::nullopt};
    auto fill = [](const std::string& text, const char* flag, std::vector<std::optional<double>>& dst) {
        if (text.empty()) return;
        auto v = parse_value_list(text, flag);
        std::stable_sort(v.begin(), v.end());
        dst.assign(v.begin(), v.end());
    };
    fill(a.eps, "--eps", eps);
    fill(a.delta, "--delta", delta);
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : eps) {
        for (const auto& d : delta) {
            BoundSpec s{.tag = *tag,
                        .d_a = a.d_a,
                        .dim = a.dim,
                        .eps = e,
                        .delta = d,
                        .norm_rho = a.norm_rho,
                        .purity = a.purity,
                        .eta = a.eta,
                        .norm_b = a.norm_b,
                        .r = a.r};
            const BoundValue v = bound_value(s);
            rows.push_back({a.bound, opt_text(s.d_a), opt_text(s.dim), opt_text(e), opt_text(d), opt_text(s.norm_rho),
                            opt_text(s.purity), opt_text(s.eta), opt_text(s.norm_b), opt_text(s.r),
                            format_double(v.log10_value()), format_double(v.value()), format_double(v.clamped()),
                            v.hypothesis_ok ? "1" : "0"});
        }
    }
    return rows;
}

inline std::string render_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << "\n";
    }
    return os.str();
}

/// Fixed-width text table; columns that are empty in every row are dropped.
inline std::string render_text(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < header.size(); ++c) {
        bool any = false;
        for (const auto& r : rows) any = any || !r[c].empty();
        if (any || rows.empty()) keep.push_back(c);
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (auto c : keep) {
        width[c] = header[c].size();
        for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
    }
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < keep.size(); ++k) {
            const auto c = keep[k];
            os << (k ? "  " : "") << std::left << std::setw(static_cast<int>(width[c])) << cells[c];
        }
        os << "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    return os.str();
}

// ---------------------------------------------------------------------------
// sample

struct SampleArgs {
    std::string config;
    std::string measure = "gap";
    std::size_t dim = 0, d_a = 0, d_b = 0;
    std::string eigenvalues;
    double kappa = 0.0;
    std::string atoms = "eigen";
    std::size_t n = 1000;
    std::optional<std::uint64_t> seed;
    unsigned workers = 0;
    std::string format = "csv";
    std::string out;
};

struct SamplePlan {
    json canonical;
    MeasureSpec measure = MeasureSpec::uniform(HilbertDim::flat(1));
    std::size_t n = 0;
    std::uint64_t seed = 1;
};

/// Sample configs share the run schema for shape and rho:
///   {"measure": gap|ga|gaussian|uniform|delta|vmf, "shape"|"dim", "rho",
///    "truncate", "n", "seed", "kappa", "atoms"}
inline SamplePlan plan_sample(const json& doc) {
    const Node cfg(doc, "");
    cfg.allow_only({"measure", "shape", "dim", "rho", "truncate", "n", "seed", "kappa", "atoms", "workers"});
    SamplePlan sp;
    if (cfg.has("seed")) {
        if (!cfg.raw("seed").is_number_unsigned()) throw ConfigError("/seed", "expected a nonnegative integer");
        sp.seed = cfg.raw("seed").get<std::uint64_t>();
    }
    sp.n = cfg.count("n", 1000);
    const auto kind = *measure_kind_from_string(
        cfg.text("measure", "gap", {"gap", "ga", "gaussian", "uniform", "delta", "vmf"}));
    if (kind != MeasureKind::VonMisesFisher && cfg.has("kappa")) throw ConfigError("/kappa", "only valid for vmf");
    if (kind != MeasureKind::DeltaMixture && cfg.has("atoms")) throw ConfigError("/atoms", "only valid for delta");
    const DensityMatrix rho = detail::parse_state(cfg, sp.seed);
    switch (kind) {
        case MeasureKind::Gaussian: sp.measure = MeasureSpec::gaussian(rho); break;
        case MeasureKind::GaussianAdjusted: sp.measure = MeasureSpec::ga(rho); break;
        case MeasureKind::GAP: sp.measure = MeasureSpec::gap(rho); break;
        case MeasureKind::UniformSphere:
            if (cfg.has("rho")) throw ConfigError("/rho", "the uniform measure takes no rho");
            sp.measure = MeasureSpec::uniform(rho.shape());
            break;
        case MeasureKind::DeltaMixture: {
            Stream setup(sp.seed, keys::kSetup, 2);
            sp.measure = MeasureSpec::delta(rho, detail::parse_atoms(cfg), setup);
            break;
        }
        case MeasureKind::VonMisesFisher: {
            if (cfg.has("rho")) throw ConfigError("/rho", "vmf takes no rho");
            const double kappa = cfg.number("kappa", 0.0);
            if (kappa < 0.0) throw ConfigError("/kappa", "must be nonnegative");
            RealVector mu = RealVector::Zero(static_cast<Eigen::Index>(rho.dim()));
            mu(0) = 1.0;
            sp.measure = MeasureSpec::vmf(mu, kappa);
            break;
        }
    }
    sp.canonical = doc;
    sp.canonical.erase("workers");
    sp.canonical["seed"] = sp.seed;
    sp.canonical["n"] = sp.n;
    return sp;
}

inline json sample_doc_from_flags(const SampleArgs& a) {
    json doc{{"measure", a.measure}, {"n", a.n}};
    if (a.dim && (a.d_a || a.d_b)) throw UsageError("give either --dim or --d-a/--d-b");
    if (a.d_a || a.d_b) {
        if (!a.d_a || !a.d_b) throw UsageError("--d-a and --d-b must be given together");
        doc["shape"] = {{"d_a", a.d_a}, {"d_b", a.d_b}};
    } else if (a.dim) {
        doc["dim"] = a.dim;
    } else if (a.eigenvalues.empty()) {
        throw UsageError("give --dim, --d-a/--d-b or --eigenvalues");
    }
    if (!a.eigenvalues.empty()) {
        const auto ev = parse_value_list(a.eigenvalues, "--eigenvalues");
        if (!doc.contains("dim") && !doc.contains("shape")) doc["dim"] = ev.size();
        doc["rho"] = {{"kind", "eigenvalues"}, {"values", ev}};
    }
    if (a.measure == "vmf") doc["kappa"] = a.kappa;
    if (a.measure == "delta") doc["atoms"] = a.atoms;
    if (a.seed) doc["seed"] = *a.seed;
    return doc;
}

/// Streams samples chunk by chunk into either CSV rows or a density accumulator.
inline std::string run_sample(const SamplePlan& sp, unsigned workers, const std::string& format) {
    const std::size_t D = sp.measure.rho().dim();
    const bool delta = sp.measure.kind() == MeasureKind::DeltaMixture;
    const bool real = sp.measure.kind() == MeasureKind::VonMisesFisher;
    const std::size_t chunks = (sp.n + kChunkSize - 1) / kChunkSize;
    const std::string provenance = "# config_hash=" + config_hash(sp.canonical) + " seed=" + std::to_string(sp.seed) +
                                   " version=" + kVersion + "\n";
    if (format == "csv") {
        std::vector<std::string> text(chunks);
        for_each_chunk(sp.n, sp.seed, keys::kSamples, workers,
                       [&](std::size_t c, std::size_t begin, std::size_t end, Stream& rng) {
                           std::string s;
                           for (std::size_t i = begin; i < end; ++i) {
                               s += std::to_string(i);
                               if (delta) {
                                   s += "," + std::to_string(sp.measure.draw_atom(rng));
                               } else {
                                   const Vector v = sp.measure.draw(rng);
                                   for (Eigen::Index k = 0; k < v.size(); ++k) {
                                       s += "," + format_double(v(k).real());
                                       if (!real) s += "," + format_double(v(k).imag());
                                   }
                               }
                               s += "\n";
                           }
                           text[c] = std::move(s);
                       });
        std::string out = provenance + "index";
        if (delta) {
            out += ",atom";
        } else {
            for (std::size_t k = 0; k < D; ++k)
                out += real ? ",x_" + std::to_string(k) : ",re_" + std::to_string(k) + ",im_" + std::to_string(k);
        }
        out += "\n";
        for (auto& t : text) out += t;
        return out;
    }
    std::vector<DensityAccumulator> acc(chunks, DensityAccumulator(D));
    for_each_chunk(sp.n, sp.seed, keys::kSamples, workers,
                   [&](std::size_t c, std::size_t begin, std::size_t end, Stream& rng) {
                       for (std::size_t i = begin; i < end; ++i) acc[c].add(sp.measure.draw(rng));
                   });
    DensityAccumulator total(D);
    for (const auto& a : acc) total.merge(a);
    json j{{"measure", to_string(sp.measure.kind())},
           {"config", sp.canonical},
           {"config_hash", config_hash(sp.canonical)},
           {"seed", sp.seed},
           {"version", kVersion},
           {"n", sp.n},
           {"dim", D}};
    if (sp.n > 0) {
        const Matrix m = total.mean();
        json re = json::array(), im = json::array();
        double off = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            json rr = json::array(), ii = json::array();
            for (Eigen::Index k = 0; k < m.cols(); ++k) {
                rr.push_back(m(i, k).real());
                ii.push_back(m(i, k).imag());
                if (i != k) off = std::max(off, std::abs(m(i, k)));
            }
            re.push_back(std::move(rr));
            im.push_back(std::move(ii));
        }
        j["density_matrix"] = {{"re", std::move(re)}, {"im", std::move(im)}};
        j["max_offdiag_abs"] = off;
        if (!real) j["trace_distance_to_rho"] = trace_norm_hermitian(m - sp.measure.rho().matrix());
    }
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// verify / report

inline std::vector<fs::path> find_summaries(const std::vector<std::string>& paths, const std::string& dir) {
    std::vector<fs::path> out;
    for (const auto& p : paths) out.emplace_back(p);
    if (!dir.empty()) {
        if (!fs::is_directory(dir)) throw UsageError("--out-dir: '" + dir + "' is not a directory");
        std::vector<fs::path> found;
        for (const auto& e : fs::directory_iterator(dir)) {
            const auto name = e.path().filename().string();
            if (name.size() > 13 && name.ends_with(".summary.json")) found.push_back(e.path());
        }
        std::sort(found.begin(), found.end());
        out.insert(out.end(), found.begin(), found.end());
    }
    if (out.empty()) throw UsageError("no summary files given (pass paths or --out-dir)");
    return out;
}

/// Returns a list of problems; empty means the bundle is consistent.
inline std::vector<std::string> verify_bundle(const fs::path& summary_path, const std::optional<json>& expected_input) {
    std::vector<std::string> problems;
    json s;
    try {
        s = json::parse(read_file(summary_path));
    } catch (const std::exception& e) {
        return {std::string("unreadable summary: ") + e.what()};
    }
    for (const char* k : {"config", "config_hash", "seed", "version", "rows", "checks", "files"})
        if (!s.contains(k)) problems.push_back(std::string("summary lacks '") + k + "'");
    if (!problems.empty()) return problems;
    const std::string hash = config_hash(s["config"]);
    if (hash != s["config_hash"].get<std::string>())
        problems.push_back("config_hash " + s["config_hash"].get<std::string>() + " does not match re-derived " + hash);
    if (expected_input) {
        const json given = s["config"].contains("input") ? s["config"]["input"] : json();
        if (given != *expected_input) problems.push_back("config differs from the supplied --config");
    }
    const std::string seed = std::to_string(s["seed"].get<std::uint64_t>());
    const fs::path dir = summary_path.parent_path();
    for (auto it = s["files"].begin(); it != s["files"].end(); ++it) {
        const fs::path p = dir / it.key();
        std::string content;
        try {
            content = read_file(p);
        } catch (const IoError&) {
            problems.push_back(it.key() + ": missing");
            continue;
        }
        const auto [h, sd] = csv_provenance(content);
        if (h != hash) problems.push_back(it.key() + ": embedded config_hash '" + h + "' != " + hash);
        if (sd != seed) problems.push_back(it.key() + ": embedded seed '" + sd + "' != " + seed);
        const auto rows = count_data_lines(content);
        if (rows != it.value()["rows"].get<std::size_t>())
            problems.push_back(it.key() + ": " + std::to_string(rows) + " rows, summary declares " +
                               std::to_string(it.value()["rows"].get<std::size_t>()));
        const auto sum = hex64(fnv1a64(content));
        if (sum != it.value()["checksum"].get<std::string>()) problems.push_back(it.key() + ": checksum mismatch");
    }
    // The tail CSV must carry the documented header and one line per summary row.
    const std::string stem = summary_path.filename().string();
    const std::string tail = stem.substr(0, stem.size() - std::string(".summary.json").size()) + ".csv";
    if (!s["files"].contains(tail)) {
        problems.push_back(tail + ": not listed in summary");
    } else if (fs::exists(dir / tail)) {
        const std::string content = read_file(dir / tail);
        std::istringstream in(content);
        std::string line;
        while (std::getline(in, line) && line.rfind('#', 0) == 0) {
        }
        if (line != kTailCsvHeader) problems.push_back(tail + ": unexpected header");
        if (count_data_lines(content) != s["rows"].size())
            problems.push_back(tail + ": row count differs from summary rows[]");
    }
    return problems;
}

inline std::string json_cell(const json& v) {
    if (v.is_null()) return "nan";
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_number()) return v.dump();
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

inline const std::vector<std::string> kReportColumns{"experiment", "group", "statistic", "param", "n", "p_hat",
                                                     "bound", "bound_clamped", "hypothesis_ok", "in_soundness", "sound"};

/// Rows stable-sorted by (group, statistic, param).
inline std::vector<std::vector<std::string>> report_rows(const json& s) {
    std::vector<const json*> rows;
    for (const auto& r : s["rows"]) rows.push_back(&r);
    std::stable_sort(rows.begin(), rows.end(), [](const json* a, const json* b) {
        const auto ka = std::tie((*a)["group"].get_ref<const std::string&>(), (*a)["statistic"].get_ref<const std::string&>());
        const auto kb = std::tie((*b)["group"].get_ref<const std::string&>(), (*b)["statistic"].get_ref<const std::string&>());
        if (ka != kb) return ka < kb;
        return (*a)["param"].get<double>() < (*b)["param"].get<double>();
    });
    std::vector<std::vector<std::string>> out;
    for (const json* r : rows) {
        std::vector<std::string> cells{s["experiment"].get<std::string>()};
        for (std::size_t c = 1; c < kReportColumns.size(); ++c)
            cells.push_back(r->contains(kReportColumns[c]) ? json_cell((*r)[kReportColumns[c]]) : "");
        out.push_back(std::move(cells));
    }
    return out;
}

// ---------------------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"gaplab: typicality experiments for GAP measures"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    BoundsArgs ba;
    auto* bounds = app.add_subcommand("bounds", "Evaluate a closed-form bound over eps/delta grids");
    bounds->add_option("--bound", ba.bound, "Bound name (see --list)");
    bounds->add_flag("--list", ba.list, "List bound names and exit");
    bounds->add_option("--d-a", ba.d_a, "Subsystem dimension d_a");
    bounds->add_option("--dim", ba.dim, "Dimension D (or d_R for uniform-measure bounds)");
    bounds->add_option("--eps", ba.eps, "eps values: a,b,c or lo:hi:points[:linear]");
    bounds->add_option("--delta", ba.delta, "delta values: a,b,c or lo:hi:points[:linear]");
    bounds->add_option("--norm-rho", ba.norm_rho, "Largest eigenvalue of rho");
    bounds->add_option("--purity", ba.purity, "tr rho^2");
    bounds->add_option("--eta", ba.eta, "Lipschitz constant");
    bounds->add_option("--norm-b", ba.norm_b, "Operator norm of B (or A)");
    bounds->add_option("--r", ba.r, "Radius for the Gaussian-adjusted bounds");
    bounds->add_option("--format", ba.format, "csv or summary")->check(CLI::IsMember({"csv", "summary"}));
    bounds->add_option("--out", ba.out, "Also write the table as CSV to this file");

    double cx_da = 1000.0, cx_eps = 0.01, cx_dmin = 2.0, cx_dmax = 1e100;
    std::size_t cx_grid = 4000;
    std::string cx_family = "sqrt-peak", cx_format = "summary";
    auto* crossover = bounds->add_subcommand("crossover", "D-intervals where the polynomial bound beats the exponential one");
    crossover->add_option("--d-a", cx_da, "Subsystem dimension d_a")->capture_default_str();
    crossover->add_option("--eps", cx_eps, "Deviation eps")->capture_default_str();
    crossover->add_option("--family", cx_family, "sqrt-peak or uniform")
        ->check(CLI::IsMember({"sqrt-peak", "uniform"}))
        ->capture_default_str();
    crossover->add_option("--d-min", cx_dmin, "Scan start")->capture_default_str();
    crossover->add_option("--d-max", cx_dmax, "Scan end")->capture_default_str();
    crossover->add_option("--grid", cx_grid, "Scan points in log D")->capture_default_str();
    crossover->add_option("--format", cx_format, "csv or summary")->check(CLI::IsMember({"csv", "summary"}));

    std::string run_config, run_out_dir, run_format = "summary";
    std::optional<std::uint64_t> run_seed;
    std::optional<unsigned> run_workers;
    auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
    run->add_option("--config", run_config, "Config file")->required();
    run->add_option("--seed", run_seed, "Override the config seed");
    run->add_option("--workers", run_workers, "Worker threads (0: all cores)");
    run->add_option("--out-dir", run_out_dir, "Override output.dir");
    run->add_option("--format", run_format, "stdout: summary line or tail CSV")
        ->check(CLI::IsMember({"csv", "summary"}));

    SampleArgs sa;
    auto* sample = app.add_subcommand("sample", "Draw raw samples or their density-matrix summary");
    sample->add_option("--config", sa.config, "Sample config file (replaces the measure flags)");
    sample->add_option("--measure", sa.measure, "gap, ga, gaussian, uniform, delta, vmf")
        ->check(CLI::IsMember({"gap", "ga", "gaussian", "uniform", "delta", "vmf"}));
    sample->add_option("--dim", sa.dim, "Dimension D");
    sample->add_option("--d-a", sa.d_a, "Subsystem dimension d_a");
    sample->add_option("--d-b", sa.d_b, "Bath dimension d_b");
    sample->add_option("--eigenvalues", sa.eigenvalues, "Spectrum of rho (normalized): a,b,c");
    sample->add_option("--kappa", sa.kappa, "vMF concentration");
    sample->add_option("--atoms", sa.atoms, "Delta-mixture atoms: eigen or haar_random")
        ->check(CLI::IsMember({"eigen", "haar_random"}));
    sample->add_option("--n", sa.n, "Number of samples");
    sample->add_option("--seed", sa.seed, "Seed");
    sample->add_option("--workers", sa.workers, "Worker threads (0: all cores)");
    sample->add_option("--format", sa.format, "csv (raw samples) or summary (density matrix)")
        ->check(CLI::IsMember({"csv", "summary"}));
    sample->add_option("--out", sa.out, "Write to this file instead of stdout");

    std::vector<std::string> verify_paths;
    std::string verify_dir, verify_config;
    auto* verify = app.add_subcommand("verify", "Check hashes, row counts and checksums of run outputs");
    verify->add_option("summaries", verify_paths, "Summary JSON files");
    verify->add_option("--out-dir", verify_dir, "Verify every *.summary.json in this directory");
    verify->add_option("--config", verify_config, "Also require the bundle to come from this config");

    std::vector<std::string> report_paths;
    std::string report_dir, report_format = "summary";
    auto* report = app.add_subcommand("report", "Print tail rows and checks of run outputs");
    report->add_option("summaries", report_paths, "Summary JSON files");
    report->add_option("--out-dir", report_dir, "Report every *.summary.json in this directory");
    report->add_option("--format", report_format, "csv or summary")->check(CLI::IsMember({"csv", "summary"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_code::kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_code::kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return exit_code::kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::kUsage;
    }

    try {
        if (*crossover) {
            const auto fam = cx_family == "uniform" ? uniform_family() : sqrt_peak_family();
            const auto res = crossover_solve(cx_da, cx_eps, fam, cx_dmin, cx_dmax, cx_grid);
            std::vector<std::vector<std::string>> rows;
            for (const auto& [lo, hi] : res.intervals)
                rows.push_back({fam.name, format_double(cx_da), format_double(cx_eps), format_double(lo),
                                format_double(hi)});
            const std::vector<std::string> header{"family", "d_a", "eps", "d_lo", "d_hi"};
            out << (cx_format == "csv" ? render_csv(header, rows) : render_text(header, rows));
            if (cx_format == "summary" && rows.empty()) out << "no D in the scanned range where poly < exp\n";
            return exit_code::kOk;
        }
        if (*bounds) {
            if (ba.list) {
                for (const auto& info : kBoundTable) out << info.name << "\n";
                return exit_code::kOk;
            }
            if (ba.bound.empty()) throw UsageError("--bound is required");
            const auto rows = bounds_table(ba);
            const std::vector<std::string> header(kBoundsColumns.begin(), kBoundsColumns.end());
            out << (ba.format == "csv" ? render_csv(header, rows) : render_text(header, rows));
            if (!ba.out.empty()) {
                try {
                    write_atomic(ba.out, render_csv(header, rows));
                } catch (const std::exception& e) {
                    err << "error: " << e.what() << "\n";
                    return exit_code::kCompute;
                }
            }
            return exit_code::kOk;
        }
        if (*run) {
            const json doc = load_json_file(run_config);
            RunConfig rc = validate_config(doc, run_seed, run_workers);
            if (!run_out_dir.empty()) rc.output.dir = run_out_dir;
            const Plan plan = make_plan(rc);
            ExperimentRecord rec;
            Bundle bundle;
            try {
                rec = plan(RunContext{rc.seed, resolve_workers(rc.workers)});
                // Bind the bundle to the validated input as well as the resolved options.
                rec.config = json{{"input", rc.canonical}, {"resolved", rec.config}};
                bundle = write_bundle(rec, rc.output.dir, rc.output.prefix);
            } catch (const std::exception& e) {
                err << "error: " << rc.experiment << ": " << e.what() << "\n";
                return exit_code::kCompute;
            }
            std::size_t passed = 0;
            for (const auto& c : bundle.summary["checks"]) {
                if (c["passed"].get<bool>()) {
                    ++passed;
                } else {
                    err << "check failed: " << c["name"].get<std::string>() << " (" << c["detail"].get<std::string>()
                        << ")\n";
                }
            }
            const std::size_t total = bundle.summary["checks"].size();
            if (run_format == "csv") {
                out << tail_csv(rec);
            } else {
                out << rec.tag << " rows=" << rec.rows.size() << " violations=" << rec.soundness_violations()
                    << " checks=" << passed << "/" << total << " config_hash=" << config_hash(rec.config)
                    << " seed=" << rec.seed << " summary=" << bundle.summary_path.string() << "\n";
            }
            return passed == total ? exit_code::kOk : exit_code::kFailedCheck;
        }
        if (*sample) {
            json doc;
            if (!sa.config.empty()) {
                doc = load_json_file(sa.config);
                if (sa.seed) doc["seed"] = *sa.seed;
            } else {
                doc = sample_doc_from_flags(sa);
            }
            const SamplePlan sp = plan_sample(doc);
            std::string text;
            try {
                text = run_sample(sp, resolve_workers(sa.workers), sa.format);
                if (!sa.out.empty()) write_atomic(sa.out, text);
            } catch (const std::exception& e) {
                err << "error: " << e.what() << "\n";
                return exit_code::kCompute;
            }
            if (sa.out.empty()) out << text;
            return exit_code::kOk;
        }
        if (*verify) {
            std::optional<json> expected;
            if (!verify_config.empty()) expected = validate_config(load_json_file(verify_config)).canonical;
            bool ok = true;
            for (const auto& p : find_summaries(verify_paths, verify_dir)) {
                const auto problems = verify_bundle(p, expected);
                if (problems.empty()) {
                    out << "OK " << p.string() << "\n";
                } else {
                    ok = false;
                    for (const auto& msg : problems) out << "MISMATCH " << p.string() << ": " << msg << "\n";
                }
            }
            return ok ? exit_code::kOk : exit_code::kMismatch;
        }
        if (*report) {
            std::vector<std::vector<std::string>> rows;
            std::vector<std::string> check_lines;
            for (const auto& p : find_summaries(report_paths, report_dir)) {
                json s;
                try {
                    s = json::parse(read_file(p));
                } catch (const std::exception& e) {
                    throw UsageError(p.string() + ": " + e.what());
                }
                auto r = report_rows(s);
                rows.insert(rows.end(), r.begin(), r.end());
                for (const auto& c : s["checks"])
                    check_lines.push_back(s["experiment"].get<std::string>() + "  " + c["name"].get<std::string>() +
                                          "  " + (c["passed"].get<bool>() ? "pass" : "FAIL") + "  " +
                                          c["detail"].get<std::string>());
            }
            const std::vector<std::string> header(kReportColumns.begin(), kReportColumns.end());
            if (report_format == "csv") {
                out << render_csv(header, rows);
            } else {
                out << render_text(header, rows) << "\n";
                for (const auto& l : check_lines) out << l << "\n";
            }
            return exit_code::kOk;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_code::kUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::kCompute;
    }
    return exit_code::kUsage;
}

}  // namespace gaplab::runner
