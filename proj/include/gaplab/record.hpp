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

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gaplab/bounds.hpp"
#include "gaplab/stats.hpp"

namespace gaplab {

inline constexpr const char* kVersion = "0.3.0";

/// Slack, in Wilson half-widths, allowed between an empirical tail and its bound.
inline constexpr double kSoundnessSlack = 3.0;

/// Empirical tail P(statistic > param) at one grid point, with a matched bound.
struct TailRow {
    std::string group;
    std::string statistic;
    double param = 0.0;
    std::size_t n = 0;
    std::size_t count = 0;
    stats::Interval wilson;
    std::optional<BoundValue> bound;
    bool in_soundness = true;

    bool sound() const {
        if (!bound) return true;
        return wilson.estimate - kSoundnessSlack * wilson.half_width() <= bound->clamped();
    }
    bool counts_for_soundness() const { return in_soundness && bound && bound->hypothesis_ok; }
};

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Auxiliary numeric table (histograms, per-atom values, ...).
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ExperimentRecord {
    std::string tag;
    nlohmann::json config = nlohmann::json::object();
    std::uint64_t seed = 0;
    std::vector<TailRow> rows;
    std::map<std::string, stats::Summary> summaries;
    std::map<std::string, double> metrics;
    std::map<std::string, Table> tables;
    std::vector<Check> checks;
    std::size_t samples = 0;
    double wall_seconds = 0.0;

    bool soundness_ok() const {
        for (const auto& r : rows)
            if (r.counts_for_soundness() && !r.sound()) return false;
        return true;
    }

    std::size_t soundness_violations() const {
        std::size_t v = 0;
        for (const auto& r : rows)
            if (r.counts_for_soundness() && !r.sound()) ++v;
        return v;
    }

    bool all_checks_pass() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }

    void add_check(std::string name, bool passed, std::string detail = {}) {
        checks.push_back({std::move(name), passed, std::move(detail)});
    }
};

// ---------------------------------------------------------------------------
// Serialization

/// Shortest round-trip decimal representation ('.' separator, locale independent).
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Hash of the canonical (key-sorted, compact) JSON form of a config.
inline std::string config_hash(const nlohmann::json& config) { return hex64(fnv1a64(config.dump())); }

inline const char* kTailCsvHeader =
    "experiment,group,statistic,param,n,count,p_hat,wilson_lo,wilson_hi,bound,bound_log,bound_clamped,"
    "hypothesis_ok,in_soundness,sound";

/// Tail rows as CSV. The first line is a '#' comment carrying config hash and seed.
inline std::string tail_csv(const ExperimentRecord& rec) {
    std::ostringstream os;
    os << "# config_hash=" << config_hash(rec.config) << " seed=" << rec.seed << " version=" << kVersion << "\n";
    os << kTailCsvHeader << "\n";
    for (const auto& r : rec.rows) {
        os << rec.tag << ',' << r.group << ',' << r.statistic << ',' << format_double(r.param) << ',' << r.n << ','
           << r.count << ',' << format_double(r.wilson.estimate) << ',' << format_double(r.wilson.lo) << ','
           << format_double(r.wilson.hi) << ',';
        if (r.bound) {
            os << to_string(r.bound->tag) << ',' << format_double(r.bound->log_value) << ','
               << format_double(r.bound->clamped()) << ',' << (r.bound->hypothesis_ok ? 1 : 0);
        } else {
            os << ",nan,nan,1";
        }
        os << ',' << (r.in_soundness ? 1 : 0) << ',' << (r.sound() ? 1 : 0) << "\n";
    }
    return os.str();
}

inline std::string table_csv(const ExperimentRecord& rec, const Table& t) {
    std::ostringstream os;
    os << "# config_hash=" << config_hash(rec.config) << " seed=" << rec.seed << " version=" << kVersion << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
        os << "\n";
    }
    return os.str();
}

inline std::size_t count_data_lines(std::string_view csv) {
    std::size_t lines = 0;
    bool header_seen = false;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t end = csv.find('\n', pos);
        if (end == std::string_view::npos) end = csv.size();
        const auto line = csv.substr(pos, end - pos);
        if (!line.empty() && line[0] != '#') {
            if (header_seen) ++lines;
            header_seen = true;
        }
        pos = end + 1;
    }
    return lines;
}

inline nlohmann::json to_json(const stats::Summary& s) {
    return {{"n", s.n},         {"mean", s.mean}, {"min", s.min}, {"q05", s.q05}, {"q25", s.q25},
            {"median", s.median}, {"q75", s.q75},   {"q95", s.q95}, {"max", s.max}};
}

inline double json_number(double x) { return std::isfinite(x) ? x : 0.0; }

/// Summary object {config, config_hash, seed, version, experiment, rows[], checks[], ...}.
/// Timing is excluded so identical runs give identical bytes.
inline nlohmann::json summary_json(const ExperimentRecord& rec) {
    nlohmann::json j;
    j["experiment"] = rec.tag;
    j["config"] = rec.config;
    j["config_hash"] = config_hash(rec.config);
    j["seed"] = rec.seed;
    j["version"] = kVersion;
    j["samples"] = rec.samples;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : rec.rows) {
        nlohmann::json o{{"group", r.group},
                         {"statistic", r.statistic},
                         {"param", r.param},
                         {"n", r.n},
                         {"count", r.count},
                         {"p_hat", r.wilson.estimate},
                         {"wilson_lo", r.wilson.lo},
                         {"wilson_hi", r.wilson.hi},
                         {"in_soundness", r.in_soundness},
                         {"sound", r.sound()}};
        if (r.bound) {
            o["bound"] = to_string(r.bound->tag);
            o["bound_log"] = json_number(r.bound->log_value);
            o["bound_clamped"] = r.bound->clamped();
            o["hypothesis_ok"] = r.bound->hypothesis_ok;
        }
        rows.push_back(std::move(o));
    }
    j["rows"] = std::move(rows);
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : rec.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    checks.push_back({{"name", "soundness"},
                      {"passed", rec.soundness_ok()},
                      {"detail", std::to_string(rec.soundness_violations()) + " violations"}});
    j["checks"] = std::move(checks);
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [k, v] : rec.metrics) metrics[k] = json_number(v);
    j["metrics"] = std::move(metrics);
    nlohmann::json sums = nlohmann::json::object();
    for (const auto& [k, v] : rec.summaries) sums[k] = to_json(v);
    j["summaries"] = std::move(sums);
    return j;
}

}  // namespace gaplab
