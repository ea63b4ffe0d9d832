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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gaplab/record.hpp"

namespace gaplab::runner {

namespace fs = std::filesystem;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Writes through a temporary file in the same directory followed by rename,
/// so readers never observe a partially written file.
inline void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct WrittenFile {
    std::string name;
    std::size_t rows = 0;
    std::string checksum;
};

struct Bundle {
    fs::path summary_path;
    std::vector<WrittenFile> files;
    nlohmann::json summary;
};

/// Writes <prefix>.csv (tail rows), <prefix>.<table>.csv for every auxiliary
/// table, and <prefix>.summary.json, which records row counts and FNV-1a
/// checksums of each CSV.
inline Bundle write_bundle(const ExperimentRecord& rec, const fs::path& dir, const std::string& prefix) {
    Bundle b;
    std::vector<std::pair<std::string, std::string>> csvs;
    csvs.emplace_back(prefix + ".csv", tail_csv(rec));
    for (const auto& [name, table] : rec.tables) csvs.emplace_back(prefix + "." + name + ".csv", table_csv(rec, table));
    nlohmann::json files = nlohmann::json::object();
    for (const auto& [name, content] : csvs) {
        write_atomic(dir / name, content);
        WrittenFile f{name, count_data_lines(content), hex64(fnv1a64(content))};
        files[name] = {{"rows", f.rows}, {"checksum", f.checksum}};
        b.files.push_back(std::move(f));
    }
    b.summary = summary_json(rec);
    b.summary["csv"] = files[prefix + ".csv"];
    b.summary["files"] = std::move(files);
    b.summary_path = dir / (prefix + ".summary.json");
    write_atomic(b.summary_path, b.summary.dump(2) + "\n");
    return b;
}

/// Parses "# config_hash=<h> seed=<s> ..." from the first line of a CSV.
inline std::pair<std::string, std::string> csv_provenance(const std::string& content) {
    const auto eol = content.find('\n');
    const std::string line = content.substr(0, eol);
    auto field = [&](const std::string& key) -> std::string {
        const auto pos = line.find(key + "=");
        if (pos == std::string::npos) return {};
        const auto start = pos + key.size() + 1;
        return line.substr(start, line.find(' ', start) - start);
    };
    if (line.rfind("#", 0) != 0) return {};
    return {field("config_hash"), field("seed")};
}

}  // namespace gaplab::runner
