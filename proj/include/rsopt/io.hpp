#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rsopt/common.hpp"

namespace rsopt::io {

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
    if (!out) throw ConfigError("write failed: " + path);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::vector<std::vector<std::string>> read_csv_strings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        rows.push_back(split_csv_line(line));
    }
    return rows;
}

/// Numeric CSV (plain comma-separated doubles, no quoting). A leading header
/// line is skipped if any of its fields is not a number.
inline std::vector<std::vector<double>> read_numeric_csv(const std::string& path) {
    auto rows = read_csv_strings(path);
    std::vector<std::vector<double>> out;
    bool first = true;
    for (const auto& row : rows) {
        std::vector<double> parsed;
        parsed.reserve(row.size());
        bool ok = true;
        for (const auto& field : row) {
            double v = 0.0;
            auto res = std::from_chars(field.data(), field.data() + field.size(), v);
            if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
                ok = false;
                break;
            }
            parsed.push_back(v);
        }
        if (!ok) {
            if (first) {
                first = false;
                continue;  // header
            }
            throw ConfigError("non-numeric row in " + path);
        }
        first = false;
        out.push_back(std::move(parsed));
    }
    return out;
}

}  // namespace rsopt::io
