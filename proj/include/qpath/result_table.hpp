#pragma once

// Columnar result tables with an ordered metadata block, serialized as CSV
// ('#'-prefixed metadata lines, header row) and as JSON with identical
// content. Numbers are written with 17 significant digits so every run can
// be re-verified offline.

#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace qpath {

struct ResultTable {
    std::string name;
    std::vector<std::pair<std::string, std::string>> metadata;  // insertion order
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    bool partial = false;

    void meta(const std::string& key, const std::string& value) {
        for (auto& kv : metadata)
            if (kv.first == key) {
                kv.second = value;
                return;
            }
        metadata.emplace_back(key, value);
    }
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string to_csv(const ResultTable& table) {
    std::string out;
    out += "# table = " + table.name + "\n";
    if (table.partial) out += "# partial = true\n";
    for (const auto& kv : table.metadata)
        out += "# " + kv.first + " = " + kv.second + "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out += ",";
        out += table.columns[i];
    }
    out += "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            out += format_double(row[i]);
        }
        out += "\n";
    }
    return out;
}

// JSON mirror of the CSV content. Non-finite values become strings because
// JSON has no literal for them.
inline nlohmann::ordered_json to_json(const ResultTable& table) {
    nlohmann::ordered_json j;
    j["table"] = table.name;
    j["partial"] = table.partial;
    nlohmann::ordered_json meta;
    for (const auto& kv : table.metadata) meta[kv.first] = kv.second;
    j["metadata"] = std::move(meta);
    j["columns"] = table.columns;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json r = nlohmann::ordered_json::array();
        for (double v : row) {
            if (std::isfinite(v))
                r.push_back(v);
            else
                r.push_back(format_double(v));
        }
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j;
}

}  // namespace qpath
