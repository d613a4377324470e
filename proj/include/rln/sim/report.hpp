#pragma once

#include <map>
#include <string>

#include <json.hpp>

namespace rln::sim {

// Simulation outcome. Stored as an insertion-ordered JSON tree so the text and
// machine renderings share one source and a stable key order.
struct SimReport {
    nlohmann::ordered_json data = nlohmann::ordered_json::object();

    // "[section]" headers followed by "key = value" lines.
    std::string to_text() const;
    // Pretty-printed JSON.
    std::string to_machine() const;

    const nlohmann::ordered_json& operator[](const std::string& section) const { return data.at(section); }
};

using FlatReport = std::map<std::string, std::string>;

// Either rendering -> dotted keys to scalar values. Throws Error(ConfigParse) on
// malformed input.
FlatReport flatten_report(const std::string& text);

// Keys that differ, formatted "key: a | b". Empty iff semantically equal.
std::vector<std::string> diff_reports(const FlatReport& a, const FlatReport& b);

}  // namespace rln::sim
