#include "rln/sim/report.hpp"

#include <sstream>

#include "rln/errors.hpp"

namespace rln::sim {

namespace {

std::string scalar(const nlohmann::ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

// Empty containers produce no keys, so both renderings agree on them.
void flatten_into(const nlohmann::ordered_json& v, const std::string& prefix,
                  std::vector<std::pair<std::string, std::string>>& out) {
    if (v.is_object()) {
        for (const auto& [k, child] : v.items()) flatten_into(child, prefix.empty() ? k : prefix + "." + k, out);
    } else if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto idx = std::to_string(i);
            flatten_into(v[i], prefix.empty() ? idx : prefix + "." + idx, out);
        }
    } else {
        out.emplace_back(prefix, scalar(v));
    }
}

std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::string SimReport::to_text() const {
    std::ostringstream out;
    bool first = true;
    for (const auto& [section, body] : data.items()) {
        if (!first) out << '\n';
        first = false;
        out << '[' << section << "]\n";
        std::vector<std::pair<std::string, std::string>> lines;
        flatten_into(body, "", lines);
        for (const auto& [k, v] : lines) out << k << " = " << v << '\n';
    }
    return out.str();
}

std::string SimReport::to_machine() const { return data.dump(2) + "\n"; }

FlatReport flatten_report(const std::string& text) {
    FlatReport flat;
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(Errc::ConfigParse, e.what());
        }
        std::vector<std::pair<std::string, std::string>> lines;
        flatten_into(j, "", lines);
        for (auto& [k, v] : lines) flat[k] = v;
        return flat;
    }

    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        // Trimming leaves "key =" when the value is an empty string.
        auto eq = line.find(" =");
        if (eq == std::string::npos || section.empty()) {
            throw Error(Errc::ConfigParse, "report line " + std::to_string(lineno) + ": expected key = value");
        }
        auto key = trim(line.substr(0, eq));
        flat[key.empty() ? section : section + "." + key] = trim(line.substr(eq + 2));
    }
    return flat;
}

std::vector<std::string> diff_reports(const FlatReport& a, const FlatReport& b) {
    std::vector<std::string> out;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() || ib != b.end()) {
        if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
            out.push_back(ia->first + ": " + ia->second + " | <missing>");
            ++ia;
        } else if (ia == a.end() || ib->first < ia->first) {
            out.push_back(ib->first + ": <missing> | " + ib->second);
            ++ib;
        } else {
            if (ia->second != ib->second) out.push_back(ia->first + ": " + ia->second + " | " + ib->second);
            ++ia;
            ++ib;
        }
    }
    return out;
}

}  // namespace rln::sim
