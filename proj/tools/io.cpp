#include "io.hpp"

#include "warpclust/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace warpclust::io {

namespace {

[[noreturn]] void bad(const std::string& message) { throw Error(ErrorCode::invalid_input, message); }

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& s, const std::string& where) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && s.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v)) bad("not a finite number '" + s + "' in " + where);
    return v;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open '" + path + "'");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) bad("cannot write '" + path + "'");
    out.precision(17);
    return out;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

}  // namespace

std::vector<int> CurveTable::indices() const {
    std::vector<int> ids(names.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    return ids;
}

int CurveTable::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return static_cast<int>(i);
    }
    bad("unknown curve id '" + name + "'");
}

CurveTable read_curves(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    CurveTable table;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (blank(line)) continue;
        const auto fields = split(line);
        const std::string where = path + ":" + std::to_string(line_no);
        if (table.t.empty()) {
            if (fields.size() < 3) bad("header needs an id column and at least two time points at " + where);
            for (std::size_t i = 1; i < fields.size(); ++i) table.t.push_back(parse_number(fields[i], where));
            continue;
        }
        if (fields.size() != table.t.size() + 1) bad("expected " + std::to_string(table.t.size() + 1) + " fields at " + where);
        if (fields[0].empty()) bad("empty id at " + where);
        table.names.push_back(fields[0]);
        std::vector<double> row;
        row.reserve(table.t.size());
        for (std::size_t i = 1; i < fields.size(); ++i) row.push_back(parse_number(fields[i], where));
        table.rows.push_back(std::move(row));
    }
    if (table.t.empty()) bad("'" + path + "' has no header");
    if (table.rows.empty()) bad("'" + path + "' has no curves");
    std::set<std::string> seen;
    for (const auto& n : table.names) {
        if (!seen.insert(n).second) bad("duplicate curve id '" + n + "'");
    }
    return table;
}

void write_curves(const std::string& path, const CurveTable& table) {
    auto out = open_out(path);
    out << "id";
    for (double v : table.t) out << ',' << v;
    out << '\n';
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        out << table.names[r];
        for (double v : table.rows[r]) out << ',' << v;
        out << '\n';
    }
}

std::map<std::string, std::string> read_labels(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    std::map<std::string, std::string> labels;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        const auto fields = split(line);
        if (fields.size() != 2) bad("expected id,label at " + path + ":" + std::to_string(line_no));
        if (header) {
            header = false;
            continue;
        }
        if (!labels.emplace(fields[0], fields[1]).second) bad("duplicate id '" + fields[0] + "' in labels");
    }
    if (labels.empty()) bad("'" + path + "' has no labels");
    return labels;
}

void write_labels(const std::string& path, const std::vector<std::string>& names, const std::vector<int>& labels) {
    auto out = open_out(path);
    out << "id,label\n";
    for (std::size_t i = 0; i < names.size(); ++i) out << names[i] << ',' << labels[i] << '\n';
}

nlohmann::json read_json(const std::string& path) {
    auto in = open_in(path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        bad("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_json(const std::string& path, const nlohmann::json& doc) {
    const std::string text = doc.dump(2) + "\n";
    if (path == "-") {
        std::cout << text;
        return;
    }
    auto out = open_out(path);
    out << text;
}

Groups read_partition(const nlohmann::json& doc, const CurveTable& table) {
    const nlohmann::json& arr = doc.is_object() && doc.contains("partition") ? doc.at("partition") : doc;
    if (!arr.is_array()) bad("partition must be an array of arrays of ids");
    Groups groups;
    for (const auto& g : arr) {
        if (!g.is_array() || g.empty()) bad("partition groups must be nonempty arrays");
        std::vector<int> ids;
        for (const auto& v : g) ids.push_back(table.index_of(v.is_string() ? v.get<std::string>() : v.dump()));
        groups.push_back(std::move(ids));
    }
    Partition p{groups, std::nullopt};
    p.validate();
    if (p.num_elements() != table.names.size()) bad("partition does not cover every curve");
    return canonical(std::move(groups));
}

nlohmann::json names_of(const Groups& groups, const std::vector<std::string>& names) {
    auto out = nlohmann::json::array();
    for (const auto& g : groups) {
        auto arr = nlohmann::json::array();
        for (int id : g) arr.push_back(names.at(static_cast<std::size_t>(id)));
        out.push_back(std::move(arr));
    }
    return out;
}

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace warpclust::io
