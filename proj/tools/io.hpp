#pragma once

#include "warpclust/indices.hpp"
#include "warpclust/pipeline.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace warpclust::io {

/// Curves as read from the wide CSV layout `id,t_1,...,t_n`.
/// Internally each row is addressed by its position.
struct CurveTable {
    std::vector<std::string> names;
    std::vector<double> t;
    std::vector<std::vector<double>> rows;

    [[nodiscard]] std::vector<int> indices() const;
    /// Row position of a name; throws invalid_input when absent.
    [[nodiscard]] int index_of(const std::string& name) const;
};

/// Throws invalid_input on malformed content and when the file cannot be opened.
CurveTable read_curves(const std::string& path);
void write_curves(const std::string& path, const CurveTable& table);

/// `id,label` rows.
std::map<std::string, std::string> read_labels(const std::string& path);
void write_labels(const std::string& path, const std::vector<std::string>& names, const std::vector<int>& labels);

nlohmann::json read_json(const std::string& path);
/// Two-space indentation and a trailing newline; "-" writes to standard output.
void write_json(const std::string& path, const nlohmann::json& doc);

/// Partition given as an array of arrays of names, mapped onto row positions.
Groups read_partition(const nlohmann::json& doc, const CurveTable& table);

nlohmann::json names_of(const Groups& groups, const std::vector<std::string>& names);

/// Finite numbers as themselves, infinities and NaN as null.
nlohmann::json number(double v);

}  // namespace warpclust::io
