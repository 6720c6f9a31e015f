#pragma once

#include "warpclust/similarity.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace warpclust {

using Groups = std::vector<std::vector<int>>;

/// Groups sorted internally and ordered by their smallest id.
Groups canonical(Groups groups);

/// A complete clustering of original curve ids.
struct Partition {
    Groups groups;
    std::optional<double> index_value;

    [[nodiscard]] std::size_t num_elements() const;
    /// Throws invalid_input if groups are empty, overlap, or repeat an id.
    void validate() const;
    friend bool operator==(const Partition& a, const Partition& b) { return a.groups == b.groups; }
};

/// d(a, b) = max(0, 1 - rho(a, b)) between ids, with d(a, a) = 0.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    DistanceMatrix(std::vector<int> ids, Eigen::MatrixXd values);

    static DistanceMatrix from_similarities(const SimilarityMatrix& sims);

    [[nodiscard]] double operator()(int a, int b) const;
    [[nodiscard]] bool contains(int id) const { return index_.count(id) != 0; }
    [[nodiscard]] const std::vector<int>& ids() const noexcept { return ids_; }

private:
    std::vector<int> ids_;
    std::unordered_map<int, Eigen::Index> index_;
    Eigen::MatrixXd values_;
};

enum class DunnInter { I1, I2, I3 };
enum class DunnIntra { J1, J2 };

/// Mean silhouette width; singletons score 0. Throws undefined_index for fewer than two groups.
double silhouette(const Groups& groups, const DistanceMatrix& dist);

/// Smallest inter-group distance over largest intra-group distance; +inf when the
/// denominator is 0. Throws undefined_index for fewer than two groups.
double dunn(const Groups& groups, const DistanceMatrix& dist, DunnInter inter, DunnIntra intra);

/// Hubert-Arabie adjusted Rand index. Throws element_mismatch unless both cover the same ids.
double adjusted_rand(const Groups& p, const Groups& q);

/// The configured validity index.
struct ClusteringIndex {
    enum class Kind { silhouette, dunn };
    Kind kind = Kind::silhouette;
    DunnInter inter = DunnInter::I1;
    DunnIntra intra = DunnIntra::J1;

    static ClusteringIndex make_silhouette() { return {}; }
    static ClusteringIndex make_dunn(DunnInter i, DunnIntra j) { return {Kind::dunn, i, j}; }

    /// Index value; a single group scores -inf so any genuine split is preferred.
    [[nodiscard]] double operator()(const Groups& groups, const DistanceMatrix& dist) const;
    [[nodiscard]] std::string name() const;
};

std::string to_string(DunnInter v);
std::string to_string(DunnIntra v);
DunnInter parse_dunn_inter(const std::string& s);
DunnIntra parse_dunn_intra(const std::string& s);

}  // namespace warpclust
