#pragma once

#include "warpclust/curve.hpp"
#include "warpclust/indices.hpp"
#include "warpclust/similarity.hpp"

#include <map>
#include <span>
#include <vector>

namespace warpclust {

/// Groups chosen for combination (each of size two or more) and the curves left out.
/// Ids refer to the current curves.
struct PartialClustering {
    Groups groups;
    std::vector<int> unassigned;
};

/// Scores groupings of current curves by expanding each curve to its original
/// members and evaluating the index on the original-curve distances.
class OriginalScorer {
public:
    OriginalScorer(const ClusteringIndex& index, const DistanceMatrix& original,
                   std::map<int, std::vector<int>> members);
    OriginalScorer(const ClusteringIndex& index, const DistanceMatrix& original, std::span<const Curve> curves);

    [[nodiscard]] double operator()(const Groups& current) const;
    [[nodiscard]] Groups expand(const Groups& current) const;
    [[nodiscard]] const DistanceMatrix& distances() const noexcept { return *original_; }

private:
    const ClusteringIndex* index_;
    const DistanceMatrix* original_;
    std::map<int, std::vector<int>> members_;
};

/// Greedy grouping of mutually similar curves (similar: rho > c_star), with the
/// conflict test deciding whether members that also resemble outside curves stay.
/// `index` is evaluated on distances between the current curves.
PartialClustering assign_groups(std::span<const int> ids, const SimilarityMatrix& matrix, double c_star,
                                const ClusteringIndex& index);

/// Weighted least-squares representative of a group aligned onto its most central member.
/// Takes the smallest member id. Throws internal_consistency if a pairwise warp is missing.
Curve combine_group(std::span<const Curve> group, const SimilarityMatrix& matrix, const TimeGrid& grid,
                    const ShapeSettings& shape = {});

/// Completes a partial clustering by attaching unassigned curves to the group with
/// the best score, promoting the best remaining curve to a new group when none fits.
Groups cluster_1(const PartialClustering& partial, const OriginalScorer& nu0);

/// Full clustering of the original ids for any shape of partial result.
/// `matrix` holds similarities of the current curves.
Partition candidate_result(const PartialClustering& partial, const OriginalScorer& nu0,
                           const SimilarityMatrix& matrix, double c_star);

}  // namespace warpclust
