#pragma once

#include "warpclust/combining.hpp"
#include "warpclust/curve.hpp"
#include "warpclust/indices.hpp"
#include "warpclust/similarity.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace warpclust {

struct RunConfig {
    double lambda0 = 0.0;
    /// Thresholds sit just below the 100(1 - a)% quantile of original similarities.
    double quantile_a = 0.25;
    std::vector<double> threshold_offsets{-0.01, -0.01 + 0.01 / 3.0, -0.01 + 0.02 / 3.0, 0.0};
    ClusteringIndex index = ClusteringIndex::make_silhouette();
    std::size_t grid_size = 500;
    int max_iterations = 10;
    double stability_tol = 1e-3;
    OptimizerSettings optimizer{};
    WarpSettings warp{};
    ShapeSettings shape{};
    /// Recorded with results; the method itself draws no random numbers.
    std::uint64_t seed = 0;
    unsigned threads = 1;

    /// Throws configuration on out-of-range values.
    void validate() const;
};

struct IterationLog {
    int iteration = 0;
    std::size_t curves = 0;         // curves entering the iteration
    std::size_t combinations = 0;   // groups merged in step A
    double mean_rho = 0.0;          // after the update and refresh
};

struct Candidate {
    Partition partition;            // original ids, index_value = nu0
    double threshold = 0.0;
    int iteration = 0;
    /// All-singletons partition used when a threshold produced nothing.
    bool fallback = false;
};

struct ThresholdRun {
    double threshold = 0.0;
    std::vector<Candidate> candidates;
    std::vector<IterationLog> log;
};

struct RunResult {
    Partition partition;
    double threshold = 0.0;
    std::string index_name;
    std::vector<double> thresholds;
    std::vector<ThresholdRun> runs;
    /// Iterations performed at the chosen threshold.
    int iterations = 0;
};

/// Sample quantile with linear interpolation between order statistics.
double quantile_linear(std::span<const double> values, double p);

/// The combination thresholds q_{1-a} + offset. Values at or numerically equal
/// to one are excluded first; throws degenerate_data if none remain.
std::vector<double> threshold_set(std::span<const double> original_sims, double a,
                                  std::span<const double> offsets);
std::vector<double> threshold_set(std::span<const double> original_sims, double a);

/// Cubic least-squares smoothing of raw rows observed at `t` (rescaled onto [0,1]),
/// evaluated on `grid`. Ids must be distinct; throws invalid_input otherwise.
std::vector<Curve> presmooth(std::span<const double> t, const std::vector<std::vector<double>>& rows,
                             std::span<const int> ids, const TimeGrid& grid, const ShapeSettings& shape = {});

/// Holds the startup state shared by every threshold: curves, engine,
/// similarity cache and the original-curve distances used for scoring.
class Pipeline {
public:
    /// `curves` are the pre-smoothed originals on a grid of config.grid_size points.
    Pipeline(std::vector<Curve> curves, RunConfig config);
    ~Pipeline();
    Pipeline(const Pipeline&) = delete;
    Pipeline& operator=(const Pipeline&) = delete;

    [[nodiscard]] const RunConfig& config() const noexcept { return config_; }
    [[nodiscard]] const TimeGrid& grid() const;
    [[nodiscard]] const std::vector<Curve>& originals() const noexcept { return originals_; }
    [[nodiscard]] const SimilarityMatrix& original_matrix() const noexcept { return original_; }
    [[nodiscard]] const DistanceMatrix& original_distances() const noexcept { return distances_; }
    /// Throws degenerate_data when every original similarity equals one.
    [[nodiscard]] double tau() const;
    [[nodiscard]] std::vector<double> thresholds() const;

    ThresholdRun run_single_threshold(double c_star);
    RunResult run();

private:
    RunConfig config_;
    std::vector<Curve> originals_;
    std::unique_ptr<SimilarityEngine> engine_;
    std::unique_ptr<SimilarityCache> cache_;
    SimilarityMatrix original_;
    DistanceMatrix distances_;
    std::optional<double> tau_;
};

/// Highest nu0, then fewer groups, then the smaller threshold. Fallback
/// candidates only compete when no threshold produced a real one.
const Candidate& select_candidate(const std::vector<ThresholdRun>& runs);

/// Pre-smooth raw data and run every threshold.
RunResult run(std::span<const double> t, const std::vector<std::vector<double>>& rows,
              std::span<const int> ids, const RunConfig& config);

}  // namespace warpclust
