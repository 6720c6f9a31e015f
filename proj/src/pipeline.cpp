#include "warpclust/pipeline.hpp"

#include "warpclust/error.hpp"
#include "warpclust/updating.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace warpclust {

namespace {

constexpr double kOneTolerance = 1e-9;

std::vector<int> ids_of(const std::vector<Curve>& curves) {
    std::vector<int> ids;
    ids.reserve(curves.size());
    for (const auto& c : curves) ids.push_back(c.id);
    return ids;
}

Groups all_singletons(const std::vector<Curve>& originals) {
    Groups g;
    for (const auto& c : originals) g.push_back({c.id});
    return g;
}

// Replace each group's curves by its representative; returns the new curve list sorted by id.
std::vector<Curve> combine_groups(const std::vector<Curve>& curves, const Groups& groups,
                                  const SimilarityMatrix& matrix, const TimeGrid& grid,
                                  const ShapeSettings& shape) {
    std::set<int> absorbed;
    std::vector<Curve> out;
    for (const auto& group : groups) {
        std::vector<Curve> members;
        for (int id : group) {
            auto it = std::find_if(curves.begin(), curves.end(), [id](const Curve& c) { return c.id == id; });
            if (it == curves.end()) throw Error(ErrorCode::internal_consistency, "group refers to an unknown curve");
            members.push_back(*it);
            absorbed.insert(id);
        }
        out.push_back(combine_group(members, matrix, grid, shape));
    }
    for (const auto& c : curves) {
        if (!absorbed.count(c.id)) out.push_back(c);
    }
    std::sort(out.begin(), out.end(), [](const Curve& a, const Curve& b) { return a.id < b.id; });
    return out;
}

}  // namespace

void RunConfig::validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::configuration, m); };
    if (!(lambda0 >= 0.0) || !std::isfinite(lambda0)) fail("lambda0 must be a nonnegative number");
    if (!(quantile_a > 0.0 && quantile_a < 1.0)) fail("quantile_a must lie in (0, 1)");
    if (threshold_offsets.empty()) fail("at least one threshold offset is required");
    for (double o : threshold_offsets) {
        if (!std::isfinite(o)) fail("threshold offsets must be finite");
    }
    if (grid_size < 50) fail("grid_size must be at least 50");
    if (max_iterations < 1) fail("max_iterations must be at least 1");
    if (!(stability_tol >= 0.0)) fail("stability_tol must be nonnegative");
    if (threads < 1) fail("threads must be at least 1");
}

double quantile_linear(std::span<const double> values, double p) {
    if (values.empty()) throw Error(ErrorCode::degenerate_data, "quantile of an empty set");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<double> threshold_set(std::span<const double> original_sims, double a,
                                  std::span<const double> offsets) {
    std::vector<double> kept;
    for (double s : original_sims) {
        if (s < 1.0 - kOneTolerance) kept.push_back(s);
    }
    if (kept.empty()) {
        throw Error(ErrorCode::degenerate_data, "every pairwise similarity equals one");
    }
    const double q = quantile_linear(kept, 1.0 - a);
    std::vector<double> out;
    out.reserve(offsets.size());
    for (double o : offsets) out.push_back(q + o);
    return out;
}

std::vector<double> threshold_set(std::span<const double> original_sims, double a) {
    return threshold_set(original_sims, a, RunConfig{}.threshold_offsets);
}

std::vector<Curve> presmooth(std::span<const double> t, const std::vector<std::vector<double>>& rows,
                             std::span<const int> ids, const TimeGrid& grid, const ShapeSettings& shape) {
    if (rows.size() != ids.size()) throw Error(ErrorCode::invalid_input, "one id per curve is required");
    if (t.size() < 2) throw Error(ErrorCode::invalid_input, "at least two time points are required");
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (!(t[i] > t[i - 1])) throw Error(ErrorCode::invalid_input, "time points must be strictly increasing");
    }
    const std::size_t needed = shape.interior_knots + static_cast<std::size_t>(shape.degree) + 1;
    if (t.size() < needed) {
        throw Error(ErrorCode::invalid_input,
                    "at least " + std::to_string(needed) + " time points are needed for pre-smoothing");
    }
    const double t0 = t.front();
    const double span = t.back() - t0;
    std::vector<double> scaled(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) scaled[i] = (t[i] - t0) / span;
    scaled.back() = 1.0;

    const auto knots = uniform_knots(shape.interior_knots);
    const auto projector = LeastSquaresProjector(scaled, shape.degree, knots);
    std::set<int> seen;
    std::vector<Curve> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!seen.insert(ids[r]).second) throw Error(ErrorCode::invalid_input, "duplicate curve id");
        if (rows[r].size() != t.size()) throw Error(ErrorCode::invalid_input, "row length differs from the time grid");
        for (double v : rows[r]) {
            if (!std::isfinite(v)) throw Error(ErrorCode::invalid_input, "non-finite observation");
        }
        const SplineRep smooth = projector.fit(rows[r]);
        const auto samples = evaluate(smooth, grid.points());
        out.push_back(make_curve(ids[r], samples, grid, shape));
    }
    return out;
}

Pipeline::Pipeline(std::vector<Curve> curves, RunConfig config) : config_(std::move(config)) {
    config_.validate();
    if (curves.size() < 2) throw Error(ErrorCode::invalid_input, "at least two curves are required");
    engine_ = std::make_unique<SimilarityEngine>(TimeGrid::uniform(config_.grid_size), config_.lambda0,
                                                 config_.warp, config_.optimizer);
    cache_ = std::make_unique<SimilarityCache>(*engine_);
    std::sort(curves.begin(), curves.end(), [](const Curve& a, const Curve& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < curves.size(); ++i) {
        if (curves[i].id == curves[i - 1].id) throw Error(ErrorCode::invalid_input, "duplicate curve id");
    }
    for (auto& c : curves) {
        if (c.samples.size() != config_.grid_size) {
            throw Error(ErrorCode::invalid_input, "curve samples do not match the configured grid");
        }
        c = normalized(c, engine_->grid(), config_.shape);
        c.n_orig = 1;
        c.members = {c.id};
    }
    originals_ = std::move(curves);
    original_ = cache_->matrix(originals_, config_.threads);
    distances_ = DistanceMatrix::from_similarities(original_);
    const auto sims = original_.values();
    if (std::any_of(sims.begin(), sims.end(), [](double v) { return v < 1.0; })) tau_ = compute_tau(sims);
}

double Pipeline::tau() const {
    if (!tau_) throw Error(ErrorCode::degenerate_data, "every pairwise similarity equals one");
    return *tau_;
}

Pipeline::~Pipeline() = default;

const TimeGrid& Pipeline::grid() const { return engine_->grid(); }

std::vector<double> Pipeline::thresholds() const {
    return threshold_set(original_.values(), config_.quantile_a, config_.threshold_offsets);
}

ThresholdRun Pipeline::run_single_threshold(double c_star) {
    ThresholdRun out;
    out.threshold = c_star;
    const TimeGrid& grid = engine_->grid();

    std::vector<Curve> curves = originals_;
    SimilarityMatrix matrix = original_;
    double previous_mean = matrix.mean_rho();

    for (int iteration = 1; iteration <= config_.max_iterations; ++iteration) {
        IterationLog entry;
        entry.iteration = iteration;
        entry.curves = curves.size();

        // (A) assignment and combination
        const auto ids = ids_of(curves);
        const PartialClustering partial = assign_groups(ids, matrix, c_star, config_.index);
        entry.combinations = partial.groups.size();
        if (!partial.groups.empty()) {
            // (C) candidate from the curves as they stand after combination
            const OriginalScorer nu0(config_.index, distances_, curves);
            Partition p = candidate_result(partial, nu0, matrix, c_star);
            const bool duplicate = std::any_of(out.candidates.begin(), out.candidates.end(),
                                               [&](const Candidate& c) { return c.partition == p; });
            if (!duplicate) out.candidates.push_back(Candidate{std::move(p), c_star, iteration, false});
            curves = combine_groups(curves, partial.groups, matrix, grid, config_.shape);
        }

        if (curves.size() < 2) {
            entry.mean_rho = 1.0;
            out.log.push_back(entry);
            break;
        }

        // (B) update, then refresh the similarities of the current curves
        curves = update_all(std::move(curves), *cache_, tau(), config_.shape);
        matrix = cache_->matrix(curves, config_.threads);
        entry.mean_rho = matrix.mean_rho();
        out.log.push_back(entry);

        if (std::abs(entry.mean_rho - previous_mean) < config_.stability_tol) break;
        previous_mean = entry.mean_rho;
    }

    if (out.candidates.empty()) {
        Partition singles;
        singles.groups = all_singletons(originals_);
        singles.index_value = config_.index(singles.groups, distances_);
        out.candidates.push_back(Candidate{std::move(singles), c_star, 0, true});
    }
    return out;
}

const Candidate& select_candidate(const std::vector<ThresholdRun>& runs) {
    bool any_real = false;
    for (const auto& r : runs) {
        for (const auto& c : r.candidates) any_real = any_real || !c.fallback;
    }
    const Candidate* best = nullptr;
    auto score = [](const Candidate& c) {
        return c.partition.index_value.value_or(-std::numeric_limits<double>::infinity());
    };
    for (const auto& r : runs) {
        for (const auto& c : r.candidates) {
            if (any_real && c.fallback) continue;
            if (best == nullptr) {
                best = &c;
                continue;
            }
            const double sc = score(c);
            const double sb = score(*best);
            if (sc > sb) {
                best = &c;
            } else if (sc == sb) {
                const auto gc = c.partition.groups.size();
                const auto gb = best->partition.groups.size();
                if (gc < gb || (gc == gb && c.threshold < best->threshold)) best = &c;
            }
        }
    }
    if (best == nullptr) throw Error(ErrorCode::internal_consistency, "no candidate to select from");
    return *best;
}

RunResult Pipeline::run() {
    RunResult result;
    result.thresholds = thresholds();
    result.index_name = config_.index.name();
    for (double c : result.thresholds) result.runs.push_back(run_single_threshold(c));
    const Candidate& best = select_candidate(result.runs);
    result.partition = best.partition;
    result.threshold = best.threshold;
    for (const auto& r : result.runs) {
        if (r.threshold == best.threshold) result.iterations = static_cast<int>(r.log.size());
    }
    return result;
}

RunResult run(std::span<const double> t, const std::vector<std::vector<double>>& rows, std::span<const int> ids,
              const RunConfig& config) {
    config.validate();
    const auto grid = TimeGrid::uniform(config.grid_size);
    Pipeline pipeline(presmooth(t, rows, ids, grid, config.shape), config);
    return pipeline.run();
}

}  // namespace warpclust
