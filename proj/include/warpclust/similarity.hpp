#pragma once

#include "warpclust/curve.hpp"
#include "warpclust/nelder_mead.hpp"
#include "warpclust/warping.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

namespace warpclust {

/// rho(f, g | psi) with its parts. `warp` aligns the first curve to the second:
/// second ∘ warp.forward ≈ first.
struct SimilarityEntry {
    double rho = 0.0;
    Warping warp;
    double penalty_fwd = 0.0;
    double penalty_inv = 0.0;
    double r_fwd = 0.0;
    double r_inv = 0.0;

    /// The same entry seen from the other curve.
    [[nodiscard]] SimilarityEntry swapped() const {
        return SimilarityEntry{rho, warp.swapped(), penalty_inv, penalty_fwd, r_inv, r_fwd};
    }
};

struct OptimizerSettings {
    NelderMeadOptions nelder_mead{};
    /// Power warps t^a used as multi-start points (a = 1 is the identity).
    std::vector<double> start_exponents{0.7, 0.85, 1.0, 1.18, 1.43};
};

/// rho(f, g | psi) = ((r(f, g∘psi) - l0 P(psi)) + (r(g, f∘psi^-1) - l0 P(psi^-1))) / 2.
/// Throws range_error if psi leaves [0,1] on the grid, zero_variance for constant curves.
SimilarityEntry rho_given_psi(const Curve& f, const Curve& g, const Warping& psi, double lambda0,
                              const TimeGrid& grid);

/// Everything needed to maximize rho(f, g | psi) over the warp family.
class SimilarityEngine {
public:
    SimilarityEngine(TimeGrid grid, double lambda0, WarpSettings warp = {}, OptimizerSettings opt = {});

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] const WarpFamily& family() const noexcept { return family_; }
    [[nodiscard]] double lambda0() const noexcept { return lambda0_; }
    [[nodiscard]] const OptimizerSettings& optimizer() const noexcept { return opt_; }

    [[nodiscard]] SimilarityEntry rho_given_psi(const Curve& f, const Curve& g, const Warping& psi) const;

    /// Multi-start Nelder-Mead over the raw warp parameters; the returned entry's
    /// rho equals rho_given_psi at the returned warp.
    [[nodiscard]] SimilarityEntry optimize_warping(const Curve& f, const Curve& g) const;

    /// Alias of optimize_warping; rho(f, g) with its maximizer.
    [[nodiscard]] SimilarityEntry similarity(const Curve& f, const Curve& g) const {
        return optimize_warping(f, g);
    }

private:
    TimeGrid grid_;
    double lambda0_;
    WarpFamily family_;
    OptimizerSettings opt_;
    std::vector<std::vector<double>> starts_;
};

/// One entry per unordered pair, stored from the smaller id's point of view.
class SimilarityMatrix {
public:
    void set(int a, int b, const SimilarityEntry& entry);

    /// Entry oriented from `a`: its warp satisfies b ∘ warp.forward ≈ a.
    [[nodiscard]] SimilarityEntry get(int a, int b) const;
    [[nodiscard]] double rho(int a, int b) const;
    [[nodiscard]] bool contains(int a, int b) const;
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

    /// Sorted ids appearing in any pair.
    [[nodiscard]] std::vector<int> ids() const;
    /// rho of every stored pair in canonical order.
    [[nodiscard]] std::vector<double> values() const;
    [[nodiscard]] double mean_rho() const;

    [[nodiscard]] const std::map<std::pair<int, int>, SimilarityEntry>& entries() const noexcept {
        return entries_;
    }

private:
    std::map<std::pair<int, int>, SimilarityEntry> entries_;
};

/// Similarities keyed by curve content, so unchanged pairs are never recomputed.
class SimilarityCache {
public:
    explicit SimilarityCache(const SimilarityEngine& engine) : engine_(&engine) {}

    /// Oriented from `a` like SimilarityMatrix::get.
    SimilarityEntry get(const Curve& a, const Curve& b);
    [[nodiscard]] std::size_t computed() const noexcept { return computed_; }
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] const SimilarityEngine& engine() const noexcept { return *engine_; }

    /// Fill every missing pair of `curves`, fanning out across `threads` workers.
    SimilarityMatrix matrix(std::span<const Curve> curves, unsigned threads = 1);

private:
    using Key = std::tuple<int, std::uint64_t, int, std::uint64_t>;
    static Key key_of(const Curve& lo, const Curve& hi);

    const SimilarityEngine* engine_;
    std::map<Key, SimilarityEntry> entries_;
    std::size_t computed_ = 0;
    mutable std::mutex mutex_;
};

/// All unordered pairs of `curves` (at least two).
SimilarityMatrix similarity_matrix(std::span<const Curve> curves, const SimilarityEngine& engine,
                                   unsigned threads = 1);

}  // namespace warpclust
