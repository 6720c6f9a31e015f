#pragma once

#include "warpclust/curve.hpp"
#include "warpclust/similarity.hpp"
#include "warpclust/warping.hpp"

#include <optional>
#include <span>
#include <vector>

namespace warpclust {

/// One target curve f1 with its neighbours f2..fk.
///
/// `warps[j]` aligns the target to `others[j]`, so others[j] ∘ warps[j].forward
/// is close to the target. All curves are expected to have unit seminorm.
struct UpdateContext {
    Curve target;
    std::vector<Curve> others;
    std::vector<Warping> warps;
    std::vector<double> sims;
    std::vector<int> n_js;
    double tau = 1.0;
    double lambda0 = 0.0;
};

/// Weights over the neighbours plus the per-neighbour screening quantities.
struct ThetaSelection {
    std::vector<double> theta;
    bool all_zero = false;
    std::vector<double> inner;  // <f1, f_j∘psi_j>
    std::vector<double> res1;
    std::vector<double> res2;
};

struct LambdaParts {
    double lc5 = 0.0;
    bool lc5_skipped = false;
    double lc6 = 0.0;
    double lambda = 0.0;
    std::vector<double> A, B, D, E, alpha, beta;
};

struct UpdateResult {
    bool updated = false;
    /// f1* on the grid before the spline refit.
    std::vector<double> samples;
    ThetaSelection theta;
    LambdaParts lambda;
};

/// E_j(f - E_j f)(g - E_j g) with E_j h the trapezoid value of the integral of
/// h psi', divided by that of psi' so constants are centered exactly.
double weighted_inner_j(std::span<const double> f, std::span<const double> g, const Warping& psi,
                        const TimeGrid& grid);

/// E_j f on its own.
double expectation_j(std::span<const double> f, const Warping& psi, const TimeGrid& grid);

/// log(0.5) / log(max similarity below one), the maximum clamped into [1e-6, 1 - 1e-6].
double compute_tau(std::span<const double> original_sims);

ThetaSelection select_theta(const UpdateContext& ctx, const TimeGrid& grid);

/// Throws degenerate_seminorm when ||f1||_j vanishes for some neighbour.
LambdaParts compute_lambda(const UpdateContext& ctx, std::span<const double> theta, const TimeGrid& grid);

/// The convex combination on the grid. `lambda_override` replaces max(LC5, LC6).
UpdateResult update_samples(const UpdateContext& ctx, const TimeGrid& grid,
                            std::optional<double> lambda_override = std::nullopt);

/// f1* refit as a shape spline; f1 itself when every weight was screened out.
Curve update_curve(const UpdateContext& ctx, const TimeGrid& grid, const ShapeSettings& shape = {});

/// One sequential pass over the curves in ascending id order. Before each target
/// the curves are renormalized; warps and similarities come from `cache`, which
/// recomputes pairs whose curves changed earlier in the pass.
std::vector<Curve> update_all(std::vector<Curve> curves, SimilarityCache& cache, double tau,
                              const ShapeSettings& shape = {});

}  // namespace warpclust
