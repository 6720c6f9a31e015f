#pragma once

#include "warpclust/spline.hpp"

#include <span>
#include <vector>

namespace warpclust {

struct WarpSettings {
    int forward_degree = 2;
    std::size_t forward_knots = 3;
    int inverse_degree = 2;
    std::size_t inverse_knots = 23;
    /// Abscissae on [0,1] at which the inverse is solved exactly before projection.
    std::size_t inverse_fit_points = 201;
};

/// Monotone time transformation with its spline inverse.
///
/// `forward` maps [0,1] onto [0,1] with both endpoints fixed. `inverse` is a
/// separate least-squares spline approximation of the inverse function.
struct Warping {
    SplineRep forward;
    SplineRep inverse;

    /// Roles exchanged: the inverse becomes the forward map.
    [[nodiscard]] Warping swapped() const { return Warping{inverse, forward}; }
};

enum class WarpDirection { forward, inverse };

/// The spline-parameterized search space for warps.
///
/// Forward coefficients are 0 = c_0 < c_1 < ... < c_n = 1 with increments
/// proportional to exp(raw_i) times the increments of the identity (Greville)
/// coefficients, so equal raw parameters reproduce the identity exactly.
class WarpFamily {
public:
    explicit WarpFamily(WarpSettings settings = {});

    [[nodiscard]] const WarpSettings& settings() const noexcept { return settings_; }
    [[nodiscard]] std::size_t num_params() const noexcept { return base_increments_.size(); }

    [[nodiscard]] Warping make(std::span<const double> raw) const;
    [[nodiscard]] Warping identity() const;
    [[nodiscard]] std::vector<double> identity_params() const;

    /// Forward spline only; `out` is reused to avoid allocation in hot loops.
    void forward_into(std::span<const double> raw, SplineRep& out) const;

    /// Least-squares inverse: quadratic spline with pinned ends fitted to exact
    /// inverse values on a fixed abscissa set.
    [[nodiscard]] SplineRep invert(const SplineRep& psi) const;
    void invert_into(const SplineRep& psi, SplineRep& out) const;

    /// Raw parameters of the member closest (least squares, pinned ends) to the
    /// sampled increasing function; increments are floored to stay positive.
    [[nodiscard]] std::vector<double> fit_params(std::span<const double> t,
                                                 std::span<const double> psi_values) const;

private:
    WarpSettings settings_;
    std::vector<double> forward_knots_;
    std::vector<double> base_increments_;
    std::vector<double> inverse_abscissae_;
    LeastSquaresProjector inverse_projector_;
};

/// Invert an increasing spline at sorted targets u in [0,1]: out[k] solves psi(t) = u[k].
/// Closed form for quadratic splines, safeguarded bisection otherwise.
void inverse_points(const SplineRep& psi, std::span<const double> u, std::span<double> out);

/// Throws monotonicity_violation unless psi(0)=0, psi(1)=1 and psi is nondecreasing.
void check_warp(const SplineRep& psi);

/// Trapezoid value of the integral of (psi'(t) - 1)^2 over the grid.
double roughness_penalty(const SplineRep& psi, const TimeGrid& grid);
double roughness_penalty(const Warping& warp, WarpDirection direction, const TimeGrid& grid);

}  // namespace warpclust
