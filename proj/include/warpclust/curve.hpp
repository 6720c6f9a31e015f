#pragma once

#include "warpclust/spline.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace warpclust {

/// Spline settings of shape curves (cubic, 16 equally spaced interior knots).
struct ShapeSettings {
    int degree = 3;
    std::size_t interior_knots = 16;
};

/// A functional observation on the shared grid.
///
/// `samples` are the spline evaluated on the grid. `members` lists the original
/// curve ids aggregated into this curve; `n_orig` equals its size.
struct Curve {
    int id = 0;
    std::vector<double> samples;
    SplineRep spline;
    int n_orig = 1;
    std::vector<int> members;

    /// Content hash of samples and membership (used as a similarity cache key).
    [[nodiscard]] std::uint64_t fingerprint() const;
};

/// Trapezoid value of the integral of (f - Ef)(g - Eg).
double center_inner(std::span<const double> f, std::span<const double> g, const TimeGrid& grid);

/// Centered L2 seminorm.
double center_norm(std::span<const double> f, const TimeGrid& grid);

/// Correlation-type similarity r(f, g); throws zero_variance for constant input.
double corr(std::span<const double> f, std::span<const double> g, const TimeGrid& grid);

/// Shape-spline fit of grid samples; the returned curve's samples are the spline on the grid.
Curve make_curve(int id, std::span<const double> samples, const TimeGrid& grid,
                 const ShapeSettings& shape = {});

/// Center and scale to unit seminorm, then refit. Throws degenerate_curve for constants.
Curve normalized(const Curve& curve, const TimeGrid& grid, const ShapeSettings& shape = {});

/// Subtract the mean and divide by the seminorm in place; throws degenerate_curve.
void normalize_samples(std::span<double> samples, const TimeGrid& grid);

}  // namespace warpclust
