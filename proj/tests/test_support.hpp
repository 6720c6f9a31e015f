#pragma once

#include "warpclust/curve.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace warpclust::testing {

inline std::vector<double> linspace(std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    return t;
}

inline std::vector<double> sample(const TimeGrid& grid, const std::function<double(double)>& fn) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = fn(grid[i]);
    return v;
}

/// Normalized shape curve of `fn` on the grid.
inline Curve curve_of(int id, const TimeGrid& grid, const std::function<double(double)>& fn) {
    return normalized(make_curve(id, sample(grid, fn), grid), grid);
}

inline double f1(double t) { return std::sin(2.5 * std::numbers::pi * t); }
inline double f2(double t) { return (-t * t + std::sin(2.0 * std::numbers::pi * t) + 0.25) / 1.3; }
inline double f3(double t) { return std::sin(2.5 * std::numbers::pi * std::pow(t, 2.5)); }

}  // namespace warpclust::testing
