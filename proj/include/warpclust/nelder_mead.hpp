#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace warpclust {

struct NelderMeadOptions {
    std::size_t max_evaluations = 400;
    double initial_step = 0.4;
    double f_tolerance = 1e-10;   // stop when the simplex values spread less than this
    double x_tolerance = 1e-8;    // ... and the simplex diameter is below this
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
};

/// Minimize `objective` from `start` with the standard reflection (1),
/// expansion (2), contraction (1/2) and shrink (1/2) moves. Non-finite
/// objective values are treated as +inf.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                                    std::vector<double> start, const NelderMeadOptions& opts = {}) {
    const std::size_t n = start.size();
    NelderMeadResult result;
    auto eval = [&](const std::vector<double>& x) {
        ++result.evaluations;
        const double v = objective(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> simplex(n + 1, start);
    std::vector<double> values(n + 1);
    values[0] = eval(start);
    for (std::size_t i = 0; i < n; ++i) {
        simplex[i + 1][i] += opts.initial_step;
        values[i + 1] = eval(simplex[i + 1]);
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    auto point_along = [&](double t, std::vector<double>& out) {
        for (std::size_t k = 0; k < n; ++k) out[k] = centroid[k] + t * (simplex[order[n]][k] - centroid[k]);
    };

    while (result.evaluations < opts.max_evaluations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order[0];
        const std::size_t worst = order[n];
        const std::size_t second = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                diameter = std::max(diameter, std::abs(simplex[order[i]][k] - simplex[best][k]));
            }
        }
        if (std::abs(values[worst] - values[best]) <= opts.f_tolerance && diameter <= opts.x_tolerance) break;
        if (diameter <= 1e-12) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[order[i]][k] / static_cast<double>(n);
        }

        point_along(-1.0, trial);
        const double fr = eval(trial);
        if (fr < values[best]) {
            point_along(-2.0, trial2);
            const double fe = eval(trial2);
            if (fe < fr) {
                simplex[worst] = trial2;
                values[worst] = fe;
            } else {
                simplex[worst] = trial;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = trial;
            values[worst] = fr;
            continue;
        }
        // contraction: outside if the reflection improved on the worst point, else inside
        const bool outside = fr < values[worst];
        point_along(outside ? -0.5 : 0.5, trial2);
        const double fc = eval(trial2);
        if (fc < (outside ? fr : values[worst])) {
            simplex[worst] = trial2;
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 1; i <= n; ++i) {
            auto& p = simplex[order[i]];
            for (std::size_t k = 0; k < n; ++k) p[k] = simplex[best][k] + 0.5 * (p[k] - simplex[best][k]);
            values[order[i]] = eval(p);
        }
    }

    const auto best_it = std::min_element(values.begin(), values.end());
    result.x = simplex[static_cast<std::size_t>(best_it - values.begin())];
    result.value = *best_it;
    return result;
}

}  // namespace warpclust
