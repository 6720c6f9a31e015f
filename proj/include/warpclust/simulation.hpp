#pragma once

#include "warpclust/indices.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace warpclust {

using ShapeFn = std::function<double(double)>;

enum class ScenarioKind {
    s31,   // power warps satisfying the boundary condition
    s32a,  // linear warps a1 t + a2
    s32b,  // shifted power warps (1 + b2 - b1) t^a + b1
    s33a,  // random shapes f4, f5, f6 with shared draws
    s33b,  // g1, g2 under four fixed power warps
};

struct Scenario {
    ScenarioKind kind = ScenarioKind::s31;
    std::array<int, 3> sizes{10, 10, 10};
    double sigma = 0.15;
    std::size_t n_points = 100;
    std::uint64_t seed = 1;
    /// Power-warp exponents, reused cyclically; empty selects the scenario default.
    std::vector<double> alphas;
    /// Scale of the standard normal draws inside f4..f6.
    double eps_scale = 0.1;
};

struct SimulatedData {
    std::vector<double> t;
    std::vector<int> ids;
    std::vector<std::vector<double>> values;
    /// Generating group of each curve.
    std::vector<int> labels;
    /// Groups that share a shape up to warping merged together.
    std::vector<int> merged_labels;

    [[nodiscard]] Groups truth() const;
    [[nodiscard]] Groups truth_merged() const;
};

/// f1, f2, f3, g1, g2 by name; throws configuration for anything else.
ShapeFn shape_function(const std::string& name);

/// f4, f5 or f6 with the given draws of the four random coefficients.
ShapeFn sang_random_shape(int which, const std::array<double, 4>& eps);

/// Default exponents: 0.86 + 0.03 (k - 1) for k = 1..10, or the four fixed ones for s33b.
std::vector<double> default_alphas(ScenarioKind kind);

/// Observation noise used when none is given: 0.15, or 0 for the s33 scenarios,
/// whose curves are random functions observed without noise.
double default_sigma(ScenarioKind kind);

/// Deterministic in the seed; each curve draws from its own stream.
SimulatedData generate(const Scenario& scenario);

ScenarioKind parse_scenario(const std::string& s);
std::string to_string(ScenarioKind kind);

}  // namespace warpclust
