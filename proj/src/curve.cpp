#include "warpclust/curve.hpp"

#include "warpclust/error.hpp"

#include <algorithm>
#include <cmath>

namespace warpclust {

namespace {

double mean_of(std::span<const double> f, const TimeGrid& grid) { return grid.integrate(f); }

bool is_constant(std::span<const double> f, const TimeGrid& grid, double var) {
    double sq = 0.0;
    const auto w = grid.weights();
    for (std::size_t i = 0; i < f.size(); ++i) sq += w[i] * f[i] * f[i];
    return !(var > 1e-20 * sq) || !(var > 0.0);
}

void fnv_mix(std::uint64_t& h, const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ull;
    }
}

}  // namespace

std::uint64_t Curve::fingerprint() const {
    std::uint64_t h = 14695981039346656037ull;
    fnv_mix(h, samples.data(), samples.size() * sizeof(double));
    fnv_mix(h, members.data(), members.size() * sizeof(int));
    fnv_mix(h, &id, sizeof(id));
    return h;
}

double center_inner(std::span<const double> f, std::span<const double> g, const TimeGrid& grid) {
    if (f.size() != grid.size() || g.size() != grid.size()) {
        throw Error(ErrorCode::invalid_input, "samples do not match the grid");
    }
    const double ef = mean_of(f, grid);
    const double eg = mean_of(g, grid);
    const auto w = grid.weights();
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += w[i] * (f[i] - ef) * (g[i] - eg);
    return acc;
}

double center_norm(std::span<const double> f, const TimeGrid& grid) {
    return std::sqrt(std::max(center_inner(f, f, grid), 0.0));
}

double corr(std::span<const double> f, std::span<const double> g, const TimeGrid& grid) {
    const double ff = center_inner(f, f, grid);
    const double gg = center_inner(g, g, grid);
    if (is_constant(f, grid, ff) || is_constant(g, grid, gg)) {
        throw Error(ErrorCode::zero_variance, "correlation of a constant curve");
    }
    const double r = center_inner(f, g, grid) / std::sqrt(ff * gg);
    return std::clamp(r, -1.0, 1.0);
}

Curve make_curve(int id, std::span<const double> samples, const TimeGrid& grid,
                 const ShapeSettings& shape) {
    if (samples.size() != grid.size()) throw Error(ErrorCode::invalid_input, "samples do not match the grid");
    for (double v : samples) {
        if (!std::isfinite(v)) throw Error(ErrorCode::invalid_input, "non-finite sample value");
    }
    Curve c;
    c.id = id;
    c.spline = fit_least_squares(grid.points(), samples, shape.degree, uniform_knots(shape.interior_knots));
    c.samples = evaluate(c.spline, grid.points());
    c.members = {id};
    c.n_orig = 1;
    return c;
}

void normalize_samples(std::span<double> samples, const TimeGrid& grid) {
    const double m = mean_of(samples, grid);
    const double var = center_inner(samples, samples, grid);
    if (is_constant(samples, grid, var)) {
        throw Error(ErrorCode::degenerate_curve, "constant curve has no shape");
    }
    const double s = std::sqrt(var);
    for (double& v : samples) v = (v - m) / s;
}

Curve normalized(const Curve& curve, const TimeGrid& grid, const ShapeSettings&) {
    const double m = mean_of(curve.samples, grid);
    const double var = center_inner(curve.samples, curve.samples, grid);
    if (is_constant(curve.samples, grid, var)) {
        throw Error(ErrorCode::degenerate_curve,
                    "curve " + std::to_string(curve.id) + " is constant");
    }
    const double s = std::sqrt(var);
    Curve out = curve;
    // Already normalized curves are returned untouched so their fingerprint is stable.
    if (std::abs(m) <= 1e-12 && std::abs(s - 1.0) <= 1e-12) return out;
    // Clamped B-splines form a partition of unity, so the affine map acts
    // coefficient-wise without a refit.
    for (double& v : out.samples) v = (v - m) / s;
    for (double& c : out.spline.coefficients) c = (c - m) / s;
    return out;
}

}  // namespace warpclust
