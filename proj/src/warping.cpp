#include "warpclust/warping.hpp"

#include "warpclust/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace warpclust {

namespace {

constexpr double kMinIncrement = 1e-9;

std::vector<double> greville(int degree, std::span<const double> interior) {
    const auto knots = clamped_knot_vector(degree, interior);
    const std::size_t n = interior.size() + static_cast<std::size_t>(degree) + 1;
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = 1; k <= degree; ++k) acc += knots[i + static_cast<std::size_t>(k)];
        g[i] = acc / degree;
    }
    return g;
}

std::vector<double> uniform_points(std::size_t n) {
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    return u;
}

LeastSquaresProjector make_inverse_projector(const WarpSettings& s, const std::vector<double>& u) {
    return LeastSquaresProjector::with_pinned_ends(u, s.inverse_degree, uniform_knots(s.inverse_knots),
                                                   0.0, 1.0);
}

}  // namespace

WarpFamily::WarpFamily(WarpSettings settings)
    : settings_(settings),
      forward_knots_(uniform_knots(settings.forward_knots)),
      inverse_abscissae_(uniform_points(std::max<std::size_t>(settings.inverse_fit_points, 8))),
      inverse_projector_(make_inverse_projector(settings, inverse_abscissae_)) {
    if (settings_.forward_degree < 1) {
        throw Error(ErrorCode::unsupported_degree, "warp degree must be at least 1");
    }
    const auto g = greville(settings_.forward_degree, forward_knots_);
    base_increments_.resize(g.size() - 1);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) base_increments_[i] = g[i + 1] - g[i];
}

void WarpFamily::forward_into(std::span<const double> raw, SplineRep& out) const {
    if (raw.size() != base_increments_.size()) {
        throw Error(ErrorCode::invalid_parameter,
                    "expected " + std::to_string(base_increments_.size()) + " warp parameters");
    }
    double top = -INFINITY;
    for (double r : raw) {
        if (!std::isfinite(r)) throw Error(ErrorCode::invalid_parameter, "non-finite warp parameter");
        top = std::max(top, r);
    }
    thread_local std::vector<double> scratch;
    scratch.resize(raw.size());
    double total = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        scratch[i] = base_increments_[i] * std::exp(raw[i] - top);
        total += scratch[i];
    }
    out.degree = settings_.forward_degree;
    out.interior_knots = forward_knots_;
    out.coefficients.resize(raw.size() + 1);
    out.coefficients[0] = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        acc += scratch[i] / total;
        out.coefficients[i + 1] = acc;
    }
    out.coefficients.back() = 1.0;
}

Warping WarpFamily::make(std::span<const double> raw) const {
    Warping w;
    forward_into(raw, w.forward);
    invert_into(w.forward, w.inverse);
    return w;
}

std::vector<double> WarpFamily::identity_params() const {
    return std::vector<double>(base_increments_.size(), 0.0);
}

Warping WarpFamily::identity() const { return make(identity_params()); }

void WarpFamily::invert_into(const SplineRep& psi, SplineRep& out) const {
    thread_local std::vector<double> solved;
    solved.resize(inverse_abscissae_.size());
    inverse_points(psi, inverse_abscissae_, solved);
    inverse_projector_.fit_into(solved, out);
}

SplineRep WarpFamily::invert(const SplineRep& psi) const {
    psi.validate();
    check_warp(psi);
    SplineRep out;
    invert_into(psi, out);
    return out;
}

std::vector<double> WarpFamily::fit_params(std::span<const double> t,
                                           std::span<const double> psi_values) const {
    const auto projector = LeastSquaresProjector::with_pinned_ends(
        t, settings_.forward_degree, forward_knots_, 0.0, 1.0);
    const SplineRep fitted = projector.fit(psi_values);
    std::vector<double> raw(base_increments_.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double inc =
            std::max(fitted.coefficients[i + 1] - fitted.coefficients[i], kMinIncrement);
        raw[i] = std::log(inc / base_increments_[i]);
    }
    return raw;
}

void inverse_points(const SplineRep& psi, std::span<const double> u, std::span<double> out) {
    const auto& ik = psi.interior_knots;
    std::vector<double> breaks;
    breaks.reserve(ik.size() + 2);
    breaks.push_back(0.0);
    breaks.insert(breaks.end(), ik.begin(), ik.end());
    breaks.push_back(1.0);
    std::vector<double> values(breaks.size());
    evaluate_sorted(psi, breaks, values);

    const bool quadratic = psi.degree == 2;
    std::vector<double> slopes;
    if (quadratic) {
        slopes.resize(breaks.size());
        evaluate_sorted(derivative(psi), breaks, slopes);
    }

    std::size_t seg = 0;
    const std::size_t last = breaks.size() - 2;
    double prev = -INFINITY;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double target = u[k];
        if (target < prev) seg = 0;
        prev = target;
        while (seg < last && target > values[seg + 1]) ++seg;
        const double a = breaks[seg];
        const double b = breaks[seg + 1];
        const double h = b - a;
        if (target <= values[seg]) {
            out[k] = a;
            continue;
        }
        if (target >= values[seg + 1]) {
            out[k] = b;
            continue;
        }
        if (quadratic) {
            const double q = target - values[seg];
            const double da = std::max(slopes[seg], 0.0);
            const double curv = (slopes[seg + 1] - slopes[seg]) / (2.0 * h);
            const double disc = std::max(da * da + 4.0 * curv * q, 0.0);
            const double denom = da + std::sqrt(disc);
            const double s = denom > 0.0 ? 2.0 * q / denom : 0.0;
            out[k] = a + std::clamp(s, 0.0, h);
        } else {
            double lo = a;
            double hi = b;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (evaluate(psi, mid) < target) lo = mid; else hi = mid;
            }
            out[k] = 0.5 * (lo + hi);
        }
    }
}

void check_warp(const SplineRep& psi) {
    constexpr double tol = 1e-9;
    const auto& c = psi.coefficients;
    if (std::abs(evaluate(psi, 0.0)) > tol || std::abs(evaluate(psi, 1.0) - 1.0) > tol) {
        throw Error(ErrorCode::monotonicity_violation, "warp must satisfy psi(0)=0 and psi(1)=1");
    }
    bool coefficients_monotone = true;
    for (std::size_t i = 1; i < c.size(); ++i) {
        if (c[i] < c[i - 1] - 1e-15) coefficients_monotone = false;
    }
    if (coefficients_monotone) return;
    if (psi.degree <= 2) {
        throw Error(ErrorCode::monotonicity_violation, "warp is not nondecreasing");
    }
    const auto slope = derivative(psi);
    for (int i = 0; i <= 1000; ++i) {
        if (evaluate(slope, i / 1000.0) < -1e-12) {
            throw Error(ErrorCode::monotonicity_violation, "warp is not nondecreasing");
        }
    }
}

double roughness_penalty(const SplineRep& psi, const TimeGrid& grid) {
    thread_local SplineRep slope;
    thread_local std::vector<double> values;
    slope = derivative(psi);
    values.resize(grid.size());
    evaluate_sorted(slope, grid.points(), values);
    const auto w = grid.weights();
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - 1.0;
        acc += w[i] * d * d;
    }
    return acc;
}

double roughness_penalty(const Warping& warp, WarpDirection direction, const TimeGrid& grid) {
    return roughness_penalty(direction == WarpDirection::forward ? warp.forward : warp.inverse, grid);
}

}  // namespace warpclust
