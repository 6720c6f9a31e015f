#pragma once

#include "test_support.hpp"
#include "warpclust/updating.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace warpclust::testing {

inline Curve spline_curve(int id, std::mt19937_64& rng, const TimeGrid& grid, std::size_t knots = 4) {
    std::normal_distribution<double> z;
    SplineRep s;
    s.degree = 3;
    s.interior_knots = uniform_knots(knots);
    s.coefficients.resize(s.num_basis());
    for (auto& c : s.coefficients) c = z(rng);
    return normalized(make_curve(id, evaluate(s, grid.points()), grid), grid);
}

inline Warping random_warp(const WarpFamily& fam, std::mt19937_64& rng, double spread) {
    std::normal_distribution<double> z(0.0, spread);
    std::vector<double> raw(fam.num_params());
    for (auto& r : raw) r = z(rng);
    return fam.make(raw);
}

/// Straightforward restatement of the screening and shrinkage formulas with
/// Eigen vectors, used as an independent oracle.
struct Oracle {
    Eigen::VectorXd tw;  // trapezoid weights
    Eigen::VectorXd f1;
    std::vector<Eigen::VectorXd> u;   // f_j ∘ psi_j
    std::vector<Eigen::VectorXd> wj;  // trapezoid weights times psi_j'

    Oracle(const UpdateContext& ctx, const TimeGrid& grid) {
        const auto n = static_cast<Eigen::Index>(grid.size());
        tw = Eigen::Map<const Eigen::VectorXd>(grid.weights().data(), n);
        f1 = Eigen::Map<const Eigen::VectorXd>(ctx.target.samples.data(), n);
        for (std::size_t j = 0; j < ctx.others.size(); ++j) {
            const auto psi = evaluate(ctx.warps[j].forward, grid.points());
            const auto vals = evaluate(ctx.others[j].spline, psi);
            u.push_back(Eigen::Map<const Eigen::VectorXd>(vals.data(), n));
            const auto d = evaluate(derivative(ctx.warps[j].forward), grid.points());
            Eigen::VectorXd w = tw.cwiseProduct(Eigen::Map<const Eigen::VectorXd>(d.data(), n));
            wj.push_back(w / w.sum());
        }
    }

    static double form(const Eigen::VectorXd& w, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        const double ma = w.dot(a) / w.sum();
        const double mb = w.dot(b) / w.sum();
        return w.dot(((a.array() - ma) * (b.array() - mb)).matrix());
    }
    double ip(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const { return form(tw, a, b); }
    double ipj(std::size_t j, const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
        return form(wj[j], a, b);
    }
    double nrm(const Eigen::VectorXd& a) const { return std::sqrt(ip(a, a)); }
    double nrmj(std::size_t j, const Eigen::VectorXd& a) const { return std::sqrt(ipj(j, a, a)); }

    Eigen::VectorXd g0(std::span<const double> theta) const {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(f1.size());
        for (std::size_t j = 0; j < u.size(); ++j) g += theta[j] * u[j] / nrm(u[j]);
        return g;
    }
    Eigen::VectorXd s0() const {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(f1.size());
        for (std::size_t l = 0; l < u.size(); ++l) s += (u[l] - ip(u[l], f1) * f1) / nrm(u[l]);
        return s;
    }

    double c3(std::span<const double> theta) const { return ip(g0(theta), s0()); }
    double c4(std::span<const double> theta) const {
        const Eigen::VectorXd g = g0(theta);
        double acc = 0.0;
        for (std::size_t l = 0; l < u.size(); ++l) {
            const double n = nrmj(l, f1);
            acc += ipj(l, g, (u[l] - ipj(l, u[l], f1) * f1 / (n * n)) / n);
        }
        return acc;
    }

    double lc5(std::span<const double> theta) const {
        const Eigen::VectorXd g = g0(theta);
        Eigen::VectorXd s = Eigen::VectorXd::Zero(f1.size());
        for (const auto& v : u) s += v / nrm(v);
        const Eigen::VectorXd rg = g - ip(g, f1) * f1;
        const double sf = ip(s, f1);
        const double gs = ip(g, s0());
        return (ip(rg, rg) * sf * sf - gs * gs) / (2.0 * sf * gs) - ip(g, f1);
    }

    double lc6(std::span<const double> theta) const {
        const Eigen::VectorXd g = g0(theta);
        double sa = 0.0;
        double sb = 0.0;
        double m = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) {
            const double n = nrmj(j, f1);
            const double A = ipj(j, f1, u[j]) / n;
            const double B = ipj(j, g, u[j]) / n;
            const double D = 2.0 * ipj(j, f1, g) / (n * n);
            const double E = nrmj(j, g) / n;
            sa += B - A * D / 2.0;
            sb += (A * E * E + B * D + std::abs(B) * E) / 2.0 +
                  3.0 / std::sqrt(2.0) * (std::abs(A) + 1.0) * std::pow(std::abs(D) + E, 2);
            m = std::max(m, std::max(E, std::abs(B)));
        }
        return std::max(sb / sa, m);
    }

    /// Sum over j of r(f, f_j∘psi_j) + r(f∘psi_j^-1, f_j), the latter through the
    /// change of variables u = psi_j(t). Penalties do not depend on f and are left out.
    double aggregate(const Eigen::VectorXd& f) const {
        double acc = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) {
            acc += ip(f, u[j]) / (nrm(f) * nrm(u[j]));
            acc += ipj(j, f, u[j]) / nrmj(j, f);
        }
        return acc;
    }
};

inline UpdateContext make_context(std::mt19937_64& rng, const TimeGrid& grid, const WarpFamily& fam, int k) {
    UpdateContext ctx;
    ctx.target = spline_curve(0, rng, grid);
    std::normal_distribution<double> z;
    std::uniform_int_distribution<int> counts(1, 4);
    for (int j = 1; j < k; ++j) {
        // neighbours are noisy copies of the target so some of them survive screening
        const Curve noise = spline_curve(j, rng, grid, 6);
        std::vector<double> mix(grid.size());
        const double amount = std::abs(z(rng)) * 0.8;
        for (std::size_t i = 0; i < mix.size(); ++i) {
            mix[i] = ctx.target.samples[i] + amount * noise.samples[i];
        }
        ctx.others.push_back(normalized(make_curve(j, mix, grid), grid));
        ctx.warps.push_back(random_warp(fam, rng, 0.3));
        ctx.sims.push_back(std::uniform_real_distribution<double>(0.2, 0.99)(rng));
        ctx.n_js.push_back(counts(rng));
    }
    ctx.tau = std::uniform_real_distribution<double>(0.5, 3.0)(rng);
    return ctx;
}

struct InstanceCheck {
    bool qualifies = false;
    double before = 0.0;
    double after = 0.0;
};

/// Runs the update and, when the instance meets the screening conditions and the
/// shrinkage bounds, returns the aggregate similarity before and after.
inline InstanceCheck check_instance(const UpdateContext& ctx, const TimeGrid& grid) {
    InstanceCheck out;
    const auto r = update_samples(ctx, grid);
    if (!r.updated) return out;
    const Oracle o(ctx, grid);
    if (!(o.c3(r.theta.theta) > 0.0 && o.c4(r.theta.theta) > 0.0)) return out;
    for (std::size_t j = 0; j < ctx.others.size(); ++j) {
        if (r.theta.inner[j] < 0.0) return out;
    }
    if (r.lambda.lambda < r.lambda.lc6 || (!r.lambda.lc5_skipped && r.lambda.lambda < r.lambda.lc5)) return out;
    const Eigen::Map<const Eigen::VectorXd> fstar(r.samples.data(), static_cast<Eigen::Index>(r.samples.size()));
    out.qualifies = true;
    out.before = o.aggregate(o.f1) / 2.0;
    out.after = o.aggregate(fstar) / 2.0;
    return out;
}

}  // namespace warpclust::testing
