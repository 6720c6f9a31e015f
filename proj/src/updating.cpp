#include "warpclust/updating.hpp"

#include "warpclust/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace warpclust {

namespace {

// Screening quantities this close to zero count as zero.
constexpr double kScreenTol = 1e-10;
constexpr double kSeminormTol = 1e-12;

/// Trapezoid weights times psi', rescaled to sum to one.
std::vector<double> warp_weights(const Warping& psi, const TimeGrid& grid) {
    const SplineRep slope = derivative(psi.forward);
    std::vector<double> w(grid.size());
    evaluate_sorted(slope, grid.points(), w);
    const auto base = grid.weights();
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = base[i] * std::max(w[i], 0.0);
        total += w[i];
    }
    if (!(total > 0.0)) throw Error(ErrorCode::degenerate_seminorm, "warp has no positive slope");
    for (double& v : w) v /= total;
    return w;
}

double weighted_inner(std::span<const double> f, std::span<const double> g, std::span<const double> w) {
    double mf = 0.0;
    double mg = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        mf += w[i] * f[i];
        mg += w[i] * g[i];
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * (f[i] - mf) * (g[i] - mg);
    return acc;
}

using Vec = std::vector<double>;

void axpy(double a, std::span<const double> x, Vec& y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

/// Grid-level ingredients shared by the screening and the shrinkage constant.
struct Prepared {
    const TimeGrid* grid = nullptr;
    std::span<const double> f1;
    std::vector<Vec> warped;   // f_j ∘ psi_j
    Vec scale;                 // ||f_j ∘ psi_j||
    std::vector<Vec> weights;  // E_j as weights
    Vec f1_norm_j;             // ||f1||_j

    [[nodiscard]] std::size_t k() const { return warped.size(); }
    [[nodiscard]] double inner(std::span<const double> a, std::span<const double> b) const {
        return center_inner(a, b, *grid);
    }
    [[nodiscard]] double inner_j(std::size_t j, std::span<const double> a, std::span<const double> b) const {
        return weighted_inner(a, b, weights[j]);
    }

    /// Sum over l of (f_l∘psi_l - <f_l∘psi_l, f1> f1) / ||f_l∘psi_l||.
    [[nodiscard]] Vec s0() const {
        Vec out(f1.size(), 0.0);
        for (std::size_t l = 0; l < k(); ++l) {
            axpy(1.0 / scale[l], warped[l], out);
            axpy(-inner(warped[l], f1) / scale[l], f1, out);
        }
        return out;
    }
};

Prepared prepare(const UpdateContext& ctx, const TimeGrid& grid) {
    const std::size_t k = ctx.others.size();
    if (ctx.warps.size() != k || ctx.sims.size() != k || ctx.n_js.size() != k) {
        throw Error(ErrorCode::invalid_input, "update context has mismatched neighbour data");
    }
    if (ctx.target.samples.size() != grid.size()) {
        throw Error(ErrorCode::invalid_input, "target samples do not match the grid");
    }
    Prepared p;
    p.grid = &grid;
    p.f1 = ctx.target.samples;
    p.warped.resize(k);
    p.scale.resize(k);
    p.weights.resize(k);
    p.f1_norm_j.resize(k);
    std::vector<double> psi(grid.size());
    for (std::size_t j = 0; j < k; ++j) {
        evaluate_sorted(ctx.warps[j].forward, grid.points(), psi);
        p.warped[j].resize(grid.size());
        evaluate_sorted(ctx.others[j].spline, psi, p.warped[j]);
        p.scale[j] = center_norm(p.warped[j], grid);
        if (!(p.scale[j] > kSeminormTol)) {
            throw Error(ErrorCode::degenerate_curve,
                        "warped curve " + std::to_string(ctx.others[j].id) + " is constant");
        }
        p.weights[j] = warp_weights(ctx.warps[j], grid);
        const double nj = weighted_inner(p.f1, p.f1, p.weights[j]);
        if (!(nj > kSeminormTol * kSeminormTol)) {
            throw Error(ErrorCode::degenerate_seminorm,
                        "target has zero seminorm under the warp towards curve " +
                            std::to_string(ctx.others[j].id));
        }
        p.f1_norm_j[j] = std::sqrt(nj);
    }
    return p;
}

ThetaSelection select_from(const UpdateContext& ctx, const Prepared& p) {
    const std::size_t k = p.k();
    ThetaSelection sel;
    sel.theta.assign(k, 0.0);
    sel.inner.resize(k);
    sel.res1.resize(k);
    sel.res2.assign(k, 0.0);

    const Vec s0 = p.s0();
    // (f_l∘psi_l - <f_l∘psi_l, f1>_l f1 / ||f1||_l^2) / ||f1||_l
    std::vector<Vec> resid_l(k);
    for (std::size_t l = 0; l < k; ++l) {
        const double n2 = p.f1_norm_j[l] * p.f1_norm_j[l];
        resid_l[l] = p.warped[l];
        axpy(-p.inner_j(l, p.warped[l], p.f1) / n2, p.f1, resid_l[l]);
        for (double& v : resid_l[l]) v /= p.f1_norm_j[l];
    }
    for (std::size_t j = 0; j < k; ++j) {
        sel.inner[j] = p.inner(p.f1, p.warped[j]);
        sel.res1[j] = p.inner(p.warped[j], s0) / p.scale[j];
        for (std::size_t l = 0; l < k; ++l) sel.res2[j] += p.inner_j(l, p.warped[j], resid_l[l]);
        sel.res2[j] /= p.scale[j];
    }

    std::vector<std::size_t> survivors;
    for (std::size_t j = 0; j < k; ++j) {
        if (sel.inner[j] > kScreenTol && sel.res1[j] > kScreenTol && sel.res2[j] > kScreenTol) {
            survivors.push_back(j);
        }
    }
    if (survivors.empty()) {
        sel.all_zero = true;
        return sel;
    }
    double top = -INFINITY;
    for (std::size_t j : survivors) top = std::max(top, ctx.sims[j]);
    double total = 0.0;
    for (std::size_t j : survivors) {
        const double w = top > 0.0 ? std::max(ctx.sims[j] / top, 1e-6) : 1.0;
        sel.theta[j] = static_cast<double>(ctx.n_js[j]) * std::pow(w, ctx.tau);
        total += sel.theta[j];
    }
    for (double& t : sel.theta) t /= total;
    return sel;
}

LambdaParts lambda_from(const Prepared& p, std::span<const double> theta) {
    const std::size_t k = p.k();
    if (theta.size() != k) throw Error(ErrorCode::invalid_input, "theta has the wrong length");
    const std::size_t n = p.f1.size();
    Vec g0(n, 0.0);
    Vec s(n, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        axpy(theta[j] / p.scale[j], p.warped[j], g0);
        axpy(1.0 / p.scale[j], p.warped[j], s);
    }
    const Vec s0 = p.s0();

    LambdaParts out;
    const double gf = p.inner(g0, p.f1);
    Vec rg = g0;
    axpy(-gf, p.f1, rg);
    const double sf = p.inner(s, p.f1);
    const double gs0 = p.inner(g0, s0);
    const double denom = 2.0 * sf * gs0;
    if (std::abs(denom) <= 1e-12) {
        out.lc5_skipped = true;
        out.lc5 = -INFINITY;
    } else {
        out.lc5 = (p.inner(rg, rg) * sf * sf - gs0 * gs0) / denom - gf;
    }

    out.A.resize(k);
    out.B.resize(k);
    out.D.resize(k);
    out.E.resize(k);
    out.alpha.resize(k);
    out.beta.resize(k);
    double sum_alpha = 0.0;
    double sum_beta = 0.0;
    double worst = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double nf = p.f1_norm_j[j];
        const double A = p.inner_j(j, p.f1, p.warped[j]) / nf;
        const double B = p.inner_j(j, g0, p.warped[j]) / nf;
        const double D = 2.0 * p.inner_j(j, p.f1, g0) / (nf * nf);
        const double E = std::sqrt(std::max(p.inner_j(j, g0, g0), 0.0)) / nf;
        const double alpha = B - 0.5 * A * D;
        const double beta = 0.5 * (A * E * E + B * D + std::abs(B) * E) +
                            3.0 / std::sqrt(2.0) * (std::abs(A) + 1.0) * (std::abs(D) + E) * (std::abs(D) + E);
        out.A[j] = A;
        out.B[j] = B;
        out.D[j] = D;
        out.E[j] = E;
        out.alpha[j] = alpha;
        out.beta[j] = beta;
        sum_alpha += alpha;
        sum_beta += beta;
        worst = std::max({worst, E, std::abs(B)});
    }
    out.lc6 = std::max(sum_beta / sum_alpha, worst);
    out.lambda = out.lc5_skipped ? out.lc6 : std::max(out.lc5, out.lc6);
    return out;
}

}  // namespace

double weighted_inner_j(std::span<const double> f, std::span<const double> g, const Warping& psi,
                        const TimeGrid& grid) {
    if (f.size() != grid.size() || g.size() != grid.size()) {
        throw Error(ErrorCode::invalid_input, "samples do not match the grid");
    }
    return weighted_inner(f, g, warp_weights(psi, grid));
}

double expectation_j(std::span<const double> f, const Warping& psi, const TimeGrid& grid) {
    if (f.size() != grid.size()) throw Error(ErrorCode::invalid_input, "samples do not match the grid");
    const auto w = warp_weights(psi, grid);
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * f[i];
    return acc;
}

double compute_tau(std::span<const double> original_sims) {
    double top = -INFINITY;
    for (double v : original_sims) {
        if (v < 1.0) top = std::max(top, v);
    }
    if (original_sims.empty() || top == -INFINITY) {
        throw Error(ErrorCode::missing_similarities, "no similarity below one to derive tau from");
    }
    const double ind = std::clamp(top, 1e-6, 1.0 - 1e-6);
    return std::log(0.5) / std::log(ind);
}

ThetaSelection select_theta(const UpdateContext& ctx, const TimeGrid& grid) {
    return select_from(ctx, prepare(ctx, grid));
}

LambdaParts compute_lambda(const UpdateContext& ctx, std::span<const double> theta, const TimeGrid& grid) {
    return lambda_from(prepare(ctx, grid), theta);
}

UpdateResult update_samples(const UpdateContext& ctx, const TimeGrid& grid,
                            std::optional<double> lambda_override) {
    UpdateResult out;
    out.samples = ctx.target.samples;
    if (ctx.others.empty()) return out;
    const Prepared p = prepare(ctx, grid);
    out.theta = select_from(ctx, p);
    if (out.theta.all_zero) return out;
    out.lambda = lambda_from(p, out.theta.theta);
    const double lam = lambda_override.value_or(out.lambda.lambda);
    for (double& v : out.samples) v *= lam / (lam + 1.0);
    for (std::size_t j = 0; j < p.k(); ++j) {
        if (out.theta.theta[j] == 0.0) continue;
        axpy(out.theta.theta[j] / ((lam + 1.0) * p.scale[j]), p.warped[j], out.samples);
    }
    out.updated = true;
    return out;
}

Curve update_curve(const UpdateContext& ctx, const TimeGrid& grid, const ShapeSettings& shape) {
    const UpdateResult r = update_samples(ctx, grid);
    if (!r.updated) return ctx.target;
    Curve out = make_curve(ctx.target.id, r.samples, grid, shape);
    out.n_orig = ctx.target.n_orig;
    out.members = ctx.target.members;
    return out;
}

std::vector<Curve> update_all(std::vector<Curve> curves, SimilarityCache& cache, double tau,
                              const ShapeSettings& shape) {
    if (curves.size() < 2) return curves;
    const TimeGrid& grid = cache.engine().grid();
    for (auto& c : curves) c = normalized(c, grid, shape);

    std::vector<std::size_t> order(curves.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return curves[a].id < curves[b].id; });

    for (std::size_t idx : order) {
        UpdateContext ctx;
        ctx.target = curves[idx];
        ctx.tau = tau;
        ctx.lambda0 = cache.engine().lambda0();
        for (std::size_t o : order) {
            if (o == idx) continue;
            const SimilarityEntry e = cache.get(curves[idx], curves[o]);
            ctx.others.push_back(curves[o]);
            ctx.warps.push_back(e.warp);
            ctx.sims.push_back(e.rho);
            ctx.n_js.push_back(curves[o].n_orig);
        }
        Curve next = update_curve(ctx, grid, shape);
        if (next.samples != curves[idx].samples) curves[idx] = normalized(next, grid, shape);
    }
    return curves;
}

}  // namespace warpclust
