#include "warpclust/similarity.hpp"

#include "warpclust/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace warpclust {

namespace {

/// Precomputed centered statistics of a curve's grid samples.
struct Centered {
    std::vector<double> values;  // f - Ef
    double norm = 0.0;
};

Centered centered(std::span<const double> f, const TimeGrid& grid) {
    Centered c;
    const double m = grid.integrate(f);
    c.values.resize(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) c.values[i] = f[i] - m;
    const auto w = grid.weights();
    double ss = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) ss += w[i] * c.values[i] * c.values[i];
    c.norm = std::sqrt(ss);
    return c;
}

/// r(ref, h) with ref pre-centered; NaN when h is (numerically) constant.
double corr_against(const Centered& ref, std::span<const double> h, const TimeGrid& grid) {
    const auto w = grid.weights();
    const double mh = grid.integrate(h);
    double hh = 0.0;
    double rh = 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double d = h[i] - mh;
        hh += w[i] * d * d;
        rh += w[i] * d * ref.values[i];
        sq += w[i] * h[i] * h[i];
    }
    if (!(hh > 1e-20 * sq) || !(hh > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return std::clamp(rh / (std::sqrt(hh) * ref.norm), -1.0, 1.0);
}

double penalty_of(const SplineRep& psi, const TimeGrid& grid, SplineRep& slope, std::vector<double>& buf) {
    const int p = psi.degree;
    const auto& ik = psi.interior_knots;
    const std::size_t n = psi.coefficients.size();
    slope.degree = p - 1;
    slope.interior_knots = ik;
    slope.coefficients.resize(n - 1);
    // clamped knot vector positions: t_j = 0 for j <= p, ik[j-p-1], 1 beyond
    auto knot = [&](std::size_t j) -> double {
        if (j <= static_cast<std::size_t>(p)) return 0.0;
        const std::size_t k = j - static_cast<std::size_t>(p) - 1;
        return k < ik.size() ? ik[k] : 1.0;
    };
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double span = knot(i + static_cast<std::size_t>(p) + 1) - knot(i + 1);
        slope.coefficients[i] = span > 0.0 ? p * (psi.coefficients[i + 1] - psi.coefficients[i]) / span : 0.0;
    }
    buf.resize(grid.size());
    evaluate_sorted(slope, grid.points(), buf);
    const auto w = grid.weights();
    double acc = 0.0;
    for (std::size_t i = 0; i < buf.size(); ++i) {
        const double d = buf[i] - 1.0;
        acc += w[i] * d * d;
    }
    return acc;
}

void require_non_constant(const Curve& c, const TimeGrid& grid) {
    const auto cc = centered(c.samples, grid);
    double sq = 0.0;
    const auto w = grid.weights();
    for (std::size_t i = 0; i < c.samples.size(); ++i) sq += w[i] * c.samples[i] * c.samples[i];
    if (!(cc.norm * cc.norm > 1e-20 * sq) || !(cc.norm > 0.0)) {
        throw Error(ErrorCode::degenerate_curve, "curve " + std::to_string(c.id) + " is constant");
    }
}

/// Evaluates rho(f, g | psi) for raw parameters with reusable buffers.
class PairObjective {
public:
    PairObjective(const Curve& f, const Curve& g, const SimilarityEngine& engine)
        : f_(f), g_(g), engine_(engine), fc_(centered(f.samples, engine.grid())),
          gc_(centered(g.samples, engine.grid())) {
        const std::size_t n = engine.grid().size();
        psi_t_.resize(n);
        inv_t_.resize(n);
        g_warped_.resize(n);
        f_warped_.resize(n);
    }

    /// Full evaluation of a given warp.
    SimilarityEntry evaluate_warp(const Warping& w) {
        const auto& grid = engine_.grid();
        SimilarityEntry e;
        evaluate_sorted(w.forward, grid.points(), psi_t_);
        evaluate_sorted(g_.spline, psi_t_, g_warped_);
        evaluate_sorted(w.inverse, grid.points(), inv_t_);
        evaluate_sorted(f_.spline, inv_t_, f_warped_);
        e.r_fwd = corr_against(fc_, g_warped_, grid);
        e.r_inv = corr_against(gc_, f_warped_, grid);
        e.penalty_fwd = penalty_of(w.forward, grid, slope_, buf_);
        e.penalty_inv = penalty_of(w.inverse, grid, slope_, buf_);
        const double l0 = engine_.lambda0();
        e.rho = 0.5 * ((e.r_fwd - l0 * e.penalty_fwd) + (e.r_inv - l0 * e.penalty_inv));
        return e;
    }

    double operator()(const std::vector<double>& raw) {
        engine_.family().forward_into(raw, warp_.forward);
        engine_.family().invert_into(warp_.forward, warp_.inverse);
        return -evaluate_warp(warp_).rho;
    }

private:
    const Curve& f_;
    const Curve& g_;
    const SimilarityEngine& engine_;
    Centered fc_;
    Centered gc_;
    Warping warp_;
    SplineRep slope_;
    std::vector<double> psi_t_, inv_t_, g_warped_, f_warped_, buf_;
};

}  // namespace

SimilarityEntry rho_given_psi(const Curve& f, const Curve& g, const Warping& psi, double lambda0,
                              const TimeGrid& grid) {
    psi.forward.validate();
    psi.inverse.validate();
    const auto values = evaluate(psi.forward, grid.points());
    for (double v : values) {
        if (!(v >= -1e-9 && v <= 1.0 + 1e-9)) {
            throw Error(ErrorCode::range_error, "warp leaves [0,1] on the grid");
        }
    }
    SimilarityEntry e;
    e.warp = psi;
    e.r_fwd = corr(f.samples, evaluate(g.spline, values), grid);
    e.r_inv = corr(g.samples, evaluate(f.spline, evaluate(psi.inverse, grid.points())), grid);
    e.penalty_fwd = roughness_penalty(psi.forward, grid);
    e.penalty_inv = roughness_penalty(psi.inverse, grid);
    e.rho = 0.5 * ((e.r_fwd - lambda0 * e.penalty_fwd) + (e.r_inv - lambda0 * e.penalty_inv));
    return e;
}

SimilarityEngine::SimilarityEngine(TimeGrid grid, double lambda0, WarpSettings warp, OptimizerSettings opt)
    : grid_(std::move(grid)), lambda0_(lambda0), family_(warp), opt_(std::move(opt)) {
    if (!(lambda0_ >= 0.0) || !std::isfinite(lambda0_)) {
        throw Error(ErrorCode::configuration, "lambda0 must be a finite nonnegative number");
    }
    std::vector<double> t(201);
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i) / 200.0;
    for (double a : opt_.start_exponents) {
        if (!(a > 0.0)) throw Error(ErrorCode::configuration, "start exponents must be positive");
        if (std::abs(a - 1.0) < 1e-12) {
            starts_.push_back(family_.identity_params());
            continue;
        }
        for (std::size_t i = 0; i < t.size(); ++i) v[i] = std::pow(t[i], a);
        starts_.push_back(family_.fit_params(t, v));
    }
    if (starts_.empty()) starts_.push_back(family_.identity_params());
}

SimilarityEntry SimilarityEngine::rho_given_psi(const Curve& f, const Curve& g, const Warping& psi) const {
    return warpclust::rho_given_psi(f, g, psi, lambda0_, grid_);
}

SimilarityEntry SimilarityEngine::optimize_warping(const Curve& f, const Curve& g) const {
    require_non_constant(f, grid_);
    require_non_constant(g, grid_);
    PairObjective objective(f, g, *this);
    auto fn = [&objective](const std::vector<double>& x) { return objective(x); };

    // identity first so ties keep the identity
    std::vector<double> best_x = family_.identity_params();
    double best = fn(best_x);
    for (const auto& start : starts_) {
        const auto res = nelder_mead(fn, start, opt_.nelder_mead);
        if (res.value < best) {
            best = res.value;
            best_x = res.x;
        }
    }
    if (!std::isfinite(best)) {
        throw Error(ErrorCode::degenerate_curve, "similarity objective is not finite");
    }
    const Warping w = family_.make(best_x);
    SimilarityEntry e = objective.evaluate_warp(w);
    e.warp = w;
    return e;
}

void SimilarityMatrix::set(int a, int b, const SimilarityEntry& entry) {
    if (a == b) throw Error(ErrorCode::internal_consistency, "self-pair in similarity matrix");
    if (a < b) entries_[{a, b}] = entry;
    else entries_[{b, a}] = entry.swapped();
}

SimilarityEntry SimilarityMatrix::get(int a, int b) const {
    const auto it = entries_.find(a < b ? std::pair{a, b} : std::pair{b, a});
    if (it == entries_.end()) {
        throw Error(ErrorCode::internal_consistency,
                    "missing similarity for pair " + std::to_string(a) + "," + std::to_string(b));
    }
    return a < b ? it->second : it->second.swapped();
}

double SimilarityMatrix::rho(int a, int b) const {
    const auto it = entries_.find(a < b ? std::pair{a, b} : std::pair{b, a});
    if (it == entries_.end()) {
        throw Error(ErrorCode::internal_consistency,
                    "missing similarity for pair " + std::to_string(a) + "," + std::to_string(b));
    }
    return it->second.rho;
}

bool SimilarityMatrix::contains(int a, int b) const {
    return entries_.count(a < b ? std::pair{a, b} : std::pair{b, a}) > 0;
}

std::vector<int> SimilarityMatrix::ids() const {
    std::vector<int> out;
    for (const auto& [key, _] : entries_) {
        out.push_back(key.first);
        out.push_back(key.second);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<double> SimilarityMatrix::values() const {
    std::vector<double> out;
    out.reserve(entries_.size());
    for (const auto& [_, e] : entries_) out.push_back(e.rho);
    return out;
}

double SimilarityMatrix::mean_rho() const {
    if (entries_.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& [_, e] : entries_) acc += e.rho;
    return acc / static_cast<double>(entries_.size());
}

SimilarityCache::Key SimilarityCache::key_of(const Curve& lo, const Curve& hi) {
    return {lo.id, lo.fingerprint(), hi.id, hi.fingerprint()};
}

std::size_t SimilarityCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

SimilarityEntry SimilarityCache::get(const Curve& a, const Curve& b) {
    const bool ordered = a.id < b.id;
    const Curve& lo = ordered ? a : b;
    const Curve& hi = ordered ? b : a;
    const Key key = key_of(lo, hi);
    {
        std::lock_guard lock(mutex_);
        const auto it = entries_.find(key);
        if (it != entries_.end()) return ordered ? it->second : it->second.swapped();
    }
    const SimilarityEntry e = engine_->optimize_warping(lo, hi);
    {
        std::lock_guard lock(mutex_);
        entries_.emplace(key, e);
        ++computed_;
    }
    return ordered ? e : e.swapped();
}

SimilarityMatrix SimilarityCache::matrix(std::span<const Curve> curves, unsigned threads) {
    if (curves.size() < 2) throw Error(ErrorCode::invalid_input, "similarity matrix needs at least two curves");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        for (std::size_t j = i + 1; j < curves.size(); ++j) pairs.emplace_back(i, j);
    }
    std::vector<SimilarityEntry> results(pairs.size());
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t k = begin; k < pairs.size(); k += stride) {
            results[k] = get(curves[pairs[k].first], curves[pairs[k].second]);
        }
    };
    threads = std::max(1u, threads);
    if (threads == 1 || pairs.size() < 2) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
        for (auto& th : pool) th.join();
    }
    SimilarityMatrix m;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        m.set(curves[pairs[k].first].id, curves[pairs[k].second].id, results[k]);
    }
    return m;
}

SimilarityMatrix similarity_matrix(std::span<const Curve> curves, const SimilarityEngine& engine,
                                   unsigned threads) {
    SimilarityCache cache(engine);
    return cache.matrix(curves, threads);
}

}  // namespace warpclust
