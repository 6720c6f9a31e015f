#include <doctest.h>

#include "test_support.hpp"
#include "warpclust/error.hpp"
#include "warpclust/similarity.hpp"

#include <random>

using namespace warpclust;
using namespace warpclust::testing;

namespace {

/// Family member closest to t^a.
Warping power_warp(const WarpFamily& fam, double a) {
    const auto t = linspace(501);
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) v[i] = std::pow(t[i], a);
    return fam.make(fam.fit_params(t, v));
}

/// Curve whose samples are f's spline composed with the warp.
Curve warped_curve(int id, const Curve& f, const Warping& w, const TimeGrid& grid) {
    const auto psi = evaluate(w.forward, grid.points());
    return normalized(make_curve(id, evaluate(f.spline, psi), grid), grid);
}

Curve random_curve(int id, std::mt19937_64& rng, const TimeGrid& grid) {
    std::normal_distribution<double> z;
    SplineRep s;
    s.degree = 3;
    s.interior_knots = uniform_knots(4);
    s.coefficients.resize(s.num_basis());
    for (auto& c : s.coefficients) c = z(rng);
    return normalized(make_curve(id, evaluate(s, grid.points()), grid), grid);
}

}  // namespace

TEST_CASE("center_inner") {
    const auto grid = TimeGrid::uniform(2001);
    const auto t = sample(grid, [](double x) { return x; });
    CHECK(std::abs(center_inner(t, t, grid) - 1.0 / 12.0) <= 1e-4);

    const std::vector<double> constant(grid.size(), 4.2);
    CHECK(std::abs(center_inner(constant, t, grid)) <= 1e-15);

    const auto s = sample(grid, [](double x) { return std::sin(7.0 * x); });
    CHECK(std::abs(center_inner(s, t, grid) - center_inner(t, s, grid)) <= 1e-15);

    // bilinearity
    const auto h = sample(grid, [](double x) { return x * x * x; });
    std::vector<double> combo(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) combo[i] = 2.5 * s[i] - 1.5 * h[i];
    const double lhs = center_inner(combo, t, grid);
    const double rhs = 2.5 * center_inner(s, t, grid) - 1.5 * center_inner(h, t, grid);
    CHECK(std::abs(lhs - rhs) <= 1e-10);
}

TEST_CASE("corr") {
    const auto grid = TimeGrid::uniform(1001);
    const auto f = sample(grid, [](double x) { return std::exp(x) * std::cos(5.0 * x); });
    CHECK(corr(f, f, grid) == doctest::Approx(1.0).epsilon(1e-14));
    std::vector<double> pos(f.size()), neg(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        pos[i] = 3.0 * f[i] + 7.0;
        neg[i] = -0.2 * f[i] + 1.0;
    }
    CHECK(corr(f, pos, grid) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(corr(f, neg, grid) == doctest::Approx(-1.0).epsilon(1e-12));

    const auto t = sample(grid, [](double x) { return x; });
    const auto one_minus = sample(grid, [](double x) { return 1.0 - x; });
    CHECK(std::abs(corr(t, one_minus, grid) + 1.0) <= 1e-8);

    const std::vector<double> flat(grid.size(), 2.0);
    try {
        (void)corr(flat, f, grid);
        FAIL("expected zero-variance");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::zero_variance);
    }
}

TEST_CASE("normalized curves have unit seminorm") {
    const auto grid = TimeGrid::uniform(300);
    const auto c = curve_of(3, grid, f2);
    CHECK(std::abs(center_norm(c.samples, grid) - 1.0) <= 1e-9);
    // coefficient-wise normalization agrees with the samples
    const auto v = evaluate(c.spline, grid.points());
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(v[i] - c.samples[i]) <= 1e-12);

    const std::vector<double> flat(grid.size(), 1.0);
    CHECK_THROWS_AS(normalized(make_curve(1, flat, grid), grid), Error);
}

TEST_CASE("rho_given_psi") {
    const auto grid = TimeGrid::uniform(500);
    const WarpFamily fam;
    const auto a = curve_of(0, grid, f1);
    const auto c = curve_of(2, grid, f3);

    for (double l0 : {0.0, 0.5, 10.0}) {
        const auto e = rho_given_psi(a, a, fam.identity(), l0, grid);
        CHECK(std::abs(e.rho - 1.0) <= 1e-12);
    }

    // f3 = f1 ∘ t^2.5
    const auto w = power_warp(fam, 2.5);
    const auto e0 = rho_given_psi(c, a, w, 0.0, grid);
    CHECK(e0.rho >= 0.99);
    const auto e5 = rho_given_psi(c, a, w, 0.5, grid);
    CHECK(e5.penalty_fwd > 0.0);
    CHECK(e0.rho - e5.rho >= 0.5 * 0.5 * e5.penalty_fwd);
    CHECK(std::abs(e5.rho - ((e5.r_fwd - 0.5 * e5.penalty_fwd) + (e5.r_inv - 0.5 * e5.penalty_inv)) / 2.0) <=
          1e-12);

    SplineRep outside;
    outside.degree = 2;
    outside.interior_knots = uniform_knots(3);
    outside.coefficients = {0.0, 0.5, 1.4, 1.2, 1.1, 1.0};
    try {
        (void)rho_given_psi(c, a, Warping{outside, fam.identity().inverse}, 0.0, grid);
        FAIL("expected range-error");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::range_error);
    }
}

TEST_CASE("optimize_warping recovers a power warp") {
    const auto grid = TimeGrid::uniform(200);
    const auto g = curve_of(1, grid, f1);
    const auto f = curve_of(0, grid, [](double t) { return f1(std::pow(t, 1.2)); });
    const SimilarityEngine engine(grid, 0.0);

    // independent oracle: dense search over projected power warps
    double best_a = 0.0;
    double best_rho = -2.0;
    for (int k = 0; k <= 1000; ++k) {
        const double a = 0.7 + k * 0.001;
        const double r = rho_given_psi(f, g, power_warp(engine.family(), a), 0.0, grid).rho;
        if (r > best_rho) {
            best_rho = r;
            best_a = a;
        }
    }
    CHECK(std::abs(best_a - 1.2) <= 0.01);

    const auto e = engine.optimize_warping(f, g);
    double sup = 0.0;
    for (double t : linspace(1001)) sup = std::max(sup, std::abs(evaluate(e.warp.forward, t) - std::pow(t, 1.2)));
    CHECK(sup <= 0.02);
    CHECK(e.rho >= 0.99);
    CHECK(e.rho >= best_rho - 1e-6);
    CHECK(std::abs(e.rho - engine.rho_given_psi(f, g, e.warp).rho) <= 1e-10);
}

TEST_CASE("optimize_warping: self match and penalty dominance") {
    const auto grid = TimeGrid::uniform(150);
    std::mt19937_64 rng(21);
    const auto f = random_curve(0, rng, grid);
    const auto g = random_curve(1, rng, grid);
    for (double l0 : {0.0, 0.5, 3.0}) {
        const SimilarityEngine engine(grid, l0);
        CHECK(std::abs(engine.similarity(f, f).rho - 1.0) <= 1e-4);
    }
    const SimilarityEngine stiff(grid, 1e3);
    const auto e = stiff.optimize_warping(f, g);
    for (double t : linspace(201)) CHECK(std::abs(evaluate(e.warp.forward, t) - t) <= 0.01);
}

TEST_CASE("optimize_warping: degenerate input") {
    const auto grid = TimeGrid::uniform(100);
    const SimilarityEngine engine(grid, 0.0);
    Curve flat = make_curve(0, std::vector<double>(grid.size(), 1.0), grid);
    const auto g = curve_of(1, grid, f1);
    try {
        (void)engine.optimize_warping(flat, g);
        FAIL("expected degenerate-curve");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::degenerate_curve);
    }
}

TEST_CASE("similarity properties on random pairs") {
    const auto grid = TimeGrid::uniform(100);
    std::mt19937_64 rng(77);
    const SimilarityEngine e0(grid, 0.0);
    const SimilarityEngine e1(grid, 0.5);
    for (int rep = 0; rep < 6; ++rep) {
        const auto f = random_curve(2 * rep, rng, grid);
        const auto g = random_curve(2 * rep + 1, rng, grid);
        const auto best0 = e0.optimize_warping(f, g);
        // identity is always a start point
        CHECK(best0.rho >= e0.rho_given_psi(f, g, e0.family().identity()).rho - 1e-9);
        CHECK(best0.rho <= 1.0);
        const auto best1 = e1.optimize_warping(f, g);
        CHECK(best1.rho <= best0.rho + 1e-9);

        // self-warp recoverability
        std::normal_distribution<double> z(0.0, 0.3);
        std::vector<double> raw(e0.family().num_params());
        for (auto& r : raw) r = z(rng);
        const auto warped = warped_curve(100 + rep, f, e0.family().make(raw), grid);
        CHECK(e0.similarity(f, warped).rho >= 0.99);
    }
}

TEST_CASE("noiseless group similarities") {
    const auto grid = TimeGrid::uniform(100);
    const SimilarityEngine engine(grid, 0.0);
    const auto g1 = curve_of(0, grid, [](double t) { return f1(std::pow(t, 0.95)); });
    const auto g2 = curve_of(1, grid, [](double t) { return f2(std::pow(t, 1.05)); });
    const auto g3 = curve_of(2, grid, [](double t) { return f3(std::pow(t, 0.9)); });
    CHECK(engine.similarity(g1, g3).rho >= 0.99);

    // dense search over projected power warps bounds what simple warps achieve
    double power_best = -2.0;
    for (int k = 0; k <= 300; ++k) {
        const double a = 0.4 + k * 0.01;
        const auto w = power_warp(engine.family(), a);
        power_best = std::max(power_best, engine.rho_given_psi(g1, g2, w).rho);
    }
    CHECK(power_best <= 0.9);
    CHECK(engine.similarity(g1, g2).rho <= 0.9);
}

TEST_CASE("similarity matrix") {
    const auto grid = TimeGrid::uniform(80);
    const SimilarityEngine engine(grid, 0.25);
    std::vector<Curve> curves{curve_of(0, grid, f1), curve_of(1, grid, f2), curve_of(2, grid, f3)};
    const auto m = similarity_matrix(curves, engine);
    CHECK(m.size() == 3);
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            if (a == b) continue;
            CHECK(m.rho(a, b) == m.rho(b, a));
            const auto ab = m.get(a, b);
            const auto ba = m.get(b, a);
            CHECK(ab.r_fwd == ba.r_inv);
            CHECK(ab.warp.forward.coefficients == ba.warp.inverse.coefficients);
        }
    }
    const auto again = similarity_matrix(curves, engine, 2);
    for (const auto& [key, e] : m.entries()) CHECK(again.rho(key.first, key.second) == e.rho);

    SimilarityCache cache(engine);
    (void)cache.matrix(curves);
    CHECK(cache.computed() == 3);
    (void)cache.matrix(curves);
    CHECK(cache.computed() == 3);
    curves[1] = curve_of(1, grid, f1);
    (void)cache.matrix(curves);
    CHECK(cache.computed() == 5);
}
