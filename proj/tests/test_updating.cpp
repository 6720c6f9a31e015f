#include <doctest.h>

#include "test_support.hpp"
#include "update_oracle.hpp"
#include "warpclust/error.hpp"
#include "warpclust/updating.hpp"

#include <Eigen/Dense>

#include <random>

using namespace warpclust;
using namespace warpclust::testing;

TEST_CASE("weighted_inner_j") {
    const auto grid = TimeGrid::uniform(1001);
    const WarpFamily fam;
    const auto f = sample(grid, [](double t) { return std::sin(5.0 * t) + t; });
    const auto g = sample(grid, [](double t) { return std::exp(t); });
    CHECK(std::abs(weighted_inner_j(f, g, fam.identity(), grid) - center_inner(f, g, grid)) <= 1e-10);

    std::mt19937_64 rng(4);
    const std::vector<double> flat(grid.size(), -3.0);
    for (int rep = 0; rep < 5; ++rep) {
        const auto w = random_warp(fam, rng, 0.8);
        CHECK(std::abs(weighted_inner_j(flat, g, w, grid)) <= 1e-12);
        CHECK(std::abs(weighted_inner_j(f, g, w, grid) - weighted_inner_j(g, f, w, grid)) <= 1e-14);
        const Curve r = spline_curve(rep, rng, grid);
        CHECK(weighted_inner_j(r.samples, r.samples, w, grid) >= -1e-12);
    }

    const auto t = linspace(501);
    std::vector<double> sq(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) sq[i] = t[i] * t[i];
    const auto w2 = fam.make(fam.fit_params(t, sq));
    const auto ident = sample(grid, [](double x) { return x; });
    CHECK(std::abs(expectation_j(ident, w2, grid) - 2.0 / 3.0) <= 1e-3);
}

TEST_CASE("compute_tau") {
    const std::vector<double> half{0.5, 0.1, 1.0};
    CHECK(compute_tau(half) == doctest::Approx(1.0).epsilon(1e-12));
    const std::vector<double> quarter{0.25};
    CHECK(compute_tau(quarter) == doctest::Approx(0.5).epsilon(1e-12));
    const std::vector<double> near_one{0.99999999};
    CHECK(compute_tau(near_one) == doctest::Approx(std::log(0.5) / std::log(1.0 - 1e-6)).epsilon(1e-9));
    CHECK(compute_tau(near_one) == doctest::Approx(693147).epsilon(1e-5));
    try {
        (void)compute_tau(std::vector<double>{});
        FAIL("expected missing-similarities");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::missing_similarities);
    }
}

TEST_CASE("select_theta") {
    const auto grid = TimeGrid::uniform(200);
    const WarpFamily fam;
    const Curve f1 = curve_of(0, grid, testing::f1);

    SUBCASE("exact match leaves nothing to learn") {
        UpdateContext ctx{f1, {f1}, {fam.identity()}, {1.0}, {1}, 1.0, 0.0};
        ctx.others[0].id = 1;
        const auto sel = select_theta(ctx, grid);
        CHECK(sel.all_zero);
        CHECK(update_curve(ctx, grid).samples == f1.samples);
    }

    SUBCASE("anticorrelated neighbour is screened out") {
        Curve neg = f1;
        neg.id = 1;
        for (auto& v : neg.samples) v = -v;
        for (auto& c : neg.spline.coefficients) c = -c;
        const Curve other = curve_of(2, grid, [](double t) { return testing::f1(t) + 0.4 * t * t; });
        UpdateContext ctx{f1, {neg, other}, {fam.identity(), fam.identity()}, {-1.0, 0.9}, {1, 1}, 1.0, 0.0};
        const auto sel = select_theta(ctx, grid);
        CHECK(sel.inner[0] == doctest::Approx(-1.0).epsilon(1e-9));
        CHECK(sel.theta[0] == 0.0);
    }

    SUBCASE("proportional to n_j w^tau") {
        const auto bump = [](double t) { return std::cos(3.0 * t); };
        const Curve a = curve_of(1, grid, [&](double t) { return testing::f1(t) + 0.3 * bump(t); });
        const Curve b = curve_of(2, grid, [&](double t) { return testing::f1(t) + 0.5 * bump(t); });
        UpdateContext ctx{f1, {a, b}, {fam.identity(), fam.identity()}, {1.0, 0.8}, {1, 2}, 1.0, 0.0};
        const auto sel = select_theta(ctx, grid);
        REQUIRE_FALSE(sel.all_zero);
        CHECK(sel.theta[0] == doctest::Approx(1.0 / 2.6).epsilon(1e-12));
        CHECK(sel.theta[1] == doctest::Approx(1.6 / 2.6).epsilon(1e-12));
    }
}

TEST_CASE("compute_lambda agrees with an independent implementation") {
    const auto grid = TimeGrid::uniform(120);
    const WarpFamily fam;
    std::mt19937_64 rng(2024);
    int checked = 0;
    for (int rep = 0; rep < 60 && checked < 20; ++rep) {
        const auto ctx = make_context(rng, grid, fam, 2 + rep % 3);
        const auto sel = select_theta(ctx, grid);
        if (sel.all_zero) continue;
        ++checked;
        const Oracle o(ctx, grid);
        CHECK(o.c3(sel.theta) > 0.0);
        CHECK(o.c4(sel.theta) > 0.0);
        const auto parts = compute_lambda(ctx, sel.theta, grid);
        for (std::size_t j = 0; j < parts.E.size(); ++j) {
            CHECK(parts.lc6 >= parts.E[j]);
            CHECK(parts.lc6 >= std::abs(parts.B[j]));
        }
        const double lc6 = o.lc6(sel.theta);
        CHECK(std::abs(parts.lc6 - lc6) <= 1e-8 * std::max(1.0, std::abs(lc6)));
        REQUIRE_FALSE(parts.lc5_skipped);
        const double lc5 = o.lc5(sel.theta);
        CHECK(std::abs(parts.lc5 - lc5) <= 1e-8 * std::max(1.0, std::abs(lc5)));
        CHECK(parts.lambda == std::max(parts.lc5, parts.lc6));
    }
    CHECK(checked == 20);
}

TEST_CASE("update_curve") {
    const auto grid = TimeGrid::uniform(150);
    const WarpFamily fam;
    std::mt19937_64 rng(8);
    UpdateContext ctx;
    do {
        ctx = make_context(rng, grid, fam, 3);
    } while (select_theta(ctx, grid).all_zero);

    const auto stiff = update_samples(ctx, grid, 1e9);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(stiff.samples[i] - ctx.target.samples[i]) <= 1e-6);

    const auto r = update_samples(ctx, grid);
    REQUIRE(r.updated);
    const double lam = r.lambda.lambda;
    CHECK(lam > 0.0);
    double weight_sum = lam / (lam + 1.0);
    for (double t : r.theta.theta) {
        CHECK(t >= 0.0);
        CHECK(t <= 1.0);
        weight_sum += t / (lam + 1.0);
    }
    CHECK(weight_sum == doctest::Approx(1.0).epsilon(1e-12));

    ctx.target.n_orig = 3;
    ctx.target.members = {0, 7, 9};
    const Curve c = update_curve(ctx, grid);
    CHECK(c.id == ctx.target.id);
    CHECK(c.n_orig == 3);
    CHECK(c.members == ctx.target.members);

    UpdateContext bad = ctx;
    bad.target.samples.assign(grid.size(), 1.0);
    try {
        (void)compute_lambda(bad, r.theta.theta, grid);
        FAIL("expected degenerate-seminorm");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::degenerate_seminorm);
    }
}

TEST_CASE("updated curve is more similar on aggregate (200 random instances)") {
    const auto grid = TimeGrid::uniform(100);
    const WarpFamily fam;
    std::mt19937_64 rng(99);
    int qualifying = 0;
    int violations = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const auto ctx = make_context(rng, grid, fam, 2 + rep % 3);
        const auto check = check_instance(ctx, grid);
        if (!check.qualifies) continue;
        ++qualifying;
        if (check.after < check.before - 1e-6) ++violations;
    }
    MESSAGE("qualifying instances: " << qualifying);
    CHECK(qualifying >= 50);
    CHECK(violations == 0);
}

TEST_CASE("update_all") {
    const auto grid = TimeGrid::uniform(100);
    const SimilarityEngine engine(grid, 0.0);

    SUBCASE("single curve") {
        SimilarityCache cache(engine);
        std::vector<Curve> one{curve_of(0, grid, testing::f1)};
        const auto out = update_all(one, cache, 1.0);
        CHECK(out[0].samples == one[0].samples);
    }

    SUBCASE("identical curves stay put") {
        SimilarityCache cache(engine);
        std::vector<Curve> two{curve_of(0, grid, testing::f2), curve_of(1, grid, testing::f2)};
        const auto out = update_all(two, cache, 1.0);
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t p = 0; p < grid.size(); ++p) CHECK(std::abs(out[i].samples[p] - two[i].samples[p]) <= 1e-9);
        }
    }

    SUBCASE("noiseless warped copies drift together") {
        SimilarityCache cache(engine);
        std::vector<Curve> curves;
        int id = 0;
        for (double a : {0.9, 1.0, 1.1}) {
            curves.push_back(curve_of(id++, grid, [a](double t) { return testing::f1(std::pow(t, a)); }));
        }
        const double before = cache.matrix(curves).mean_rho();
        const auto out = update_all(curves, cache, compute_tau(cache.matrix(curves).values()));
        const double after = cache.matrix(out).mean_rho();
        CHECK(after >= before - 1e-9);
        for (const auto& c : out) CHECK(std::abs(center_norm(c.samples, grid) - 1.0) <= 1e-9);
    }
}
