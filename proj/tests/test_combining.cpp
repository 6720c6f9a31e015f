#include <doctest.h>

#include "test_support.hpp"
#include "warpclust/combining.hpp"
#include "warpclust/error.hpp"

#include <random>

using namespace warpclust;
using namespace warpclust::testing;

namespace {

/// Similarity matrix from (a, b, rho) triples; warps are left at their defaults.
SimilarityMatrix sims_of(std::initializer_list<std::tuple<int, int, double>> pairs) {
    SimilarityMatrix m;
    for (const auto& [a, b, r] : pairs) {
        SimilarityEntry e;
        e.rho = r;
        m.set(a, b, e);
    }
    return m;
}

SimilarityMatrix random_sims(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-0.2, 1.0);
    SimilarityMatrix m;
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            SimilarityEntry e;
            e.rho = u(rng);
            m.set(a, b, e);
        }
    }
    return m;
}

std::map<int, std::vector<int>> self_members(const std::vector<int>& ids) {
    std::map<int, std::vector<int>> m;
    for (int id : ids) m[id] = {id};
    return m;
}

/// Two tight groups {0,1}, {2,3} far apart, plus curve 4 at the given distances.
DistanceMatrix two_groups_plus(double to_first, double to_second) {
    Eigen::MatrixXd d(5, 5);
    d << 0.0, 0.1, 1.0, 1.0, to_first,
         0.1, 0.0, 1.0, 1.0, to_first,
         1.0, 1.0, 0.0, 0.1, to_second,
         1.0, 1.0, 0.1, 0.0, to_second,
         to_first, to_first, to_second, to_second, 0.0;
    return DistanceMatrix({0, 1, 2, 3, 4}, d);
}

bool is_partition_of(const Partition& p, int n) {
    std::vector<int> seen;
    for (const auto& g : p.groups) {
        if (g.empty()) return false;
        seen.insert(seen.end(), g.begin(), g.end());
    }
    std::sort(seen.begin(), seen.end());
    if (seen.size() != static_cast<std::size_t>(n)) return false;
    for (int i = 0; i < n; ++i) {
        if (seen[static_cast<std::size_t>(i)] != i) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("assign_groups: trivial thresholds") {
    std::mt19937_64 rng(3);
    const auto m = random_sims(rng, 6);
    const std::vector<int> ids{0, 1, 2, 3, 4, 5};
    const auto sil = ClusteringIndex::make_silhouette();

    const auto all = assign_groups(ids, m, -0.5, sil);
    REQUIRE(all.groups.size() == 1);
    CHECK(all.groups[0] == ids);
    CHECK(all.unassigned.empty());

    const auto none = assign_groups(ids, m, 1.0, sil);
    CHECK(none.groups.empty());
    CHECK(none.unassigned == ids);
}

TEST_CASE("assign_groups: hand-traced conflicts") {
    const auto sil = ClusteringIndex::make_silhouette();

    SUBCASE("seed keeps its partner when the blocked curve is farther") {
        const auto m = sims_of({{1, 2, 0.9}, {1, 3, 0.85}, {2, 3, 0.2}});
        const std::vector<int> ids{1, 2, 3};
        const auto out = assign_groups(ids, m, 0.5, sil);
        CHECK(out.groups == Groups{{1, 2}});
        CHECK(out.unassigned == std::vector<int>{3});
    }

    SUBCASE("member leaves for a closer outside curve") {
        const auto m = sims_of({{1, 2, 0.7}, {1, 3, 0.65}, {1, 4, 0.68}, {1, 5, 0.1}, {2, 3, 0.1}, {2, 4, 0.1},
                                {2, 5, 0.9}, {3, 4, 0.9}, {3, 5, 0.1}, {4, 5, 0.1}});
        const std::vector<int> ids{1, 2, 3, 4, 5};
        const auto out = assign_groups(ids, m, 0.5, sil);
        CHECK(out.groups == Groups{{2, 5}, {3, 4}});
        CHECK(out.unassigned == std::vector<int>{1});
    }
}

TEST_CASE("assign_groups: groups are cliques or ratified") {
    std::mt19937_64 rng(17);
    const auto sil = ClusteringIndex::make_silhouette();
    for (int rep = 0; rep < 30; ++rep) {
        const auto m = random_sims(rng, 9);
        const std::vector<int> ids{0, 1, 2, 3, 4, 5, 6, 7, 8};
        const auto out = assign_groups(ids, m, 0.4, sil);
        std::vector<int> seen = out.unassigned;
        for (const auto& g : out.groups) {
            CHECK(g.size() >= 2);
            // admission requires similarity to every member; the conflict test only removes
            for (std::size_t i = 0; i < g.size(); ++i) {
                for (std::size_t j = i + 1; j < g.size(); ++j) CHECK(m.rho(g[i], g[j]) > 0.4);
            }
            seen.insert(seen.end(), g.begin(), g.end());
        }
        std::sort(seen.begin(), seen.end());
        CHECK(seen == ids);
    }
}

TEST_CASE("combine_group") {
    const auto grid = TimeGrid::uniform(120);
    const WarpFamily fam;
    const Curve a = curve_of(4, grid, f1);
    Curve b = curve_of(2, grid, [](double t) { return f1(t) + 0.5 * t; });
    b.n_orig = 1;

    SimilarityEntry e;
    e.rho = 0.95;
    e.warp = fam.identity();
    SimilarityMatrix m;
    m.set(2, 4, e);

    SUBCASE("identical members") {
        Curve twin = a;
        twin.id = 9;
        twin.members = {9};
        SimilarityMatrix mm;
        mm.set(4, 9, e);
        const std::vector<Curve> g{a, twin};
        const Curve rep = combine_group(g, mm, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(rep.samples[i] - a.samples[i]) <= 1e-6);
        CHECK(rep.id == 4);
        CHECK(rep.n_orig == 2);
        CHECK(rep.members == std::vector<int>{4, 9});
    }

    SUBCASE("weights count original curves") {
        Curve heavy = a;
        heavy.n_orig = 3;
        heavy.members = {4, 6, 8};
        const std::vector<Curve> g{heavy, b};
        const Curve rep = combine_group(g, m, grid);
        CHECK(rep.n_orig == 4);
        CHECK(rep.members == std::vector<int>{2, 4, 6, 8});
        CHECK(rep.id == 2);

        std::vector<double> t, y;
        for (int copy = 0; copy < 3; ++copy) {
            for (std::size_t i = 0; i < grid.size(); ++i) {
                t.push_back(grid[i]);
                y.push_back(a.samples[i]);
            }
        }
        for (std::size_t i = 0; i < grid.size(); ++i) {
            t.push_back(grid[i]);
            y.push_back(b.samples[i]);
        }
        std::vector<std::size_t> idx(t.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](auto p, auto q) { return t[p] < t[q]; });
        std::vector<double> ts, ys;
        for (auto i : idx) {
            ts.push_back(t[i]);
            ys.push_back(y[i]);
        }
        const auto expected = evaluate(fit_least_squares(ts, ys, 3, uniform_knots(16)), grid.points());
        for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(rep.samples[i] - expected[i]) <= 1e-9);

        const std::vector<Curve> reversed{b, heavy};
        CHECK(combine_group(reversed, m, grid).samples == rep.samples);
    }

    SUBCASE("missing warp") {
        Curve c = a;
        c.id = 11;
        const std::vector<Curve> g{a, b, c};
        try {
            (void)combine_group(g, m, grid);
            FAIL("expected internal-consistency");
        } catch (const Error& err) {
            CHECK(err.code() == ErrorCode::internal_consistency);
        }
    }
}

TEST_CASE("combine_group aligns members onto the reference") {
    const auto grid = TimeGrid::uniform(150);
    const SimilarityEngine engine(grid, 0.0);
    std::vector<Curve> g;
    int id = 0;
    for (double a : {0.9, 1.0, 1.1}) g.push_back(curve_of(id++, grid, [a](double t) { return f1(std::pow(t, a)); }));
    const auto m = similarity_matrix(g, engine);
    const Curve rep = combine_group(g, m, grid);
    // the middle curve is the most central and the others are warped onto it
    CHECK(corr(rep.samples, g[1].samples, grid) >= 0.999);
}

TEST_CASE("cluster_1") {
    const auto sil = ClusteringIndex::make_silhouette();
    const std::vector<int> ids{0, 1, 2, 3, 4};

    SUBCASE("nothing to place") {
        const auto d = two_groups_plus(1.0, 1.0);
        const OriginalScorer nu0(sil, d, self_members(ids));
        const PartialClustering p{{{0, 1}, {2, 3}}, {}};
        CHECK(cluster_1(p, nu0) == p.groups);
    }

    SUBCASE("close curve joins its group") {
        const auto d = two_groups_plus(0.15, 1.0);
        const OriginalScorer nu0(sil, d, self_members(ids));
        const auto out = cluster_1({{{0, 1}, {2, 3}}, {4}}, nu0);
        CHECK(canonical(out) == Groups{{0, 1, 4}, {2, 3}});
    }

    SUBCASE("equidistant outlier becomes a singleton") {
        const auto d = two_groups_plus(1.0, 1.0);
        const OriginalScorer nu0(sil, d, self_members(ids));
        const auto out = cluster_1({{{0, 1}, {2, 3}}, {4}}, nu0);
        CHECK(canonical(out) == Groups{{0, 1}, {2, 3}, {4}});
    }
}

TEST_CASE("candidate_result special cases") {
    const auto sil = ClusteringIndex::make_silhouette();

    SUBCASE("one group, nothing left") {
        const auto d = two_groups_plus(1.0, 1.0);
        const OriginalScorer nu0(sil, d, self_members({0, 1, 2, 3, 4}));
        const auto m = sims_of({});
        const auto p = candidate_result({{{0, 1, 2, 3, 4}}, {}}, nu0, m, 0.5);
        CHECK(p.groups == Groups{{0, 1, 2, 3, 4}});
    }

    SUBCASE("two similar curves form one group") {
        Eigen::MatrixXd dd(2, 2);
        dd << 0.0, 0.1, 0.1, 0.0;
        const DistanceMatrix d({0, 1}, dd);
        const OriginalScorer nu0(sil, d, self_members({0, 1}));
        CHECK(candidate_result({{}, {0, 1}}, nu0, sims_of({{0, 1, 0.9}}), 0.5).groups == Groups{{0, 1}});
        CHECK(candidate_result({{}, {0, 1}}, nu0, sims_of({{0, 1, 0.4}}), 0.5).groups == Groups{{0}, {1}});
    }

    SUBCASE("lone curve far from the only group") {
        Eigen::MatrixXd dd(3, 3);
        dd << 0.0, 0.1, 1.0,
              0.1, 0.0, 1.0,
              1.0, 1.0, 0.0;
        const DistanceMatrix d({0, 1, 2}, dd);
        const OriginalScorer nu0(sil, d, self_members({0, 1, 2}));
        const auto p = candidate_result({{{0, 1}}, {2}}, nu0, sims_of({}), 0.5);
        CHECK(p.groups == Groups{{0, 1}, {2}});
        REQUIRE(p.index_value.has_value());
        CHECK(*p.index_value == doctest::Approx(0.6));
    }

    SUBCASE("representatives expand to their original members") {
        Eigen::MatrixXd dd(4, 4);
        dd << 0.0, 0.1, 0.9, 0.9,
              0.1, 0.0, 0.9, 0.9,
              0.9, 0.9, 0.0, 0.2,
              0.9, 0.9, 0.2, 0.0;
        const DistanceMatrix d({0, 1, 2, 3}, dd);
        const OriginalScorer nu0(sil, d, std::map<int, std::vector<int>>{{0, {0, 1}}, {2, {2}}, {3, {3}}});
        const auto p = candidate_result({{{2, 3}}, {0}}, nu0, sims_of({}), 0.5);
        CHECK(p.groups == Groups{{0, 1}, {2, 3}});
    }
}

TEST_CASE("candidate_result always returns a partition of the original ids") {
    std::mt19937_64 rng(31);
    const std::vector<int> ids{0, 1, 2, 3, 4, 5, 6, 7};
    for (const auto& index : {ClusteringIndex::make_silhouette(),
                              ClusteringIndex::make_dunn(DunnInter::I1, DunnIntra::J1)}) {
        for (int rep = 0; rep < 40; ++rep) {
            const auto m = random_sims(rng, 8);
            const auto d = DistanceMatrix::from_similarities(m);
            const OriginalScorer nu0(index, d, self_members(ids));
            const double c_star = std::uniform_real_distribution<double>(0.2, 0.95)(rng);
            const auto partial = assign_groups(ids, m, c_star, index);
            const auto p = candidate_result(partial, nu0, m, c_star);
            CHECK(is_partition_of(p, 8));
        }
    }
}
