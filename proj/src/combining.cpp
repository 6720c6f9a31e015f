#include "warpclust/combining.hpp"

#include "warpclust/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace warpclust {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

void erase_value(std::vector<int>& v, int x) { v.erase(std::remove(v.begin(), v.end(), x), v.end()); }

/// Sort ids by a score, largest first, ties by ascending id.
void sort_by_score_desc(std::vector<int>& ids, const std::map<int, double>& score) {
    std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
        const double sa = score.at(a);
        const double sb = score.at(b);
        if (sa != sb) return sa > sb;
        return a < b;
    });
}

}  // namespace

OriginalScorer::OriginalScorer(const ClusteringIndex& index, const DistanceMatrix& original,
                               std::map<int, std::vector<int>> members)
    : index_(&index), original_(&original), members_(std::move(members)) {}

OriginalScorer::OriginalScorer(const ClusteringIndex& index, const DistanceMatrix& original,
                               std::span<const Curve> curves)
    : index_(&index), original_(&original) {
    for (const auto& c : curves) members_[c.id] = c.members.empty() ? std::vector<int>{c.id} : c.members;
}

Groups OriginalScorer::expand(const Groups& current) const {
    Groups out;
    out.reserve(current.size());
    for (const auto& g : current) {
        std::vector<int> expanded;
        for (int id : g) {
            const auto it = members_.find(id);
            if (it == members_.end()) {
                throw Error(ErrorCode::internal_consistency, "no members recorded for curve " + std::to_string(id));
            }
            expanded.insert(expanded.end(), it->second.begin(), it->second.end());
        }
        out.push_back(std::move(expanded));
    }
    return canonical(std::move(out));
}

double OriginalScorer::operator()(const Groups& current) const { return (*index_)(expand(current), *original_); }

PartialClustering assign_groups(std::span<const int> ids, const SimilarityMatrix& matrix, double c_star,
                                const ClusteringIndex& index) {
    std::vector<int> all(ids.begin(), ids.end());
    std::sort(all.begin(), all.end());
    PartialClustering out;
    if (all.size() < 2) {
        out.unassigned = all;
        return out;
    }
    const auto similar = [&](int a, int b) { return a != b && matrix.rho(a, b) > c_star; };
    const DistanceMatrix dist = DistanceMatrix::from_similarities(matrix);

    // step 1 and 2: total similarity over similar partners, sorted
    std::map<int, double> total;
    for (int a : all) {
        double s = 0.0;
        for (int b : all) {
            if (similar(a, b)) s += matrix.rho(a, b);
        }
        total[a] = s;
    }
    std::vector<int> remaining = all;
    sort_by_score_desc(remaining, total);

    while (!remaining.empty()) {
        const int seed = remaining.front();

        // (a) similar curves of the seed, most similar first
        std::vector<int> pool;
        std::map<int, double> to_seed;
        for (int c : remaining) {
            if (similar(seed, c)) {
                pool.push_back(c);
                to_seed[c] = matrix.rho(seed, c);
            }
        }
        sort_by_score_desc(pool, to_seed);

        // (b) admit while similar to every current member
        std::vector<int> group{seed};
        for (int c : pool) {
            if (std::all_of(group.begin(), group.end(), [&](int g) { return similar(g, c); })) group.push_back(c);
        }

        // (c) conflict test for members with similar curves outside the group
        const auto outside_similar = [&](int member) {
            std::vector<int> found;
            for (int c : remaining) {
                if (!contains(group, c) && similar(member, c)) found.push_back(c);
            }
            return found;
        };
        const bool conflict = std::any_of(group.begin(), group.end(),
                                          [&](int m) { return !outside_similar(m).empty(); });
        if (conflict) {
            const std::vector<int> admitted = group;
            for (int member : admitted) {
                if (!contains(group, member)) continue;
                std::vector<int> d;
                for (int c : outside_similar(member)) {
                    const bool similar_to_all =
                        std::all_of(group.begin(), group.end(), [&](int g) { return similar(g, c); });
                    if (!similar_to_all) d.push_back(c);
                }
                if (d.empty()) continue;
                int best = d.front();
                for (int c : d) {
                    const double rc = matrix.rho(member, c);
                    const double rb = matrix.rho(member, best);
                    if (rc > rb || (rc == rb && c < best)) best = c;
                }
                std::vector<int> rest = group;
                erase_value(rest, member);
                const double keep = index(Groups{group, {best}}, dist);
                const double leave = rest.empty() ? kNegInf : index(Groups{{member, best}, rest}, dist);
                if (!(keep > leave)) group = rest;
            }
            if (group.empty()) group = {seed};
        }

        for (int g : group) erase_value(remaining, g);
        if (group.size() >= 2) {
            std::sort(group.begin(), group.end());
            out.groups.push_back(group);
        } else {
            out.unassigned.push_back(group.front());
        }
    }
    std::sort(out.unassigned.begin(), out.unassigned.end());
    return out;
}

Curve combine_group(std::span<const Curve> group, const SimilarityMatrix& matrix, const TimeGrid& grid,
                    const ShapeSettings& shape) {
    if (group.size() < 2) throw Error(ErrorCode::invalid_input, "a combination group needs two curves");
    for (std::size_t i = 0; i < group.size(); ++i) {
        for (std::size_t j = i + 1; j < group.size(); ++j) {
            if (!matrix.contains(group[i].id, group[j].id)) {
                throw Error(ErrorCode::internal_consistency,
                            "missing warp between curves " + std::to_string(group[i].id) + " and " +
                                std::to_string(group[j].id));
            }
        }
    }

    std::size_t ref = 0;
    double best_mean = kNegInf;
    for (std::size_t i = 0; i < group.size(); ++i) {
        double m = 0.0;
        for (std::size_t j = 0; j < group.size(); ++j) {
            if (j != i) m += matrix.rho(group[i].id, group[j].id);
        }
        m /= static_cast<double>(group.size() - 1);
        if (m > best_mean || (m == best_mean && group[i].id < group[ref].id)) {
            best_mean = m;
            ref = i;
        }
    }

    const std::size_t n = grid.size();
    std::vector<double> t;
    std::vector<double> y;
    std::vector<double> w;
    t.reserve(n * group.size());
    y.reserve(n * group.size());
    w.reserve(n * group.size());
    std::vector<double> psi(n);
    std::vector<double> aligned(n);
    int n_orig = 0;
    std::set<int> members;
    int id = group.front().id;
    // members are pooled in id order so the fit does not depend on enumeration order
    std::vector<std::size_t> order(group.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return group[a].id < group[b].id; });
    for (std::size_t k : order) {
        const Curve& c = group[k];
        if (k == ref) {
            aligned = c.samples;
        } else {
            const SimilarityEntry e = matrix.get(group[ref].id, c.id);
            evaluate_sorted(e.warp.forward, grid.points(), psi);
            evaluate_sorted(c.spline, psi, aligned);
        }
        normalize_samples(aligned, grid);
        const double weight = static_cast<double>(c.n_orig);
        for (std::size_t i = 0; i < n; ++i) {
            t.push_back(grid[i]);
            y.push_back(aligned[i]);
            w.push_back(weight);
        }
        n_orig += c.n_orig;
        if (c.members.empty()) {
            members.insert(c.id);
        } else {
            members.insert(c.members.begin(), c.members.end());
        }
        id = std::min(id, c.id);
    }
    // the pooled abscissae repeat the grid, which is sorted within each block only
    std::vector<std::size_t> idx(t.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });
    std::vector<double> ts(t.size()), ys(t.size()), ws(t.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        ts[i] = t[idx[i]];
        ys[i] = y[idx[i]];
        ws[i] = w[idx[i]];
    }
    const SplineRep fit =
        fit_least_squares(ts, ys, ws, shape.degree, uniform_knots(shape.interior_knots));

    Curve out;
    out.id = id;
    out.spline = fit;
    out.samples.resize(n);
    evaluate_sorted(fit, grid.points(), out.samples);
    out.n_orig = n_orig;
    out.members.assign(members.begin(), members.end());
    return out;
}

Groups cluster_1(const PartialClustering& partial, const OriginalScorer& nu0) {
    Groups groups = partial.groups;
    std::vector<int> pending = partial.unassigned;
    std::sort(pending.begin(), pending.end());

    while (!pending.empty()) {
        // step 2: attach where an enlarged group scores best
        const std::vector<int> snapshot = pending;
        for (int g : snapshot) {
            if (groups.empty()) break;
            Groups alone = groups;
            alone.push_back({g});
            const double single = nu0(alone);
            double best = kNegInf;
            std::size_t best_k = 0;
            for (std::size_t k = 0; k < groups.size(); ++k) {
                Groups trial = groups;
                trial[k].push_back(g);
                const double v = nu0(trial);
                if (v > best) {
                    best = v;
                    best_k = k;
                }
            }
            if (best >= single) {
                groups[best_k].push_back(g);
                erase_value(pending, g);
            }
        }
        if (pending.empty()) break;

        // step 3: promote the best remaining curve to its own group
        int promoted = pending.front();
        double best = kNegInf;
        for (int h : pending) {
            Groups trial = groups;
            trial.push_back({h});
            const double v = nu0(trial);
            if (v > best) {
                best = v;
                promoted = h;
            }
        }
        groups.push_back({promoted});
        erase_value(pending, promoted);
    }
    return groups;
}

Partition candidate_result(const PartialClustering& partial, const OriginalScorer& nu0,
                           const SimilarityMatrix& matrix, double c_star) {
    const std::size_t p0 = partial.groups.size();
    std::vector<int> s0 = partial.unassigned;
    std::sort(s0.begin(), s0.end());
    const std::size_t q0 = s0.size();

    Groups result;
    if (q0 == 0) {
        result = partial.groups;
    } else if (p0 >= 2) {
        result = cluster_1(partial, nu0);
    } else if (p0 == 0 && q0 == 1) {
        result = {{s0.front()}};
    } else if (p0 == 0 && q0 == 2) {
        if (matrix.rho(s0[0], s0[1]) > c_star) {
            result = {{s0[0], s0[1]}};
        } else {
            result = {{s0[0]}, {s0[1]}};
        }
    } else if (p0 == 0) {
        // (1) the curve with the largest total similarity seeds the first group
        int first = s0.front();
        double best_total = kNegInf;
        for (int a : s0) {
            double sum = 0.0;
            for (int b : s0) {
                if (b != a) sum += matrix.rho(a, b);
            }
            if (sum > best_total) {
                best_total = sum;
                first = a;
            }
        }
        // (2) the best partner split seeds the second; ties go to the curve less similar to the first
        int second = -1;
        double best_score = kNegInf;
        for (int g : s0) {
            if (g == first) continue;
            const double v = nu0(Groups{{first}, {g}});
            const bool better = second < 0 || v > best_score ||
                                (v == best_score && matrix.rho(first, g) < matrix.rho(first, second));
            if (better) {
                best_score = v;
                second = g;
            }
        }
        PartialClustering seeded;
        seeded.groups = {{first}, {second}};
        for (int g : s0) {
            if (g != first && g != second) seeded.unassigned.push_back(g);
        }
        result = cluster_1(seeded, nu0);
    } else if (q0 == 1) {
        const auto& g1 = partial.groups.front();
        const int lone = s0.front();
        const double kappa0 = nu0(Groups{g1, {lone}});
        bool merge = false;
        for (int f : g1) {
            std::vector<int> others{lone};
            for (int x : g1) {
                if (x != f) others.push_back(x);
            }
            if (nu0(Groups{others, {f}}) > kappa0) {
                merge = true;
                break;
            }
        }
        if (merge) {
            std::vector<int> all = g1;
            all.push_back(lone);
            result = {all};
        } else {
            result = {g1, {lone}};
        }
    } else {
        // a single group with several unassigned curves: seed a second group, then complete
        const auto& g1 = partial.groups.front();
        int seed = s0.front();
        double best = kNegInf;
        for (int g : s0) {
            const double v = nu0(Groups{g1, {g}});
            if (v > best) {
                best = v;
                seed = g;
            }
        }
        PartialClustering seeded;
        seeded.groups = {g1, {seed}};
        for (int g : s0) {
            if (g != seed) seeded.unassigned.push_back(g);
        }
        result = cluster_1(seeded, nu0);
    }

    Partition out;
    out.groups = nu0.expand(result);
    out.index_value = nu0(result);
    return out;
}

}  // namespace warpclust
