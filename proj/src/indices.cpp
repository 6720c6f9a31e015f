#include "warpclust/indices.hpp"

#include "warpclust/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace warpclust {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_two_groups(const Groups& groups) {
    if (groups.size() < 2) throw Error(ErrorCode::undefined_index, "index needs at least two groups");
}

double inter_distance(const std::vector<int>& a, const std::vector<int>& b, const DistanceMatrix& d,
                      DunnInter kind) {
    double lo = kInf;
    double hi = 0.0;
    double sum = 0.0;
    for (int x : a) {
        for (int y : b) {
            const double v = d(x, y);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
        }
    }
    switch (kind) {
        case DunnInter::I1: return lo;
        case DunnInter::I2: return hi;
        case DunnInter::I3: return sum / static_cast<double>(a.size() * b.size());
    }
    return lo;
}

double intra_distance(const std::vector<int>& g, const DistanceMatrix& d, DunnIntra kind) {
    if (g.size() < 2) return 0.0;
    double hi = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = i + 1; j < g.size(); ++j) {
            const double v = d(g[i], g[j]);
            hi = std::max(hi, v);
            sum += v;
        }
    }
    if (kind == DunnIntra::J1) return hi;
    // ordered pairs: each unordered pair counted twice
    return 2.0 * sum / static_cast<double>(g.size() * (g.size() - 1));
}

double choose2(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace

Groups canonical(Groups groups) {
    for (auto& g : groups) std::sort(g.begin(), g.end());
    std::sort(groups.begin(), groups.end());
    return groups;
}

std::size_t Partition::num_elements() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.size();
    return n;
}

void Partition::validate() const {
    std::set<int> seen;
    for (const auto& g : groups) {
        if (g.empty()) throw Error(ErrorCode::invalid_input, "partition contains an empty group");
        for (int id : g) {
            if (!seen.insert(id).second) {
                throw Error(ErrorCode::invalid_input, "id " + std::to_string(id) + " appears twice");
            }
        }
    }
}

DistanceMatrix::DistanceMatrix(std::vector<int> ids, Eigen::MatrixXd values)
    : ids_(std::move(ids)), values_(std::move(values)) {
    const auto n = static_cast<Eigen::Index>(ids_.size());
    if (values_.rows() != n || values_.cols() != n) {
        throw Error(ErrorCode::invalid_input, "distance matrix shape does not match its ids");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!index_.emplace(ids_[static_cast<std::size_t>(i)], i).second) {
            throw Error(ErrorCode::invalid_input, "duplicate id in distance matrix");
        }
    }
}

DistanceMatrix DistanceMatrix::from_similarities(const SimilarityMatrix& sims) {
    auto ids = sims.ids();
    const auto n = static_cast<Eigen::Index>(ids.size());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const int a = ids[static_cast<std::size_t>(i)];
            const int b = ids[static_cast<std::size_t>(j)];
            if (!sims.contains(a, b)) {
                throw Error(ErrorCode::missing_similarities,
                            "no similarity for pair " + std::to_string(a) + "," + std::to_string(b));
            }
            d(i, j) = d(j, i) = std::max(0.0, 1.0 - sims.rho(a, b));
        }
    }
    return DistanceMatrix(std::move(ids), std::move(d));
}

double DistanceMatrix::operator()(int a, int b) const {
    const auto ia = index_.find(a);
    const auto ib = index_.find(b);
    if (ia == index_.end() || ib == index_.end()) {
        throw Error(ErrorCode::missing_similarities,
                    "no distance for pair " + std::to_string(a) + "," + std::to_string(b));
    }
    return values_(ia->second, ib->second);
}

double silhouette(const Groups& groups, const DistanceMatrix& dist) {
    require_two_groups(groups);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& g = groups[gi];
        for (int x : g) {
            ++count;
            if (g.size() < 2) continue;
            double a = 0.0;
            for (int y : g) {
                if (y != x) a += dist(x, y);
            }
            a /= static_cast<double>(g.size() - 1);
            double b = kInf;
            for (std::size_t hi = 0; hi < groups.size(); ++hi) {
                if (hi == gi) continue;
                double m = 0.0;
                for (int y : groups[hi]) m += dist(x, y);
                b = std::min(b, m / static_cast<double>(groups[hi].size()));
            }
            const double top = std::max(a, b);
            if (top > 0.0) total += (b - a) / top;
        }
    }
    return total / static_cast<double>(count);
}

double dunn(const Groups& groups, const DistanceMatrix& dist, DunnInter inter, DunnIntra intra) {
    require_two_groups(groups);
    double num = kInf;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            num = std::min(num, inter_distance(groups[i], groups[j], dist, inter));
        }
    }
    double den = 0.0;
    for (const auto& g : groups) den = std::max(den, intra_distance(g, dist, intra));
    if (den == 0.0) return kInf;
    return num / den;
}

double adjusted_rand(const Groups& p, const Groups& q) {
    std::map<int, std::size_t> label_p;
    std::map<int, std::size_t> label_q;
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (int id : p[i]) label_p[id] = i;
    }
    for (std::size_t i = 0; i < q.size(); ++i) {
        for (int id : q[i]) label_q[id] = i;
    }
    if (label_p.size() != label_q.size() ||
        !std::equal(label_p.begin(), label_p.end(), label_q.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
        throw Error(ErrorCode::element_mismatch, "partitions cover different ids");
    }
    const double n = static_cast<double>(label_p.size());
    std::map<std::pair<std::size_t, std::size_t>, double> table;
    std::vector<double> rows(p.size(), 0.0);
    std::vector<double> cols(q.size(), 0.0);
    for (const auto& [id, lp] : label_p) {
        const std::size_t lq = label_q.at(id);
        table[{lp, lq}] += 1.0;
        rows[lp] += 1.0;
        cols[lq] += 1.0;
    }
    double index = 0.0;
    for (const auto& [cell, c] : table) index += choose2(c);
    double a = 0.0;
    double b = 0.0;
    for (double r : rows) a += choose2(r);
    for (double c : cols) b += choose2(c);
    const double expected = a * b / choose2(n);
    const double top = 0.5 * (a + b);
    if (top == expected) return 1.0;
    return (index - expected) / (top - expected);
}

double ClusteringIndex::operator()(const Groups& groups, const DistanceMatrix& dist) const {
    if (groups.size() < 2) return -kInf;
    if (kind == Kind::silhouette) return silhouette(groups, dist);
    return dunn(groups, dist, inter, intra);
}

std::string ClusteringIndex::name() const {
    if (kind == Kind::silhouette) return "silhouette";
    return "dunn(" + to_string(inter) + "," + to_string(intra) + ")";
}

std::string to_string(DunnInter v) {
    switch (v) {
        case DunnInter::I1: return "I1";
        case DunnInter::I2: return "I2";
        case DunnInter::I3: return "I3";
    }
    return "I1";
}

std::string to_string(DunnIntra v) { return v == DunnIntra::J1 ? "J1" : "J2"; }

DunnInter parse_dunn_inter(const std::string& s) {
    if (s == "I1") return DunnInter::I1;
    if (s == "I2") return DunnInter::I2;
    if (s == "I3") return DunnInter::I3;
    throw Error(ErrorCode::configuration, "unknown inter-cluster distance '" + s + "'");
}

DunnIntra parse_dunn_intra(const std::string& s) {
    if (s == "J1") return DunnIntra::J1;
    if (s == "J2") return DunnIntra::J2;
    throw Error(ErrorCode::configuration, "unknown intra-cluster distance '" + s + "'");
}

}  // namespace warpclust
