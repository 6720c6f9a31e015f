#include "warpclust/simulation.hpp"

#include "warpclust/error.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace warpclust {

namespace {

constexpr double kPi = std::numbers::pi;

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

Groups groups_from_labels(const std::vector<int>& ids, const std::vector<int>& labels) {
    std::map<int, std::vector<int>> by_label;
    for (std::size_t i = 0; i < ids.size(); ++i) by_label[labels[i]].push_back(ids[i]);
    Groups out;
    for (auto& [label, g] : by_label) out.push_back(std::move(g));
    return canonical(std::move(out));
}

}  // namespace

Groups SimulatedData::truth() const { return groups_from_labels(ids, labels); }
Groups SimulatedData::truth_merged() const { return groups_from_labels(ids, merged_labels); }

ShapeFn shape_function(const std::string& name) {
    if (name == "f1") return [](double t) { return std::sin(2.5 * kPi * t); };
    if (name == "f2") return [](double t) { return (-t * t + std::sin(2.0 * kPi * t) + 0.25) / 1.3; };
    if (name == "f3") return [](double t) { return std::sin(2.5 * kPi * std::pow(t, 2.5)); };
    if (name == "g1") return [](double t) { return std::sin(2.0 * kPi * t * t); };
    if (name == "g2") return [](double t) { return std::cos(2.0 * kPi * t * t); };
    throw Error(ErrorCode::configuration, "unknown shape '" + name + "'");
}

ShapeFn sang_random_shape(int which, const std::array<double, 4>& eps) {
    const auto [e1, e2, e3, e4] = eps;
    switch (which) {
        case 4:
            return [=](double t) {
                const double u = e2 + (1.0 + e3) * 2.0 * kPi * t;
                return (1.0 + e1) * std::sin(u) + (1.0 + e4) * std::sin(u * u / (2.0 * kPi));
            };
        case 5:
            return [=](double t) {
                const double u = e2 + (1.0 + e3) * 2.0 * kPi * t;
                return (2.0 + e1) * std::sin(u) + (-1.0 + e4) * std::sin(u * u / (2.0 * kPi));
            };
        case 6:
            return [=](double t) {
                const double u = -1.0 / 3.0 + e2 + (0.75 + e3) * 2.0 * kPi * t;
                return (1.0 + e1) * std::sin(u) + (1.0 + e4) * std::sin(u * u / (2.0 * kPi));
            };
        default:
            throw Error(ErrorCode::configuration, "random shape must be 4, 5 or 6");
    }
}

std::vector<double> default_alphas(ScenarioKind kind) {
    if (kind == ScenarioKind::s33b) return {0.78, 0.89, 1.11, 1.22};
    std::vector<double> a(10);
    for (int k = 0; k < 10; ++k) a[static_cast<std::size_t>(k)] = 0.86 + 0.03 * k;
    return a;
}

double default_sigma(ScenarioKind kind) {
    return kind == ScenarioKind::s33a || kind == ScenarioKind::s33b ? 0.0 : 0.15;
}

SimulatedData generate(const Scenario& sc) {
    if (!(sc.sigma >= 0.0)) throw Error(ErrorCode::configuration, "sigma must be nonnegative");
    if (sc.n_points < 4) throw Error(ErrorCode::configuration, "at least 4 points per curve are needed");
    const int n_groups = sc.kind == ScenarioKind::s33b ? 2 : 3;
    for (int g = 0; g < n_groups; ++g) {
        if (sc.sizes[static_cast<std::size_t>(g)] <= 0) throw Error(ErrorCode::configuration, "group sizes must be positive");
    }
    const std::vector<double> alphas = sc.alphas.empty() ? default_alphas(sc.kind) : sc.alphas;
    if (alphas.empty()) throw Error(ErrorCode::configuration, "empty warp exponent list");

    SimulatedData out;
    out.t.resize(sc.n_points);
    for (std::size_t i = 0; i < sc.n_points; ++i) {
        out.t[i] = static_cast<double>(i) / static_cast<double>(sc.n_points - 1);
    }

    std::vector<std::string> shapes;
    std::vector<int> merged;
    switch (sc.kind) {
        case ScenarioKind::s31:
        case ScenarioKind::s32a:
        case ScenarioKind::s32b:
            shapes = {"f1", "f2", "f3"};
            merged = {0, 1, 0};
            break;
        case ScenarioKind::s33a:
            shapes = {"f4", "f5", "f6"};
            merged = {0, 0, 1};
            break;
        case ScenarioKind::s33b:
            shapes = {"g1", "g2"};
            merged = {0, 1};
            break;
    }

    int id = 0;
    for (int g = 0; g < n_groups; ++g) {
        for (int j = 0; j < sc.sizes[static_cast<std::size_t>(g)]; ++j, ++id) {
            auto rng = stream(sc.seed, 1, static_cast<std::uint64_t>(id));
            std::normal_distribution<double> noise(0.0, 1.0);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const double alpha = alphas[static_cast<std::size_t>(j) % alphas.size()];

            ShapeFn shape;
            if (sc.kind == ScenarioKind::s33a) {
                // curve j of every group shares the same coefficient draws
                auto eps_rng = stream(sc.seed, 2, static_cast<std::uint64_t>(j));
                std::array<double, 4> eps{};
                for (auto& e : eps) e = sc.eps_scale * noise(eps_rng);
                shape = sang_random_shape(4 + g, eps);
            } else {
                shape = shape_function(shapes[static_cast<std::size_t>(g)]);
            }

            std::function<double(double)> warp;
            switch (sc.kind) {
                case ScenarioKind::s31:
                case ScenarioKind::s33b:
                    warp = [alpha](double t) { return std::pow(t, alpha); };
                    break;
                case ScenarioKind::s32a: {
                    const double a1 = 0.975 + 0.05 * unit(rng);
                    const double a2 = 0.05 * unit(rng);
                    warp = [a1, a2](double t) { return a1 * t + a2; };
                    break;
                }
                case ScenarioKind::s32b: {
                    const double b1 = 0.05 * unit(rng);
                    const double b2 = -0.05 + 0.1 * unit(rng);
                    warp = [alpha, b1, b2](double t) { return (1.0 + b2 - b1) * std::pow(t, alpha) + b1; };
                    break;
                }
                case ScenarioKind::s33a:
                    warp = [](double t) { return t; };
                    break;
            }

            std::vector<double> y(sc.n_points);
            for (std::size_t i = 0; i < sc.n_points; ++i) y[i] = shape(warp(out.t[i])) + sc.sigma * noise(rng);
            out.ids.push_back(id);
            out.values.push_back(std::move(y));
            out.labels.push_back(g);
            out.merged_labels.push_back(merged[static_cast<std::size_t>(g)]);
        }
    }
    return out;
}

ScenarioKind parse_scenario(const std::string& s) {
    if (s == "s31") return ScenarioKind::s31;
    if (s == "s32a") return ScenarioKind::s32a;
    if (s == "s32b") return ScenarioKind::s32b;
    if (s == "s33a") return ScenarioKind::s33a;
    if (s == "s33b") return ScenarioKind::s33b;
    throw Error(ErrorCode::configuration, "unknown scenario '" + s + "'");
}

std::string to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::s31: return "s31";
        case ScenarioKind::s32a: return "s32a";
        case ScenarioKind::s32b: return "s32b";
        case ScenarioKind::s33a: return "s33a";
        case ScenarioKind::s33b: return "s33b";
    }
    return "s31";
}

}  // namespace warpclust
