#include "io.hpp"

#include "warpclust/error.hpp"
#include "warpclust/pipeline.hpp"
#include "warpclust/simulation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <set>

using namespace warpclust;
using nlohmann::json;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitDegenerate = 3;

struct CommonCurveOptions {
    std::string input;
    double lambda0 = 0.0;
    std::size_t grid = 500;
    unsigned threads = 1;
};

void add_common(CLI::App* cmd, CommonCurveOptions& o) {
    cmd->add_option("--input", o.input, "Curve CSV (id,t_1,...,t_n)")->required();
    cmd->add_option("--lambda0", o.lambda0, "Time-variation penalty weight")->check(CLI::NonNegativeNumber);
    cmd->add_option("--grid", o.grid, "Evaluation grid size")->check(CLI::Range(50, 100000));
    cmd->add_option("--threads", o.threads, "Worker threads for similarity matrices")->check(CLI::Range(1, 256));
}

std::vector<Curve> load(const io::CurveTable& table, const TimeGrid& grid, const ShapeSettings& shape = {}) {
    auto curves = presmooth(table.t, table.rows, table.indices(), grid, shape);
    for (auto& c : curves) {
        const int id = c.id;
        c = normalized(c, grid, shape);
        c.id = id;
    }
    return curves;
}

json warp_points(const SplineRep& psi) {
    json pts = json::array();
    for (int i = 0; i <= 100; ++i) {
        const double t = i / 100.0;
        pts.push_back(json::array({t, evaluate(psi, t)}));
    }
    return pts;
}

// Warps aligning each member of a group onto its most central member.
json group_warps(const Groups& groups, const SimilarityMatrix& sims, const WarpFamily& family,
                 const std::vector<std::string>& names) {
    json warps = json::object();
    json refs = json::object();
    for (const auto& g : groups) {
        int ref = g.front();
        double best = -1e300;
        for (int a : g) {
            double total = 0.0;
            for (int b : g) {
                if (a != b) total += sims.rho(a, b);
            }
            if (total > best) {
                best = total;
                ref = a;
            }
        }
        for (int m : g) {
            const SplineRep psi = m == ref ? family.identity().forward : sims.get(ref, m).warp.forward;
            warps[names[static_cast<std::size_t>(m)]] = warp_points(psi);
            refs[names[static_cast<std::size_t>(m)]] = names[static_cast<std::size_t>(ref)];
        }
    }
    return json{{"points", warps}, {"reference", refs}};
}

int cmd_cluster(const CommonCurveOptions& common, const std::string& index, const std::string& inter,
                const std::string& intra, double quantile_a, int max_iter, std::uint64_t seed,
                const std::string& output, bool with_warps) {
    RunConfig cfg;
    cfg.lambda0 = common.lambda0;
    cfg.grid_size = common.grid;
    cfg.threads = common.threads;
    cfg.quantile_a = quantile_a;
    cfg.max_iterations = max_iter;
    cfg.seed = seed;
    cfg.index = index == "dunn" ? ClusteringIndex::make_dunn(parse_dunn_inter(inter), parse_dunn_intra(intra))
                                : ClusteringIndex::make_silhouette();
    cfg.validate();

    const auto table = io::read_curves(common.input);
    const auto grid = TimeGrid::uniform(cfg.grid_size);
    Pipeline pipeline(presmooth(table.t, table.rows, table.indices(), grid, cfg.shape), cfg);
    const RunResult r = pipeline.run();

    json doc;
    doc["partition"] = io::names_of(r.partition.groups, table.names);
    doc["threshold"] = r.threshold;
    doc["index_name"] = r.index_name;
    doc["index_value"] = io::number(r.partition.index_value.value_or(-INFINITY));
    doc["iterations"] = r.iterations;
    doc["lambda0"] = cfg.lambda0;
    doc["seed"] = cfg.seed;
    doc["thresholds"] = r.thresholds;
    json candidates = json::array();
    json log = json::array();
    for (const auto& run : r.runs) {
        for (const auto& c : run.candidates) {
            candidates.push_back({{"threshold", c.threshold},
                                  {"iteration", c.iteration},
                                  {"fallback", c.fallback},
                                  {"nu0", io::number(c.partition.index_value.value_or(-INFINITY))},
                                  {"partition", io::names_of(c.partition.groups, table.names)}});
        }
        json its = json::array();
        for (const auto& e : run.log) {
            its.push_back({{"iteration", e.iteration},
                           {"curves", e.curves},
                           {"combinations", e.combinations},
                           {"mean_rho", e.mean_rho}});
        }
        log.push_back({{"threshold", run.threshold}, {"iterations", its}});
    }
    doc["candidates"] = candidates;
    doc["log"] = log;
    if (with_warps) {
        const SimilarityEngine engine(grid, cfg.lambda0, cfg.warp, cfg.optimizer);
        doc["warps"] = group_warps(r.partition.groups, pipeline.original_matrix(), engine.family(), table.names);
    }
    io::write_json(output, doc);
    return 0;
}

int cmd_simulate(const std::string& scenario, const std::vector<int>& sizes, std::optional<double> sigma,
                 std::size_t points, std::uint64_t seed, double eps_scale, const std::vector<double>& alphas,
                 const std::string& out, const std::string& labels, const std::string& merged) {
    Scenario sc;
    sc.kind = parse_scenario(scenario);
    const bool two_groups = sc.kind == ScenarioKind::s33b;
    if (two_groups) sc.sizes = {4, 4, 0};
    if (!sizes.empty()) {
        const std::size_t expected = two_groups ? 2 : 3;
        if (sizes.size() != expected) {
            throw Error(ErrorCode::invalid_input, "--sizes needs " + std::to_string(expected) + " values");
        }
        for (std::size_t i = 0; i < sizes.size(); ++i) sc.sizes[i] = sizes[i];
    }
    sc.sigma = sigma.value_or(default_sigma(sc.kind));
    sc.n_points = points;
    sc.seed = seed;
    sc.eps_scale = eps_scale;
    sc.alphas = alphas;
    const auto data = generate(sc);

    io::CurveTable table;
    table.t = data.t;
    table.rows = data.values;
    for (int id : data.ids) table.names.push_back(std::to_string(id));
    if (out == "-") {
        std::cout.precision(17);
        std::cout << "id";
        for (double v : table.t) std::cout << ',' << v;
        std::cout << '\n';
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            std::cout << table.names[r];
            for (double v : table.rows[r]) std::cout << ',' << v;
            std::cout << '\n';
        }
    } else {
        io::write_curves(out, table);
    }
    if (!labels.empty()) io::write_labels(labels, table.names, data.labels);
    if (!merged.empty()) io::write_labels(merged, table.names, data.merged_labels);
    return 0;
}

int cmd_evaluate(const std::string& pred, const std::string& truth) {
    const auto labels = io::read_labels(truth);
    std::map<std::string, int> index;
    std::map<std::string, int> label_index;
    Groups truth_groups;
    for (const auto& [name, label] : labels) {
        const int id = static_cast<int>(index.size());
        index[name] = id;
        auto [it, fresh] = label_index.emplace(label, static_cast<int>(truth_groups.size()));
        if (fresh) truth_groups.emplace_back();
        truth_groups[static_cast<std::size_t>(it->second)].push_back(id);
    }
    const json doc = io::read_json(pred);
    const json& arr = doc.is_object() && doc.contains("partition") ? doc.at("partition") : doc;
    if (!arr.is_array()) throw Error(ErrorCode::invalid_input, "prediction has no partition array");
    Groups pred_groups;
    std::set<std::string> seen;
    for (const auto& g : arr) {
        if (!g.is_array()) throw Error(ErrorCode::invalid_input, "partition groups must be arrays");
        std::vector<int> ids;
        for (const auto& v : g) {
            const std::string name = v.is_string() ? v.get<std::string>() : v.dump();
            auto it = index.find(name);
            if (it == index.end()) throw Error(ErrorCode::invalid_input, "id '" + name + "' has no truth label");
            if (!seen.insert(name).second) throw Error(ErrorCode::invalid_input, "id '" + name + "' repeated");
            ids.push_back(it->second);
        }
        pred_groups.push_back(std::move(ids));
    }
    if (seen.size() != index.size()) throw Error(ErrorCode::invalid_input, "prediction does not cover every labelled id");
    std::printf("%.6f\n", adjusted_rand(pred_groups, truth_groups));
    return 0;
}

int cmd_align(const CommonCurveOptions& common, const std::vector<std::string>& pair, const std::string& out) {
    if (pair.size() != 2) throw Error(ErrorCode::invalid_input, "--pair takes two ids");
    const auto table = io::read_curves(common.input);
    const auto grid = TimeGrid::uniform(common.grid);
    io::CurveTable two;
    two.t = table.t;
    for (const auto& name : pair) {
        two.names.push_back(name);
        two.rows.push_back(table.rows[static_cast<std::size_t>(table.index_of(name))]);
    }
    const auto curves = load(two, grid);
    const SimilarityEngine engine(grid, common.lambda0);
    const auto e = engine.optimize_warping(curves[0], curves[1]);
    json doc{{"pair", pair},
             {"lambda0", common.lambda0},
             {"rho", e.rho},
             {"r_forward", e.r_fwd},
             {"r_inverse", e.r_inv},
             {"penalty_forward", e.penalty_fwd},
             {"penalty_inverse", e.penalty_inv},
             {"warp", warp_points(e.warp.forward)},
             {"inverse_warp", warp_points(e.warp.inverse)}};
    io::write_json(out, doc);
    return 0;
}

int cmd_indexes(const CommonCurveOptions& common, const std::string& partition, const std::string& out) {
    const auto table = io::read_curves(common.input);
    const Groups groups = io::read_partition(io::read_json(partition), table);
    const auto grid = TimeGrid::uniform(common.grid);
    const auto curves = load(table, grid);
    const SimilarityEngine engine(grid, common.lambda0);
    const auto dist = DistanceMatrix::from_similarities(similarity_matrix(curves, engine, common.threads));
    json doc;
    doc["groups"] = groups.size();
    doc["silhouette"] = io::number(ClusteringIndex::make_silhouette()(groups, dist));
    json dunn_values = json::object();
    for (auto inter : {DunnInter::I1, DunnInter::I2, DunnInter::I3}) {
        for (auto intra : {DunnIntra::J1, DunnIntra::J2}) {
            const auto idx = ClusteringIndex::make_dunn(inter, intra);
            dunn_values[to_string(inter) + "," + to_string(intra)] = io::number(idx(groups, dist));
        }
    }
    doc["dunn"] = dunn_values;
    io::write_json(out, doc);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clustering of misaligned curves with penalized warping similarity"};
    app.require_subcommand(1);

    CommonCurveOptions cluster_opts;
    std::string index = "silhouette", inter = "I1", intra = "J1", output = "-";
    double quantile_a = 0.25;
    int max_iter = 10;
    std::uint64_t seed = 0;
    bool with_warps = false;
    auto* cluster = app.add_subcommand("cluster", "Run the full clustering pipeline");
    add_common(cluster, cluster_opts);
    cluster->add_option("--index", index, "Clustering index")->check(CLI::IsMember({"silhouette", "dunn"}));
    cluster->add_option("--dunn-inter", inter, "Dunn between-cluster distance")->check(CLI::IsMember({"I1", "I2", "I3"}));
    cluster->add_option("--dunn-intra", intra, "Dunn within-cluster diameter")->check(CLI::IsMember({"J1", "J2"}));
    cluster->add_option("--quantile-a", quantile_a, "Thresholds sit near the 100(1-a)% similarity quantile");
    cluster->add_option("--max-iter", max_iter, "Iteration limit per threshold");
    cluster->add_option("--seed", seed, "Recorded in the output");
    cluster->add_option("--output", output, "Result JSON path, '-' for standard output");
    cluster->add_flag("--warps", with_warps, "Include per-curve warps onto each group's central curve");

    std::string scenario = "s31", sim_out = "-", labels, merged;
    std::vector<int> sizes;
    std::optional<double> sigma;
    std::size_t points = 100;
    std::uint64_t sim_seed = 1;
    double eps_scale = 0.1;
    std::vector<double> alphas;
    auto* simulate = app.add_subcommand("simulate", "Generate a simulation scenario");
    simulate->add_option("--scenario", scenario)->check(CLI::IsMember({"s31", "s32a", "s32b", "s33a", "s33b"}));
    simulate->add_option("--sizes", sizes, "Group sizes, e.g. 10,10,20")->delimiter(',');
    simulate->add_option("--sigma", sigma, "Noise standard deviation");
    simulate->add_option("--points", points, "Time points per curve")->check(CLI::Range(4, 1000000));
    simulate->add_option("--seed", sim_seed);
    simulate->add_option("--eps-scale", eps_scale, "Scale of the random coefficients of f4..f6");
    simulate->add_option("--alphas", alphas, "Power-warp exponents, reused cyclically")->delimiter(',');
    simulate->add_option("--out", sim_out, "Curve CSV path, '-' for standard output");
    simulate->add_option("--labels", labels, "Write the generating groups as id,label");
    simulate->add_option("--merged-labels", merged, "Write the warp-merged groups as id,label");

    std::string pred, truth;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Adjusted Rand index of a result against labels");
    evaluate_cmd->add_option("--pred", pred, "Result JSON")->required();
    evaluate_cmd->add_option("--truth", truth, "Labels CSV")->required();

    CommonCurveOptions align_opts;
    std::vector<std::string> pair;
    std::string align_out = "-";
    auto* align = app.add_subcommand("align", "Optimal warp and similarity of two curves");
    add_common(align, align_opts);
    align->add_option("--pair", pair, "Two ids separated by a comma")->delimiter(',')->required();
    align->add_option("--out", align_out, "JSON path, '-' for standard output");

    CommonCurveOptions index_opts;
    std::string partition, index_out = "-";
    auto* indexes = app.add_subcommand("indexes", "Silhouette and Dunn values of a partition");
    add_common(indexes, index_opts);
    indexes->add_option("--partition", partition, "JSON array of arrays of ids, or a result JSON")->required();
    indexes->add_option("--out", index_out, "JSON path, '-' for standard output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalid;
    }

    try {
        if (*cluster) {
            return cmd_cluster(cluster_opts, index, inter, intra, quantile_a, max_iter, seed, output, with_warps);
        }
        if (*simulate) {
            return cmd_simulate(scenario, sizes, sigma, points, sim_seed, eps_scale, alphas, sim_out, labels, merged);
        }
        if (*evaluate_cmd) return cmd_evaluate(pred, truth);
        if (*align) return cmd_align(align_opts, pair, align_out);
        if (*indexes) return cmd_indexes(index_opts, partition, index_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.is_degenerate_data() ? kExitDegenerate : kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
