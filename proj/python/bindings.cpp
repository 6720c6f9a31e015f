#include "warpclust/error.hpp"
#include "warpclust/indices.hpp"
#include "warpclust/pipeline.hpp"
#include "warpclust/simulation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

namespace py = pybind11;
using namespace warpclust;

namespace {

std::vector<int> default_ids(std::size_t n, const std::optional<std::vector<int>>& ids) {
    if (ids) return *ids;
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<int>(i);
    return out;
}

std::vector<std::vector<double>> rows_of(const Eigen::Ref<const Eigen::MatrixXd>& values) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(values.rows()));
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        rows[static_cast<std::size_t>(r)].resize(static_cast<std::size_t>(values.cols()));
        for (Eigen::Index c = 0; c < values.cols(); ++c) rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = values(r, c);
    }
    return rows;
}

ClusteringIndex make_index(const std::string& index, const std::string& inter, const std::string& intra) {
    if (index == "silhouette") return ClusteringIndex::make_silhouette();
    if (index == "dunn") return ClusteringIndex::make_dunn(parse_dunn_inter(inter), parse_dunn_intra(intra));
    throw Error(ErrorCode::configuration, "index must be 'silhouette' or 'dunn'");
}

py::object maybe(double v) { return std::isfinite(v) ? py::object(py::float_(v)) : py::object(py::none()); }

py::list warp_samples(const SplineRep& psi) {
    py::list pts;
    for (int i = 0; i <= 100; ++i) {
        const double t = i / 100.0;
        pts.append(py::make_tuple(t, evaluate(psi, t)));
    }
    return pts;
}

DistanceMatrix distances_of(const Eigen::Ref<const Eigen::MatrixXd>& d) {
    if (d.rows() != d.cols()) throw Error(ErrorCode::invalid_input, "distance matrix must be square");
    return DistanceMatrix(default_ids(static_cast<std::size_t>(d.rows()), std::nullopt), d);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Clustering of misaligned curves with penalized warping similarity";

    static py::handle error_type = py::exception<Error>(m, "WarpclustError", PyExc_ValueError).release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = error_type(e.what());
            exc.attr("code") = to_string(e.code());
            exc.attr("degenerate") = e.is_degenerate_data();
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        }
    });

    m.def(
        "cluster",
        [](const std::vector<double>& t, const Eigen::Ref<const Eigen::MatrixXd>& values,
           const std::optional<std::vector<int>>& ids, double lambda0, const std::string& index,
           const std::string& dunn_inter, const std::string& dunn_intra, double quantile_a, std::size_t grid_size,
           int max_iterations, unsigned threads) {
            RunConfig cfg;
            cfg.lambda0 = lambda0;
            cfg.index = make_index(index, dunn_inter, dunn_intra);
            cfg.quantile_a = quantile_a;
            cfg.grid_size = grid_size;
            cfg.max_iterations = max_iterations;
            cfg.threads = threads;
            const auto rows = rows_of(values);
            const auto id_list = default_ids(rows.size(), ids);
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run(t, rows, id_list, cfg);
            }
            py::list candidates;
            for (const auto& run : r.runs) {
                for (const auto& c : run.candidates) {
                    py::dict d;
                    d["threshold"] = c.threshold;
                    d["iteration"] = c.iteration;
                    d["fallback"] = c.fallback;
                    d["nu0"] = maybe(c.partition.index_value.value_or(-INFINITY));
                    d["partition"] = c.partition.groups;
                    candidates.append(d);
                }
            }
            py::dict out;
            out["partition"] = r.partition.groups;
            out["threshold"] = r.threshold;
            out["thresholds"] = r.thresholds;
            out["index_name"] = r.index_name;
            out["index_value"] = maybe(r.partition.index_value.value_or(-INFINITY));
            out["iterations"] = r.iterations;
            out["candidates"] = candidates;
            return out;
        },
        py::arg("t"), py::arg("values"), py::arg("ids") = py::none(), py::arg("lambda0") = 0.0,
        py::arg("index") = "silhouette", py::arg("dunn_inter") = "I1", py::arg("dunn_intra") = "J1",
        py::arg("quantile_a") = 0.25, py::arg("grid_size") = 500, py::arg("max_iterations") = 10,
        py::arg("threads") = 1,
        "Cluster the rows of `values` observed at times `t`; returns the chosen partition and all candidates.");

    m.def(
        "align",
        [](const std::vector<double>& t, const std::vector<double>& f, const std::vector<double>& g, double lambda0,
           std::size_t grid_size) {
            const auto grid = TimeGrid::uniform(grid_size);
            const std::vector<int> ids{0, 1};
            auto curves = presmooth(t, {f, g}, ids, grid);
            for (auto& c : curves) c = normalized(c, grid);
            const SimilarityEngine engine(grid, lambda0);
            SimilarityEntry e;
            {
                py::gil_scoped_release release;
                e = engine.optimize_warping(curves[0], curves[1]);
            }
            py::dict out;
            out["rho"] = e.rho;
            out["r_forward"] = e.r_fwd;
            out["r_inverse"] = e.r_inv;
            out["penalty_forward"] = e.penalty_fwd;
            out["penalty_inverse"] = e.penalty_inv;
            out["warp"] = warp_samples(e.warp.forward);
            out["inverse_warp"] = warp_samples(e.warp.inverse);
            return out;
        },
        py::arg("t"), py::arg("f"), py::arg("g"), py::arg("lambda0") = 0.0, py::arg("grid_size") = 500,
        "Penalized similarity of two curves and the warp psi with g(psi(t)) close to f(t).");

    m.def(
        "similarity_matrix",
        [](const std::vector<double>& t, const Eigen::Ref<const Eigen::MatrixXd>& values, double lambda0,
           std::size_t grid_size, unsigned threads) {
            const auto grid = TimeGrid::uniform(grid_size);
            const auto rows = rows_of(values);
            auto curves = presmooth(t, rows, default_ids(rows.size(), std::nullopt), grid);
            for (auto& c : curves) c = normalized(c, grid);
            const SimilarityEngine engine(grid, lambda0);
            SimilarityMatrix sims;
            {
                py::gil_scoped_release release;
                sims = similarity_matrix(curves, engine, threads);
            }
            const auto n = static_cast<Eigen::Index>(rows.size());
            Eigen::MatrixXd out = Eigen::MatrixXd::Ones(n, n);
            for (Eigen::Index a = 0; a < n; ++a) {
                for (Eigen::Index b = a + 1; b < n; ++b) {
                    out(a, b) = out(b, a) = sims.rho(static_cast<int>(a), static_cast<int>(b));
                }
            }
            return out;
        },
        py::arg("t"), py::arg("values"), py::arg("lambda0") = 0.0, py::arg("grid_size") = 500, py::arg("threads") = 1,
        "Pairwise penalized similarities of the rows of `values`, with ones on the diagonal.");

    m.def(
        "simulate",
        [](const std::string& scenario, const std::optional<std::vector<int>>& sizes, std::optional<double> sigma,
           std::size_t points, std::uint64_t seed, const std::vector<double>& alphas, double eps_scale) {
            Scenario sc;
            sc.kind = parse_scenario(scenario);
            if (sc.kind == ScenarioKind::s33b) sc.sizes = {4, 4, 0};
            if (sizes) {
                for (std::size_t i = 0; i < sizes->size() && i < 3; ++i) sc.sizes[i] = (*sizes)[i];
            }
            sc.sigma = sigma.value_or(default_sigma(sc.kind));
            sc.n_points = points;
            sc.seed = seed;
            sc.alphas = alphas;
            sc.eps_scale = eps_scale;
            const auto d = generate(sc);
            Eigen::MatrixXd values(static_cast<Eigen::Index>(d.values.size()), static_cast<Eigen::Index>(d.t.size()));
            for (std::size_t r = 0; r < d.values.size(); ++r) {
                for (std::size_t c = 0; c < d.t.size(); ++c) {
                    values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = d.values[r][c];
                }
            }
            py::dict out;
            out["t"] = d.t;
            out["values"] = values;
            out["labels"] = d.labels;
            out["merged_labels"] = d.merged_labels;
            return out;
        },
        py::arg("scenario") = "s31", py::arg("sizes") = py::none(), py::arg("sigma") = py::none(),
        py::arg("points") = 100, py::arg("seed") = 1, py::arg("alphas") = std::vector<double>{},
        py::arg("eps_scale") = 0.1, "Generate a simulation scenario with its ground-truth labels.");

    m.def(
        "threshold_set", [](const std::vector<double>& sims, double a) { return threshold_set(sims, a); },
        py::arg("sims"), py::arg("a") = 0.25, "The four combination thresholds just below the 100(1-a)% quantile.");
    m.def(
        "adjusted_rand", [](const Groups& p, const Groups& q) { return adjusted_rand(p, q); }, py::arg("p"),
        py::arg("q"), "Adjusted Rand index of two partitions given as lists of id lists.");
    m.def(
        "silhouette",
        [](const Groups& groups, const Eigen::Ref<const Eigen::MatrixXd>& d) { return silhouette(groups, distances_of(d)); },
        py::arg("groups"), py::arg("distances"), "Mean silhouette width; ids index the distance matrix.");
    m.def(
        "dunn",
        [](const Groups& groups, const Eigen::Ref<const Eigen::MatrixXd>& d, const std::string& inter,
           const std::string& intra) {
            return dunn(groups, distances_of(d), parse_dunn_inter(inter), parse_dunn_intra(intra));
        },
        py::arg("groups"), py::arg("distances"), py::arg("inter") = "I1", py::arg("intra") = "J1",
        "Generalized Dunn index with the chosen between/within variants.");
}
