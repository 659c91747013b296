#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <string>
#include <vector>

#include "lwgnn/error.hpp"
#include "lwgnn/grad_suite.hpp"
#include "lwgnn/graph.hpp"
#include "lwgnn/graph_io.hpp"
#include "lwgnn/report.hpp"
#include "lwgnn/runtime.hpp"
#include "lwgnn/synthetic.hpp"
#include "lwgnn/trainer.hpp"

namespace py = pybind11;
using namespace lwgnn;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const DenseMatrix& m) {
    Array out({m.rows(), m.cols()});
    if (m.size() != 0) std::memcpy(out.mutable_data(), m.data(), m.size() * sizeof(double));
    return out;
}

DenseMatrix from_numpy(const Array& a) {
    if (a.ndim() != 2) throw ShapeError("expected a 2-d array");
    const auto rows = static_cast<std::size_t>(a.shape(0));
    const auto cols = static_cast<std::size_t>(a.shape(1));
    return DenseMatrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

std::vector<std::uint32_t> mask_ids(const NodeMask& mask) {
    std::vector<std::uint32_t> ids;
    for (std::size_t v = 0; v < mask.size(); ++v)
        if (mask[v]) ids.push_back(static_cast<std::uint32_t>(v));
    return ids;
}

// Training settings arrive as a JSON string so the Python side can pass a plain dict.
TrainConfig config_from_string(const std::string& text) {
    return text.empty() ? TrainConfig{} : config_from_json(nlohmann::json::parse(text));
}

}  // namespace

PYBIND11_MODULE(_lwgnn, m) {
    configure_allocator();
    m.doc() = "Label-wise message passing GNN with learned model selection";

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<Graph>(m, "Graph")
        .def_property_readonly("num_nodes", &Graph::num_nodes)
        .def_property_readonly("num_classes", &Graph::num_classes)
        .def_property_readonly("num_edges", &Graph::num_edges)
        .def_property_readonly("feature_dim", &Graph::feature_dim)
        .def_property_readonly("features", [](const Graph& g) { return to_numpy(g.features()); })
        .def_property_readonly("labels", &Graph::labels)
        .def_property_readonly("edges", &Graph::edge_list)
        .def_property_readonly("train_nodes", [](const Graph& g) { return mask_ids(g.train_mask()); })
        .def_property_readonly("val_nodes", [](const Graph& g) { return mask_ids(g.val_mask()); })
        .def_property_readonly("test_nodes", [](const Graph& g) { return mask_ids(g.test_mask()); })
        .def("to_json", &graph_to_json)
        .def("__repr__", [](const Graph& g) {
            return "<lwgnn.Graph nodes=" + std::to_string(g.num_nodes()) + " edges=" + std::to_string(g.num_edges()) +
                   " classes=" + std::to_string(g.num_classes()) + ">";
        });

    m.def("load_graph", [](const std::string& path) { return load_graph(path); }, py::arg("path"));
    m.def("parse_graph_json", &parse_graph_json, py::arg("text"));
    m.def("save_graph", [](const Graph& g, const std::string& path) { save_graph(g, path); }, py::arg("graph"),
          py::arg("path"));

    m.def(
        "generate_synthetic",
        [](double h, std::size_t n, std::size_t c, double avg_degree, std::size_t feature_dim, double separation,
           double noise, std::uint64_t seed) {
            SyntheticSpec s;
            s.target_homophily = h;
            s.num_nodes = n;
            s.num_classes = c;
            s.avg_degree = avg_degree;
            s.feature_dim = feature_dim;
            s.class_center_separation = separation;
            s.noise_scale = noise;
            s.seed = seed;
            return generate_synthetic(s);
        },
        py::arg("target_homophily"), py::arg("num_nodes") = 1000, py::arg("num_classes") = 5,
        py::arg("avg_degree") = 5.0, py::arg("feature_dim") = 16, py::arg("separation") = 1.0,
        py::arg("noise") = 1.0, py::arg("seed") = 0);
    m.def(
        "benchmark_graph",
        [](double h, std::size_t n, std::size_t c, std::uint64_t seed) {
            return benchmark_graph(benchmark_spec(h, n, c, seed));
        },
        py::arg("target_homophily"), py::arg("num_nodes") = 1000, py::arg("num_classes") = 5, py::arg("seed") = 0);

    m.def("homophily_ratio", [](const Graph& g) { return homophily_ratio(g, g.labels()); }, py::arg("graph"));
    m.def("normalized_adjacency", [](const Graph& g) { return to_numpy(normalized_adjacency(g).to_dense()); },
          py::arg("graph"));
    m.def(
        "combine_predictions",
        [](const Array& yc, const Array& yg, double phi1, double phi2) {
            return to_numpy(combine_predictions(from_numpy(yc), from_numpy(yg), {phi1, phi2}));
        },
        py::arg("yc"), py::arg("yg"), py::arg("phi1") = 0.0, py::arg("phi2") = 0.0);

    m.def("_default_config", [] { return config_to_json(TrainConfig{}).dump(); });
    m.def(
        "_train",
        [](const Graph& g, const std::string& config) {
            TrainConfig cfg = config_from_string(config);
            cfg.validate();
            TrainResult r;
            {
                py::gil_scoped_release release;
                r = train(g, cfg);
            }
            return report_to_json(r.report).dump();
        },
        py::arg("graph"), py::arg("config") = "");

    m.def(
        "gradcheck",
        [](std::size_t seeds, double tolerance, bool inject_fault) {
            GradSuiteOptions o;
            o.seeds = seeds;
            o.check.tolerance = tolerance;
            o.inject_fault = inject_fault;
            const GradSuiteReport report = run_grad_suite(o);
            py::list cases;
            for (const auto& c : report.cases) {
                py::dict d;
                d["name"] = c.name;
                d["passed"] = c.passed();
                d["seeds_run"] = c.seeds_run;
                d["seeds_failed"] = c.seeds_failed;
                d["max_relative_error"] = c.max_relative_error;
                cases.append(d);
            }
            return cases;
        },
        py::arg("seeds") = 20, py::arg("tolerance") = 1e-4, py::arg("inject_fault") = false);
}
