#include "lwgnn/grad_suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <tuple>
#include <utility>

#include "lwgnn/gcn.hpp"
#include "lwgnn/graph.hpp"
#include "lwgnn/labelwise.hpp"
#include "lwgnn/ops.hpp"
#include "lwgnn/pseudo_label.hpp"
#include "lwgnn/sparse.hpp"
#include "lwgnn/trainer.hpp"

namespace lwgnn {
namespace {

using Rng = std::mt19937_64;

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

DenseMatrix uniform(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng) {
    std::uniform_real_distribution<double> dist(lo, hi);
    DenseMatrix m(rows, cols);
    for (double& v : m.values()) v = dist(rng);
    return m;
}

// Entries in ±[0.1, 1], far from the ReLU kink relative to the finite-difference step.
DenseMatrix away_from_zero(std::size_t rows, std::size_t cols, Rng& rng) {
    DenseMatrix m = uniform(rows, cols, 0.1, 1.0, rng);
    std::bernoulli_distribution sign(0.5);
    for (double& v : m.values()) v = sign(rng) ? v : -v;
    return m;
}

double project(const DenseMatrix& out, const DenseMatrix& weights) {
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out.values()[i] * weights.values()[i];
    return s;
}

struct RandomGraph {
    Graph graph;
    Labels labels;
    NodeMask mask;
};

RandomGraph random_graph(Rng& rng, std::size_t num_classes) {
    const std::size_t n = pick(rng, 3, 7);
    const std::size_t d = pick(rng, 2, 5);
    std::bernoulli_distribution edge(0.45);
    std::vector<Graph::Edge> edges;
    for (std::uint32_t u = 0; u < n; ++u) {
        for (std::uint32_t v = u + 1; v < n; ++v) {
            if (edge(rng)) edges.emplace_back(u, v);
        }
    }
    Labels labels(n);
    for (auto& y : labels) y = static_cast<ClassId>(pick(rng, 0, num_classes - 1));
    NodeMask mask(n);
    std::bernoulli_distribution in_mask(0.7);
    for (std::size_t v = 0; v < n; ++v) mask[v] = in_mask(rng);
    mask[pick(rng, 0, n - 1)] = true;
    Graph g(n, num_classes, edges, uniform(n, d, -1.0, 1.0, rng), labels);
    return {std::move(g), std::move(labels), std::move(mask)};
}

ClassAdjacency ground_truth_adjacency(const RandomGraph& rg) {
    LabelAssignment a;
    a.labels = rg.labels;
    a.source.assign(rg.labels.size(), LabelSource::GroundTruth);
    return build_class_adjacency(rg.graph, a);
}

GradCheckReport check(ParameterStore& store, LossClosure loss, const GradSuiteOptions& options) {
    if (options.inject_fault) {
        loss = [inner = std::move(loss)](ParameterStore& s, bool accumulate) {
            const double value = inner(s, accumulate);
            if (accumulate) {
                auto& g = s.begin()->second.gradient;
                g.values()[0] = 2.0 * g.values()[0] + 1.0;
            }
            return value;
        };
    }
    return grad_check(store, loss, options.check);
}

using CaseFn = std::function<GradCheckReport(Rng&, const GradSuiteOptions&)>;

// Scalar loss sum(R ⊙ f(inputs)) for a two-input dense op with a hand-derived backward.
GradCheckReport binary_op_case(Rng& rng, const GradSuiteOptions& options, DenseMatrix a, DenseMatrix b,
                               std::function<DenseMatrix(const DenseMatrix&, const DenseMatrix&)> forward,
                               std::function<std::pair<DenseMatrix, DenseMatrix>(
                                   const DenseMatrix&, const DenseMatrix&, const DenseMatrix&)> backward) {
    const DenseMatrix probe = forward(a, b);
    const DenseMatrix r = uniform(probe.rows(), probe.cols(), -1.0, 1.0, rng);
    ParameterStore store;
    store.add("a", std::move(a));
    store.add("b", std::move(b));
    return check(store, [&](ParameterStore& s, bool acc) {
        const DenseMatrix& x = s.value("a");
        const DenseMatrix& y = s.value("b");
        const double loss = project(forward(x, y), r);
        if (acc) {
            auto [ga, gb] = backward(x, y, r);
            s.gradient("a") += ga;
            s.gradient("b") += gb;
        }
        return loss;
    }, options);
}

GradCheckReport unary_op_case(Rng& rng, const GradSuiteOptions& options, DenseMatrix x,
                              std::function<DenseMatrix(const DenseMatrix&)> forward,
                              std::function<DenseMatrix(const DenseMatrix&, const DenseMatrix&)> backward) {
    const DenseMatrix probe = forward(x);
    const DenseMatrix r = uniform(probe.rows(), probe.cols(), -1.0, 1.0, rng);
    ParameterStore store;
    store.add("x", std::move(x));
    return check(store, [&](ParameterStore& s, bool acc) {
        const DenseMatrix& in = s.value("x");
        const double loss = project(forward(in), r);
        if (acc) s.gradient("x") += backward(in, r);
        return loss;
    }, options);
}

GradCheckReport case_dense_matmul(Rng& rng, const GradSuiteOptions& o) {
    const std::size_t m = pick(rng, 1, 7), k = pick(rng, 1, 5), n = pick(rng, 1, 5);
    return binary_op_case(rng, o, uniform(m, k, -1, 1, rng), uniform(k, n, -1, 1, rng), dense_matmul,
                          [](const DenseMatrix& a, const DenseMatrix& b, const DenseMatrix& g) {
                              return std::pair{matmul_transpose_b(g, b), matmul_transpose_a(a, g)};
                          });
}

GradCheckReport case_matmul_transpose_a(Rng& rng, const GradSuiteOptions& o) {
    const std::size_t m = pick(rng, 1, 7), k = pick(rng, 1, 5), n = pick(rng, 1, 5);
    return binary_op_case(rng, o, uniform(k, m, -1, 1, rng), uniform(k, n, -1, 1, rng), matmul_transpose_a,
                          [](const DenseMatrix& a, const DenseMatrix& b, const DenseMatrix& g) {
                              return std::pair{matmul_transpose_b(b, g), dense_matmul(a, g)};
                          });
}

GradCheckReport case_matmul_transpose_b(Rng& rng, const GradSuiteOptions& o) {
    const std::size_t m = pick(rng, 1, 7), k = pick(rng, 1, 5), n = pick(rng, 1, 5);
    return binary_op_case(rng, o, uniform(m, k, -1, 1, rng), uniform(n, k, -1, 1, rng), matmul_transpose_b,
                          [](const DenseMatrix& a, const DenseMatrix& b, const DenseMatrix& g) {
                              return std::pair{dense_matmul(g, b), matmul_transpose_a(g, a)};
                          });
}

GradCheckReport case_hadamard(Rng& rng, const GradSuiteOptions& o) {
    const std::size_t m = pick(rng, 1, 7), n = pick(rng, 1, 5);
    return binary_op_case(rng, o, uniform(m, n, -1, 1, rng), uniform(m, n, -1, 1, rng), hadamard,
                          [](const DenseMatrix& a, const DenseMatrix& b, const DenseMatrix& g) {
                              return std::pair{hadamard(g, b), hadamard(g, a)};
                          });
}

GradCheckReport case_add_row_vector(Rng& rng, const GradSuiteOptions& o) {
    const std::size_t m = pick(rng, 1, 7), n = pick(rng, 1, 5);
    return binary_op_case(
        rng, o, uniform(m, n, -1, 1, rng), uniform(1, n, -1, 1, rng),
        [](const DenseMatrix& x, const DenseMatrix& b) {
            DenseMatrix out = x;
            add_row_vector(out, b);
            return out;
        },
        [](const DenseMatrix&, const DenseMatrix&, const DenseMatrix& g) { return std::pair{g, column_sums(g)}; });
}

GradCheckReport case_concat_columns(Rng& rng, const GradSuiteOptions& o) {
    const std::size_t m = pick(rng, 1, 7), n1 = pick(rng, 1, 3), n2 = pick(rng, 1, 3);
    return binary_op_case(
        rng, o, uniform(m, n1, -1, 1, rng), uniform(m, n2, -1, 1, rng),
        [](const DenseMatrix& a, const DenseMatrix& b) {
            const DenseMatrix blocks[] = {a, b};
            return concat_columns(blocks);
        },
        [](const DenseMatrix& a, const DenseMatrix& b, const DenseMatrix& g) {
            return std::pair{column_block(g, 0, a.cols()), column_block(g, a.cols(), b.cols())};
        });
}

GradCheckReport case_sparse_dense_matmul(Rng& rng, const GradSuiteOptions& o) {
    const std::size_t m = pick(rng, 1, 7), k = pick(rng, 1, 7), n = pick(rng, 1, 5);
    std::vector<std::tuple<SparseMatrix::Index, SparseMatrix::Index, double>> triplets;
    std::bernoulli_distribution present(0.4);
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < k; ++c) {
            if (present(rng)) {
                triplets.emplace_back(static_cast<SparseMatrix::Index>(r), static_cast<SparseMatrix::Index>(c), value(rng));
            }
        }
    }
    const SparseMatrix s = SparseMatrix::from_triplets(m, k, std::move(triplets));
    const SparseMatrix st = s.transposed();
    return unary_op_case(
        rng, o, uniform(k, n, -1, 1, rng), [&](const DenseMatrix& b) { return sparse_dense_matmul(s, b); },
        [&](const DenseMatrix&, const DenseMatrix& g) { return sparse_dense_matmul(st, g); });
}

GradCheckReport case_relu(Rng& rng, const GradSuiteOptions& o) {
    const std::size_t m = pick(rng, 1, 7), n = pick(rng, 1, 5);
    return unary_op_case(rng, o, away_from_zero(m, n, rng), relu, relu_backward);
}

GradCheckReport case_row_softmax(Rng& rng, const GradSuiteOptions& o) {
    const std::size_t m = pick(rng, 1, 7), n = pick(rng, 1, 5);
    return unary_op_case(rng, o, uniform(m, n, -2, 2, rng), row_softmax,
                         [](const DenseMatrix& x, const DenseMatrix& g) { return row_softmax_backward(row_softmax(x), g); });
}

GradCheckReport case_masked_cross_entropy(Rng& rng, const GradSuiteOptions& o) {
    const std::size_t m = pick(rng, 1, 7), n = pick(rng, 2, 5);
    Labels labels(m);
    for (auto& y : labels) y = static_cast<ClassId>(pick(rng, 0, n - 1));
    NodeMask mask(m);
    for (std::size_t v = 0; v < m; ++v) mask[v] = pick(rng, 0, 3) != 0;
    mask[pick(rng, 0, m - 1)] = true;
    ParameterStore store;
    store.add("probs", uniform(m, n, 0.05, 1.0, rng));
    return check(store, [&](ParameterStore& s, bool acc) {
        auto [loss, grad] = masked_cross_entropy(s.value("probs"), labels, mask);
        if (acc) s.gradient("probs") += grad;
        return loss;
    }, o);
}

GradCheckReport case_maxpool(Rng& rng, const GradSuiteOptions& o) {
    const std::size_t m = pick(rng, 1, 7), n = pick(rng, 1, 5), layers = pick(rng, 2, 3);
    // Distinct candidates per entry so no finite-difference step can flip a winner.
    std::vector<DenseMatrix> inputs(layers, DenseMatrix(m, n));
    std::uniform_real_distribution<double> jitter(-0.02, 0.02);
    for (std::size_t i = 0; i < m * n; ++i) {
        std::vector<double> levels(layers);
        for (std::size_t l = 0; l < layers; ++l) levels[l] = 0.1 * static_cast<double>(l) + jitter(rng);
        std::shuffle(levels.begin(), levels.end(), rng);
        for (std::size_t l = 0; l < layers; ++l) inputs[l].values()[i] = levels[l];
    }
    const DenseMatrix r = uniform(m, n, -1.0, 1.0, rng);
    ParameterStore store;
    for (std::size_t l = 0; l < layers; ++l) store.add("h" + std::to_string(l), inputs[l]);
    return check(store, [&, layers](ParameterStore& s, bool acc) {
        std::vector<DenseMatrix> in;
        for (std::size_t l = 0; l < layers; ++l) in.push_back(s.value("h" + std::to_string(l)));
        const MaxPoolResult pooled = maxpool_stack(in);
        const double loss = project(pooled.pooled, r);
        if (acc) {
            auto grads = maxpool_backward(pooled, r, layers);
            for (std::size_t l = 0; l < layers; ++l) s.gradient("h" + std::to_string(l)) += grads[l];
        }
        return loss;
    }, o);
}

GradCheckReport case_mlp(Rng& rng, const GradSuiteOptions& o) {
    const RandomGraph rg = random_graph(rng, pick(rng, 2, 3));
    MlpModel model = make_mlp(rg.graph.feature_dim(), 4, rg.graph.num_classes(), rng);
    return check(model.params, [&](ParameterStore& s, bool acc) {
        const MlpActivations acts = mlp_forward(rg.graph.features(), s);
        auto [loss, grad] = masked_cross_entropy(acts.probs, rg.labels, rg.mask);
        if (acc) mlp_backward(rg.graph.features(), s, acts, grad);
        return loss;
    }, o);
}

GradCheckReport case_labelwise_layer(Rng& rng, const GradSuiteOptions& o, EmptyClassFallback fallback) {
    const RandomGraph rg = random_graph(rng, pick(rng, 2, 3));
    const ClassAdjacency adj = ground_truth_adjacency(rg);
    const std::size_t p = pick(rng, 1, 4);
    const std::size_t n = rg.graph.num_nodes(), c = rg.graph.num_classes();
    const DenseMatrix r = uniform(n, (c + 1) * p, -1.0, 1.0, rng);
    ParameterStore store;
    store.add("h", rg.graph.features());
    store.add("w", uniform(p, rg.graph.feature_dim(), -1.0, 1.0, rng));
    return check(store, [&](ParameterStore& s, bool acc) {
        const LabelwiseLayerOutput out = labelwise_layer(s.value("h"), s.value("w"), adj, fallback);
        const double loss = project(out.out, r);
        if (acc) {
            auto g = labelwise_layer_backward(s.value("h"), s.value("w"), adj, out, r, fallback);
            s.gradient("h") += g.input;
            s.gradient("w") += g.weight;
        }
        return loss;
    }, o);
}

GradCheckReport case_lwgnn(Rng& rng, const GradSuiteOptions& o, std::size_t layers, EmptyClassFallback fallback,
                           double dropout) {
    const RandomGraph rg = random_graph(rng, pick(rng, 2, 3));
    const ClassAdjacency adj = ground_truth_adjacency(rg);
    LwGnnConfig cfg;
    cfg.input_dim = rg.graph.feature_dim();
    cfg.num_classes = rg.graph.num_classes();
    cfg.layers = layers;
    cfg.hidden = 4;
    cfg.fallback = fallback;
    cfg.dropout = dropout;
    cfg.weight_decay = 0.01;
    LwGnnModel model = make_lwgnn(cfg, rng);
    const std::uint64_t mask_seed = rng();
    return check(model.params, [&](ParameterStore&, bool acc) {
        Rng drop(mask_seed);  // the same masks on every evaluation
        const LwGnnForward fwd = lwgnn_forward(rg.graph.features(), model, adj, dropout > 0.0 ? &drop : nullptr);
        auto [loss, grad] = masked_cross_entropy(fwd.probs, rg.labels, rg.mask);
        if (acc) lwgnn_backward(rg.graph.features(), model, adj, fwd, grad);
        return loss + lwgnn_weight_decay(model, acc);
    }, o);
}

GradCheckReport case_gcn(Rng& rng, const GradSuiteOptions& o, std::size_t layers) {
    const RandomGraph rg = random_graph(rng, pick(rng, 2, 3));
    const SparseMatrix a_hat = normalized_adjacency(rg.graph);
    GcnConfig cfg;
    cfg.input_dim = rg.graph.feature_dim();
    cfg.num_classes = rg.graph.num_classes();
    cfg.layers = layers;
    cfg.hidden = 4;
    cfg.dropout = 0.3;
    cfg.weight_decay = 0.01;
    GcnModel model = make_gcn(cfg, rng);
    const std::uint64_t mask_seed = rng();
    return check(model.params, [&](ParameterStore&, bool acc) {
        Rng drop(mask_seed);
        const GcnForward fwd = gcn_forward(a_hat, rg.graph.features(), model, &drop);
        auto [loss, grad] = masked_cross_entropy(fwd.probs, rg.labels, rg.mask);
        if (acc) gcn_backward(a_hat, model, fwd, grad);
        return loss + gcn_weight_decay(model, acc);
    }, o);
}

GradCheckReport case_combined_loss(Rng& rng, const GradSuiteOptions& o) {
    const std::size_t m = pick(rng, 1, 7), n = pick(rng, 2, 5);
    Labels labels(m);
    for (auto& y : labels) y = static_cast<ClassId>(pick(rng, 0, n - 1));
    NodeMask mask(m, true);
    ParameterStore store;
    store.add("phi", uniform(1, 2, -2.0, 2.0, rng));
    store.add("yc", row_softmax(uniform(m, n, -2.0, 2.0, rng)));
    store.add("yg", row_softmax(uniform(m, n, -2.0, 2.0, rng)));
    return check(store, [&](ParameterStore& s, bool acc) {
        const SelectionWeights w{s.value("phi")(0, 0), s.value("phi")(0, 1)};
        const CombinedLoss out = combined_loss(s.value("yc"), s.value("yg"), w, labels, mask);
        if (acc) {
            s.gradient("phi")(0, 0) += out.grad_phi1;
            s.gradient("phi")(0, 1) += out.grad_phi2;
            s.gradient("yc") += out.grad_yc;
            s.gradient("yg") += out.grad_yg;
        }
        return out.loss;
    }, o);
}

const std::vector<std::pair<std::string, CaseFn>>& suite_cases() {
    using F = EmptyClassFallback;
    static const std::vector<std::pair<std::string, CaseFn>> cases = {
        {"dense_matmul", case_dense_matmul},
        {"matmul_transpose_a", case_matmul_transpose_a},
        {"matmul_transpose_b", case_matmul_transpose_b},
        {"hadamard", case_hadamard},
        {"add_row_vector", case_add_row_vector},
        {"concat_columns", case_concat_columns},
        {"sparse_dense_matmul", case_sparse_dense_matmul},
        {"relu", case_relu},
        {"row_softmax", case_row_softmax},
        {"masked_cross_entropy", case_masked_cross_entropy},
        {"maxpool_stack", case_maxpool},
        {"mlp", case_mlp},
        {"labelwise_layer", [](Rng& r, const GradSuiteOptions& o) { return case_labelwise_layer(r, o, F::Zero); }},
        {"labelwise_layer_class_average",
         [](Rng& r, const GradSuiteOptions& o) { return case_labelwise_layer(r, o, F::ClassAverage); }},
        {"lwgnn_k1", [](Rng& r, const GradSuiteOptions& o) { return case_lwgnn(r, o, 1, F::Zero, 0.0); }},
        {"lwgnn_k2", [](Rng& r, const GradSuiteOptions& o) { return case_lwgnn(r, o, 2, F::Zero, 0.0); }},
        {"lwgnn_k3", [](Rng& r, const GradSuiteOptions& o) { return case_lwgnn(r, o, 3, F::Zero, 0.0); }},
        {"lwgnn_k2_class_average", [](Rng& r, const GradSuiteOptions& o) { return case_lwgnn(r, o, 2, F::ClassAverage, 0.0); }},
        {"lwgnn_k2_dropout", [](Rng& r, const GradSuiteOptions& o) { return case_lwgnn(r, o, 2, F::Zero, 0.3); }},
        {"gcn_l2", [](Rng& r, const GradSuiteOptions& o) { return case_gcn(r, o, 2); }},
        {"gcn_l3", [](Rng& r, const GradSuiteOptions& o) { return case_gcn(r, o, 3); }},
        {"combined_loss", case_combined_loss},
    };
    return cases;
}

}  // namespace

bool GradSuiteReport::passed() const {
    return std::all_of(cases.begin(), cases.end(), [](const GradSuiteCase& c) { return c.passed(); });
}

std::vector<std::string> grad_suite_case_names() {
    std::vector<std::string> names;
    for (const auto& [name, fn] : suite_cases()) names.push_back(name);
    return names;
}

GradSuiteReport run_grad_suite(const GradSuiteOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    GradSuiteReport report;
    std::size_t case_index = 0;
    for (const auto& [name, fn] : suite_cases()) {
        GradSuiteCase result;
        result.name = name;
        for (std::size_t s = 0; s < options.seeds; ++s) {
            Rng rng((options.first_seed + s) * 1000003ULL + case_index);
            GradCheckOptions check = options.check;
            check.seed = options.first_seed + s;
            GradSuiteOptions per_seed = options;
            per_seed.check = check;
            const GradCheckReport r = fn(rng, per_seed);
            ++result.seeds_run;
            result.seeds_failed += r.passed ? 0 : 1;
            result.entries_checked += r.entries_checked;
            result.max_relative_error = std::max(result.max_relative_error, r.max_relative_error);
        }
        report.cases.push_back(std::move(result));
        ++case_index;
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace lwgnn
