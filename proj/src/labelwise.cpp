#include "lwgnn/labelwise.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lwgnn/error.hpp"

namespace lwgnn {
namespace {

// Rows of Z averaged per assigned class; zero for classes nobody is assigned to.
DenseMatrix class_means(const DenseMatrix& z, const ClassAdjacency& adj) {
    DenseMatrix means(adj.num_classes, z.cols());
    std::vector<std::size_t> counts(adj.num_classes, 0);
    for (std::size_t u = 0; u < z.rows(); ++u) {
        const auto cls = static_cast<std::size_t>(adj.assignment[u]);
        ++counts[cls];
        auto dst = means.row(cls);
        auto src = z.row(u);
        for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
    }
    for (std::size_t cls = 0; cls < adj.num_classes; ++cls) {
        if (counts[cls] == 0) continue;
        for (double& v : means.row(cls)) v /= static_cast<double>(counts[cls]);
    }
    return means;
}

// dst[:, dst_col:dst_col+width] += s · src[:, src_col:src_col+width]
void accumulate_block(const SparseMatrix& s, const DenseMatrix& src, std::size_t src_col, DenseMatrix& dst,
                      std::size_t dst_col, std::size_t width) {
    const auto& offsets = s.row_offsets();
    const auto& cols = s.col_indices();
    const auto& vals = s.values();
    for (std::size_t r = 0; r < s.rows(); ++r) {
        double* out = dst.row(r).data() + dst_col;
        for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k) {
            const double w = vals[k];
            const double* in = src.row(cols[k]).data() + src_col;
            for (std::size_t j = 0; j < width; ++j) out[j] += w * in[j];
        }
    }
}

}  // namespace

ClassAdjacency build_class_adjacency(const Graph& graph, const LabelAssignment& assignment) {
    const std::size_t n = graph.num_nodes();
    const std::size_t c = graph.num_classes();
    if (assignment.labels.size() != n) throw PreconditionError("build_class_adjacency: assignment must cover all nodes");
    for (ClassId y : assignment.labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= c) throw PreconditionError("build_class_adjacency: class out of range");
    }

    ClassAdjacency adj;
    adj.num_nodes = n;
    adj.num_classes = c;
    adj.assignment = assignment.labels;
    adj.class_degree.assign(n * c, 0);
    for (std::size_t v = 0; v < n; ++v)
        for (std::uint32_t u : graph.neighbors(v)) ++adj.class_degree[v * c + static_cast<std::size_t>(adj.assignment[u])];

    std::vector<std::vector<std::size_t>> offsets(c, std::vector<std::size_t>(n + 1, 0));
    std::vector<std::vector<SparseMatrix::Index>> cols(c);
    std::vector<std::vector<double>> vals(c);
    for (std::size_t v = 0; v < n; ++v) {
        for (std::uint32_t u : graph.neighbors(v)) {
            const auto cls = static_cast<std::size_t>(adj.assignment[u]);
            const double dv = std::max<double>(adj.degree(v, cls), 1.0);
            const double du = std::max<double>(adj.degree(u, cls), 1.0);
            cols[cls].push_back(u);
            vals[cls].push_back(1.0 / std::sqrt(dv * du));
        }
        for (std::size_t cls = 0; cls < c; ++cls) offsets[cls][v + 1] = cols[cls].size();
    }
    adj.operators.reserve(c);
    adj.transposed.reserve(c);
    for (std::size_t cls = 0; cls < c; ++cls) {
        adj.operators.emplace_back(n, n, std::move(offsets[cls]), std::move(cols[cls]), std::move(vals[cls]));
        adj.transposed.push_back(adj.operators.back().transposed());
    }
    return adj;
}

DenseMatrix LabelwiseLayerOutput::class_block(std::size_t cls) const {
    return column_block(pre, (cls + 1) * z.cols(), z.cols());
}

LabelwiseLayerOutput labelwise_layer(const DenseMatrix& h_in, const DenseMatrix& weight, const ClassAdjacency& adj,
                                     EmptyClassFallback fallback) {
    if (h_in.rows() != adj.num_nodes) throw ShapeError("labelwise_layer: input rows must equal node count");
    if (weight.cols() != h_in.cols()) {
        throw ShapeError("labelwise_layer: weight is " + std::to_string(weight.rows()) + "x" +
                         std::to_string(weight.cols()) + " for input width " + std::to_string(h_in.cols()));
    }
    LabelwiseLayerOutput out;
    out.z = matmul_transpose_b(h_in, weight);
    const std::size_t c = adj.num_classes;
    const std::size_t p = out.z.cols();

    out.pre = DenseMatrix(adj.num_nodes, (c + 1) * p);
    for (std::size_t v = 0; v < adj.num_nodes; ++v) {
        auto src = out.z.row(v);
        std::copy(src.begin(), src.end(), out.pre.row(v).begin());
    }
    for (std::size_t cls = 0; cls < c; ++cls) accumulate_block(adj.operators[cls], out.z, 0, out.pre, (cls + 1) * p, p);

    if (fallback == EmptyClassFallback::ClassAverage) {
        const DenseMatrix means = class_means(out.z, adj);
        for (std::size_t cls = 0; cls < c; ++cls) {
            auto mean = means.row(cls);
            for (std::size_t v = 0; v < adj.num_nodes; ++v) {
                if (adj.degree(v, cls) != 0) continue;
                std::copy(mean.begin(), mean.end(), out.pre.row(v).begin() + static_cast<std::ptrdiff_t>((cls + 1) * p));
            }
        }
    }
    out.out = relu(out.pre);
    return out;
}

LabelwiseLayerGradients labelwise_layer_backward(const DenseMatrix& h_in, const DenseMatrix& weight,
                                                 const ClassAdjacency& adj, const LabelwiseLayerOutput& forward,
                                                 const DenseMatrix& grad_out, EmptyClassFallback fallback) {
    const DenseMatrix grad_pre = relu_backward(forward.pre, grad_out);
    const std::size_t p = forward.z.cols();
    const std::size_t c = adj.num_classes;

    DenseMatrix grad_z = column_block(grad_pre, 0, p);
    for (std::size_t cls = 0; cls < c; ++cls) {
        accumulate_block(adj.transposed[cls], grad_pre, (cls + 1) * p, grad_z, 0, p);
        if (fallback != EmptyClassFallback::ClassAverage) continue;

        std::vector<double> grad_mean(p, 0.0);
        for (std::size_t v = 0; v < adj.num_nodes; ++v) {
            if (adj.degree(v, cls) != 0) continue;
            const double* src = grad_pre.row(v).data() + (cls + 1) * p;
            for (std::size_t j = 0; j < p; ++j) grad_mean[j] += src[j];
        }
        std::size_t members = 0;
        for (ClassId y : adj.assignment) members += static_cast<std::size_t>(y) == cls ? 1 : 0;
        if (members == 0) continue;
        const double share = 1.0 / static_cast<double>(members);
        for (std::size_t u = 0; u < adj.num_nodes; ++u) {
            if (static_cast<std::size_t>(adj.assignment[u]) != cls) continue;
            auto dst = grad_z.row(u);
            for (std::size_t j = 0; j < p; ++j) dst[j] += share * grad_mean[j];
        }
    }
    return {matmul_transpose_a(grad_z, h_in), dense_matmul(grad_z, weight)};
}

std::string LwGnnModel::layer_name(std::size_t k) { return "lw.W" + std::to_string(k); }

LwGnnModel make_lwgnn(const LwGnnConfig& config, std::mt19937_64& rng) {
    if (config.layers == 0) throw PreconditionError("make_lwgnn: need at least one layer");
    if (config.num_classes == 0 || config.hidden == 0) throw PreconditionError("make_lwgnn: empty dimensions");
    LwGnnModel model{config, {}};
    const std::size_t wide = (config.num_classes + 1) * config.hidden;
    for (std::size_t k = 1; k <= config.layers; ++k) {
        const std::size_t width = k == 1 ? config.input_dim : wide;
        model.params.add(LwGnnModel::layer_name(k), glorot_uniform(config.hidden, width, rng));
    }
    model.params.add("lw.head.W", glorot_uniform(config.num_classes, wide, rng));
    if (config.head_bias) model.params.add("lw.head.b", DenseMatrix(1, config.num_classes));
    return model;
}

LwGnnForward lwgnn_forward(const DenseMatrix& features, const LwGnnModel& model, const ClassAdjacency& adj,
                           std::mt19937_64* rng) {
    const auto& cfg = model.config;
    const bool train = rng != nullptr && cfg.dropout > 0.0;
    LwGnnForward fwd;
    fwd.layers.reserve(cfg.layers);
    for (std::size_t k = 1; k <= cfg.layers; ++k) {
        const DenseMatrix& input = k == 1 ? features : fwd.layers.back().out;
        const DenseMatrix& weight = model.params.value(LwGnnModel::layer_name(k));
        if (train) {
            fwd.masks.push_back(dropout_mask(input.rows(), input.cols(), cfg.dropout, *rng));
            fwd.dropped_inputs.push_back(hadamard(input, fwd.masks.back()));
            fwd.layers.push_back(labelwise_layer(fwd.dropped_inputs.back(), weight, adj, cfg.fallback));
        } else {
            fwd.layers.push_back(labelwise_layer(input, weight, adj, cfg.fallback));
        }
    }
    std::vector<DenseMatrix> reps;
    reps.reserve(fwd.layers.size());
    for (const auto& layer : fwd.layers) reps.push_back(layer.out);
    fwd.pooled = maxpool_stack(reps);
    if (train) {
        fwd.masks.push_back(dropout_mask(fwd.pooled.pooled.rows(), fwd.pooled.pooled.cols(), cfg.dropout, *rng));
        fwd.dropped_inputs.push_back(hadamard(fwd.pooled.pooled, fwd.masks.back()));
    }
    const DenseMatrix& head_input = train ? fwd.dropped_inputs.back() : fwd.pooled.pooled;
    fwd.logits = matmul_transpose_b(head_input, model.params.value("lw.head.W"));
    if (cfg.head_bias) add_row_vector(fwd.logits, model.params.value("lw.head.b"));
    fwd.probs = row_softmax(fwd.logits);
    return fwd;
}

LwGnnForward lwgnn_forward(const Graph& graph, const LwGnnModel& model, const ClassAdjacency& adj,
                           std::mt19937_64* rng) {
    return lwgnn_forward(graph.features(), model, adj, rng);
}

void lwgnn_backward(const DenseMatrix& features, LwGnnModel& model, const ClassAdjacency& adj,
                    const LwGnnForward& forward, const DenseMatrix& grad_probs) {
    const auto& cfg = model.config;
    const bool dropped = !forward.masks.empty();
    const DenseMatrix grad_logits = row_softmax_backward(forward.probs, grad_probs);
    const DenseMatrix& head_input = dropped ? forward.dropped_inputs.back() : forward.pooled.pooled;
    model.params.gradient("lw.head.W") += matmul_transpose_a(grad_logits, head_input);
    if (cfg.head_bias) model.params.gradient("lw.head.b") += column_sums(grad_logits);

    DenseMatrix grad_pooled = dense_matmul(grad_logits, model.params.value("lw.head.W"));
    if (dropped) grad_pooled = hadamard(grad_pooled, forward.masks.back());
    std::vector<DenseMatrix> grad_layers = maxpool_backward(forward.pooled, grad_pooled, cfg.layers);

    for (std::size_t k = cfg.layers; k >= 1; --k) {
        const std::size_t idx = k - 1;
        const DenseMatrix& input = dropped ? forward.dropped_inputs[idx] : (k == 1 ? features : forward.layers[idx - 1].out);
        const std::string name = LwGnnModel::layer_name(k);
        auto grads = labelwise_layer_backward(input, model.params.value(name), adj, forward.layers[idx],
                                              grad_layers[idx], cfg.fallback);
        model.params.gradient(name) += grads.weight;
        if (k == 1) continue;
        if (dropped) grads.input = hadamard(grads.input, forward.masks[idx]);
        grad_layers[idx - 1] += grads.input;
    }
}

double lwgnn_weight_decay(LwGnnModel& model, bool accumulate_gradients) {
    const double wd = model.config.weight_decay;
    if (wd == 0.0) return 0.0;
    std::vector<std::string> names;
    for (std::size_t k = 1; k <= model.config.layers; ++k) names.push_back(LwGnnModel::layer_name(k));
    names.emplace_back("lw.head.W");
    double total = 0.0;
    for (const auto& name : names) {
        Parameter& w = model.params.at(name);
        if (accumulate_gradients) {
            auto g = w.gradient.values();
            auto v = w.value.values();
            for (std::size_t i = 0; i < v.size(); ++i) g[i] += wd * v[i];
        }
        total += frobenius_norm_squared(w.value);
    }
    return 0.5 * wd * total;
}

SimilarityReport representation_similarity(const DenseMatrix& representation, std::span<const ClassId> labels,
                                           const NodeMask& mask, std::size_t bins) {
    if (labels.size() != representation.rows() || mask.size() != representation.rows()) {
        throw ShapeError("representation_similarity: labels/mask length must equal row count");
    }
    if (bins == 0) throw PreconditionError("representation_similarity: bins must be positive");

    SimilarityReport report;
    report.intra_histogram.assign(bins, 0);
    report.inter_histogram.assign(bins, 0);

    std::vector<std::size_t> nodes;
    DenseMatrix unit(representation.rows(), representation.cols());
    for (std::size_t v = 0; v < representation.rows(); ++v) {
        if (!mask[v]) continue;
        if (labels[v] == kUnlabeled) throw PreconditionError("representation_similarity: masked node without label");
        auto row = representation.row(v);
        double norm = 0.0;
        for (double x : row) norm += x * x;
        if (norm == 0.0) {
            ++report.excluded_zero_rows;
            continue;
        }
        norm = std::sqrt(norm);
        auto dst = unit.row(v);
        for (std::size_t j = 0; j < row.size(); ++j) dst[j] = row[j] / norm;
        nodes.push_back(v);
    }

    const double width = 2.0 / static_cast<double>(bins);
    double intra_sum = 0.0;
    double inter_sum = 0.0;
    for (std::size_t a = 0; a < nodes.size(); ++a) {
        auto ra = unit.row(nodes[a]);
        for (std::size_t b = a + 1; b < nodes.size(); ++b) {
            auto rb = unit.row(nodes[b]);
            double cosine = 0.0;
            for (std::size_t j = 0; j < ra.size(); ++j) cosine += ra[j] * rb[j];
            cosine = std::clamp(cosine, -1.0, 1.0);
            const auto bin = std::min(bins - 1, static_cast<std::size_t>((cosine + 1.0) / width));
            if (labels[nodes[a]] == labels[nodes[b]]) {
                intra_sum += cosine;
                ++report.intra_pairs;
                ++report.intra_histogram[bin];
            } else {
                inter_sum += cosine;
                ++report.inter_pairs;
                ++report.inter_histogram[bin];
            }
        }
    }
    if (report.intra_pairs == 0 || report.inter_pairs == 0) {
        throw PreconditionError("representation_similarity: need intra-class and inter-class pairs");
    }
    report.intra_mean = intra_sum / static_cast<double>(report.intra_pairs);
    report.inter_mean = inter_sum / static_cast<double>(report.inter_pairs);
    return report;
}

}  // namespace lwgnn
