#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lwgnn/dense.hpp"
#include "lwgnn/graph.hpp"
#include "lwgnn/ops.hpp"
#include "lwgnn/parameters.hpp"
#include "lwgnn/pseudo_label.hpp"
#include "lwgnn/sparse.hpp"

namespace lwgnn {

// What a node receives for a class it has no neighbors in.
enum class EmptyClassFallback : std::uint8_t { Zero, ClassAverage };

// Per-class aggregation operators built from a frozen label assignment.
//
// operators[i](v, u) = 1 / sqrt(max(d(v,i), 1) * max(d(u,i), 1)) for every edge (v, u) whose
// endpoint u is assigned class i, where d(x,i) counts x's neighbors assigned class i.
struct ClassAdjacency {
    std::size_t num_nodes = 0;
    std::size_t num_classes = 0;
    std::vector<SparseMatrix> operators;
    std::vector<SparseMatrix> transposed;
    std::vector<std::uint32_t> class_degree;  // N×c row-major
    std::vector<ClassId> assignment;

    std::uint32_t degree(std::size_t v, std::size_t cls) const { return class_degree[v * num_classes + cls]; }
};

ClassAdjacency build_class_adjacency(const Graph& graph, const LabelAssignment& assignment);

struct LabelwiseLayerOutput {
    DenseMatrix z;    // H_in · Wᵀ, N×p
    DenseMatrix pre;  // [Z | A_1 | ... | A_c] before ReLU, N×(c+1)p
    DenseMatrix out;  // ReLU(pre)

    // Aggregated class-i block A_i (cls in [0, c)).
    DenseMatrix class_block(std::size_t cls) const;
};

// One label-wise message passing layer with weight W of shape p×width.
LabelwiseLayerOutput labelwise_layer(const DenseMatrix& h_in, const DenseMatrix& weight, const ClassAdjacency& adj,
                                     EmptyClassFallback fallback = EmptyClassFallback::Zero);

struct LabelwiseLayerGradients {
    DenseMatrix weight;
    DenseMatrix input;
};

LabelwiseLayerGradients labelwise_layer_backward(const DenseMatrix& h_in, const DenseMatrix& weight,
                                                 const ClassAdjacency& adj, const LabelwiseLayerOutput& forward,
                                                 const DenseMatrix& grad_out,
                                                 EmptyClassFallback fallback = EmptyClassFallback::Zero);

struct LwGnnConfig {
    std::size_t input_dim = 0;
    std::size_t num_classes = 0;
    std::size_t layers = 2;
    std::size_t hidden = 64;
    bool head_bias = true;
    EmptyClassFallback fallback = EmptyClassFallback::Zero;
    double dropout = 0.0;       // on the inputs of every layer and of the head, training passes only
    double weight_decay = 0.0;  // L2 on lw.W<k> and lw.head.W (not the bias)
};

// Parameters: "lw.W<k>" (p × width_k) for k = 1..K, "lw.head.W" (c × (c+1)p), "lw.head.b" (1 × c).
struct LwGnnModel {
    LwGnnConfig config;
    ParameterStore params;

    static std::string layer_name(std::size_t k);  // 1-based
};

LwGnnModel make_lwgnn(const LwGnnConfig& config, std::mt19937_64& rng);

struct LwGnnForward {
    // Training passes only: masked inputs of layers 1..K, then of the head.
    std::vector<DenseMatrix> dropped_inputs;
    std::vector<DenseMatrix> masks;
    std::vector<LabelwiseLayerOutput> layers;
    MaxPoolResult pooled;
    DenseMatrix logits;
    DenseMatrix probs;

    // Last-layer representation H^(K).
    const DenseMatrix& last_representation() const { return layers.back().out; }
};

// Passing `rng` selects a training pass with dropout (when config.dropout > 0).
LwGnnForward lwgnn_forward(const DenseMatrix& features, const LwGnnModel& model, const ClassAdjacency& adj,
                           std::mt19937_64* rng = nullptr);
LwGnnForward lwgnn_forward(const Graph& graph, const LwGnnModel& model, const ClassAdjacency& adj,
                           std::mt19937_64* rng = nullptr);

// Accumulates gradients into model.params given d loss / d probs.
void lwgnn_backward(const DenseMatrix& features, LwGnnModel& model, const ClassAdjacency& adj,
                    const LwGnnForward& forward, const DenseMatrix& grad_probs);

// Returns weight_decay/2 · (Σ_k ||W_k||² + ||W_head||²) and optionally adds its gradient.
double lwgnn_weight_decay(LwGnnModel& model, bool accumulate_gradients);

struct SimilarityReport {
    double intra_mean = 0.0;
    double inter_mean = 0.0;
    std::size_t intra_pairs = 0;
    std::size_t inter_pairs = 0;
    std::size_t excluded_zero_rows = 0;
    // Bin b covers cosine values in [-1 + b·w, -1 + (b+1)·w), w = 2 / bins; 1.0 goes in the last bin.
    std::vector<std::size_t> intra_histogram;
    std::vector<std::size_t> inter_histogram;

    double gap() const { return intra_mean - inter_mean; }
};

// Cosine similarity of representation rows over all masked node pairs, split by label agreement.
// All-zero rows are excluded and counted.
SimilarityReport representation_similarity(const DenseMatrix& representation, std::span<const ClassId> labels,
                                           const NodeMask& mask, std::size_t bins = 20);

}  // namespace lwgnn
