#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lwgnn/dense.hpp"
#include "lwgnn/ops.hpp"
#include "lwgnn/parameters.hpp"
#include "lwgnn/sparse.hpp"

namespace lwgnn {

struct GcnConfig {
    std::size_t input_dim = 0;
    std::size_t num_classes = 0;
    std::size_t layers = 2;  // number of propagation layers; 2 is the standard GCN
    std::size_t hidden = 64;
    double dropout = 0.5;
    double weight_decay = 5e-4;  // L2 on the first layer only
};

// Parameters "gcn.W0" (d×h), "gcn.W1".. (h×h), "gcn.W<L-1>" (h×c); no biases.
struct GcnModel {
    GcnConfig config;
    ParameterStore params;

    static std::string layer_name(std::size_t k);  // 0-based
};

GcnModel make_gcn(const GcnConfig& config, std::mt19937_64& rng);

struct GcnForward {
    std::vector<DenseMatrix> inputs;  // per layer, after dropout
    std::vector<DenseMatrix> masks;   // per layer; empty when dropout is off
    std::vector<DenseMatrix> pre;     // Â · (input · W) per layer
    std::vector<DenseMatrix> hidden;  // relu(pre) for every layer but the last
    DenseMatrix probs;

    // Representation feeding the output layer, or the logits of a single-layer model.
    const DenseMatrix& last_hidden() const { return hidden.empty() ? pre.back() : hidden.back(); }
};

// row_softmax(Â · relu(Â · X · W0) · W1) for the two-layer case. When `rng` is given, dropout
// is applied to each layer input (training mode); otherwise the forward pass is deterministic.
GcnForward gcn_forward(const SparseMatrix& a_hat, const DenseMatrix& features, const GcnModel& model,
                       std::mt19937_64* rng = nullptr);

// Accumulates parameter gradients of the loss (not including weight decay) given d loss / d probs.
void gcn_backward(const SparseMatrix& a_hat, GcnModel& model, const GcnForward& forward, const DenseMatrix& grad_probs);

// Adds weight_decay/2 · ||W0||^2 to the loss and its gradient to the store; returns the penalty.
double gcn_weight_decay(GcnModel& model, bool accumulate_gradients);

}  // namespace lwgnn
