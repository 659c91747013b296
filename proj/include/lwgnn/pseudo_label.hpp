#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lwgnn/dense.hpp"
#include "lwgnn/graph.hpp"
#include "lwgnn/parameters.hpp"

namespace lwgnn {

// One-hidden-layer MLP with parameters "mlp.W1" (d×h), "mlp.b1" (1×h), "mlp.W2" (h×c), "mlp.b2" (1×c).
struct MlpModel {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 64;
    std::size_t num_classes = 0;
    ParameterStore params;
};

MlpModel make_mlp(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes, std::mt19937_64& rng);

struct MlpActivations {
    DenseMatrix hidden_pre;  // X·W1 + b1
    DenseMatrix hidden;      // relu(hidden_pre)
    DenseMatrix probs;
};

// row_softmax(relu(X·W1 + b1)·W2 + b2)
MlpActivations mlp_forward(const DenseMatrix& features, const ParameterStore& params);
// Accumulates parameter gradients given d loss / d probs.
void mlp_backward(const DenseMatrix& features, ParameterStore& params, const MlpActivations& acts,
                  const DenseMatrix& grad_probs);

struct PseudoTrainConfig {
    std::size_t max_epochs = 500;
    std::size_t patience = 50;
    double lr = 0.01;
    double weight_decay = 0.0;
    std::size_t hidden_dim = 64;
    OptimizerKind optimizer = OptimizerKind::Adam;
    std::uint64_t seed = 0;
};

struct PseudoTrainResult {
    MlpModel model;
    std::vector<double> train_loss;  // per epoch
    std::size_t best_epoch = 0;
    double best_val_accuracy = 0.0;
};

// Full-batch training on the train mask; returns the parameters with the best validation accuracy.
// Without a validation mask the final epoch is returned.
PseudoTrainResult train_pseudo_predictor(const Graph& graph, const PseudoTrainConfig& config);

enum class LabelSource : std::uint8_t { GroundTruth, Predicted };

struct LabelAssignment {
    std::vector<ClassId> labels;
    std::vector<LabelSource> source;
};

// Labeled nodes (train ∪ val, or train only) keep ground truth; the rest take the row argmax.
LabelAssignment assign_labels(const Graph& graph, const DenseMatrix& probs, bool include_validation = true);

}  // namespace lwgnn
