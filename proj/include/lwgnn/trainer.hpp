#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lwgnn/gcn.hpp"
#include "lwgnn/graph.hpp"
#include "lwgnn/labelwise.hpp"
#include "lwgnn/pseudo_label.hpp"

namespace lwgnn {

// Mixture logits for the label-wise branch (phi1) and the homophilic branch (phi2).
struct SelectionWeights {
    double phi1 = 0.0;
    double phi2 = 0.0;

    // softmax(phi1, phi2)
    std::pair<double, double> mixture() const;
    double weight_fc() const { return mixture().first; }
};

// w1 · yC + w2 · yG with (w1, w2) = softmax(phi1, phi2).
DenseMatrix combine_predictions(const DenseMatrix& yc, const DenseMatrix& yg, const SelectionWeights& weights);

struct CombinedLoss {
    double loss = 0.0;
    DenseMatrix grad_yc;
    DenseMatrix grad_yg;
    double grad_phi1 = 0.0;
    double grad_phi2 = 0.0;
};

// Masked cross entropy of the combined prediction with gradients to both branches and to phi.
CombinedLoss combined_loss(const DenseMatrix& yc, const DenseMatrix& yg, const SelectionWeights& weights,
                           std::span<const ClassId> labels, const NodeMask& mask);

enum class Variant : std::uint8_t {
    Full,             // f_C + f_G with learned selection
    FcOnly,           // label-wise branch only
    FgOnly,           // GCN branch only
    MlpOnly,          // the pseudo-label MLP on its own
    GnnPseudoLabels,  // full model with pseudo labels from a GCN instead of the MLP
};

std::string_view variant_name(Variant v);
// Accepts the canonical names plus the aliases "mlp", "gcn", "fc", "fg".
Variant parse_variant(std::string_view name);

// Which outer iteration is returned, and what counts as progress for patience.
enum class SnapshotRule : std::uint8_t {
    Accuracy,         // best validation accuracy, ties to lower validation loss
    Loss,             // lowest validation loss
    AccuracyAndLoss,  // progress when either improves; snapshot when neither got worse
};

struct TrainConfig {
    double lr_c = 0.01;
    double lr_g = 0.01;
    double lr_phi = 0.01;
    std::size_t inner_steps = 2;
    std::size_t max_outer = 300;
    std::size_t patience = 40;
    SnapshotRule snapshot_rule = SnapshotRule::AccuracyAndLoss;
    // phi-only steps on the validation loss once the branches are frozen at the returned snapshot
    std::size_t selection_steps = 1000;
    std::uint64_t seed = 0;
    std::size_t layers = 2;    // label-wise layers K
    std::size_t hidden = 64;   // label-wise width p
    OptimizerKind optimizer = OptimizerKind::Adam;
    EmptyClassFallback fallback = EmptyClassFallback::Zero;
    double fc_dropout = 0.3;
    double fc_weight_decay = 2e-2;
    bool pseudo_labels_include_val = true;

    std::size_t pseudo_hidden = 64;
    std::size_t pseudo_max_epochs = 500;
    std::size_t pseudo_patience = 50;
    double pseudo_lr = 0.01;
    double pseudo_weight_decay = 0.0;

    std::size_t gcn_layers = 2;
    std::size_t gcn_hidden = 64;
    double gcn_dropout = 0.5;
    double gcn_weight_decay = 5e-4;

    Variant variant = Variant::Full;

    void validate() const;  // throws PreconditionError
};

struct IterationRecord {
    std::size_t iteration = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
    double weight_fc = 0.0;
};

struct SplitAccuracy {
    double train = 0.0;
    double val = 0.0;
    double test = 0.0;
};

struct TrainReport {
    TrainConfig config;
    std::vector<IterationRecord> history;
    SplitAccuracy combined;
    std::optional<SplitAccuracy> fc;
    std::optional<SplitAccuracy> fg;
    std::optional<double> weight_fc;  // present only when both branches are mixed
    double pseudo_label_val_accuracy = 0.0;
    std::size_t best_iteration = 0;
    std::size_t outer_iterations = 0;
    std::optional<double> weight_fc_at_snapshot;
    std::size_t selection_steps = 0;  // phi-only steps actually taken
    double wall_clock_seconds = 0.0;
};

struct TrainedModels {
    Variant variant = Variant::Full;
    std::optional<MlpModel> pseudo;
    LabelAssignment assignment;
    ClassAdjacency class_adjacency;
    SparseMatrix a_hat;
    std::optional<LwGnnModel> fc;
    std::optional<GcnModel> fg;
};

struct TrainResult {
    TrainedModels models;
    SelectionWeights weights;
    TrainReport report;
};

// Algorithm: train the pseudo-label MLP, freeze the label assignment and class operators, then
// alternate one phi update on the validation loss (branch parameters held constant) with
// `inner_steps` joint updates of both branches on the training loss. Stops on validation
// patience or `max_outer` and restores the best-validation snapshot, then continues the phi
// updates alone against that snapshot for up to `selection_steps` steps. Honors config.variant.
TrainResult train(const Graph& graph, const TrainConfig& config);
TrainResult run_ablation(const Graph& graph, TrainConfig config, Variant variant);

// Evaluation-mode probabilities of the trained variant for all nodes.
DenseMatrix predict(const TrainedModels& models, const SelectionWeights& weights, const Graph& graph);
// Accuracy of the combined prediction on `mask` (argmax ties to the lowest class).
double evaluate(const TrainedModels& models, const SelectionWeights& weights, const Graph& graph, const NodeMask& mask);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
};
MeanStd mean_std(std::span<const double> values);

struct DepthResult {
    std::size_t depth = 0;
    std::vector<double> fc_accuracy;   // per seed, test
    std::vector<double> gcn_accuracy;  // per seed, test
    MeanStd fc;
    MeanStd gcn;
};

// Trains the label-wise-only model and a plain GCN at each depth on the graph's split,
// with model seeds config.seed, config.seed + 1, ...
std::vector<DepthResult> depth_sweep(const Graph& graph, const TrainConfig& config, std::span<const std::size_t> depths,
                                     std::size_t num_seeds = 3);

}  // namespace lwgnn
