#include "lwgnn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "lwgnn/error.hpp"
#include "lwgnn/ops.hpp"

namespace lwgnn {

std::pair<double, double> SelectionWeights::mixture() const {
    const double top = std::max(phi1, phi2);
    const double e1 = std::exp(phi1 - top);
    const double e2 = std::exp(phi2 - top);
    return {e1 / (e1 + e2), e2 / (e1 + e2)};
}

DenseMatrix combine_predictions(const DenseMatrix& yc, const DenseMatrix& yg, const SelectionWeights& weights) {
    if (yc.rows() != yg.rows() || yc.cols() != yg.cols()) throw ShapeError("combine_predictions: shape mismatch");
    const auto [w1, w2] = weights.mixture();
    DenseMatrix out(yc.rows(), yc.cols());
    auto a = yc.values();
    auto b = yg.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = w1 * a[i] + w2 * b[i];
    return out;
}

CombinedLoss combined_loss(const DenseMatrix& yc, const DenseMatrix& yg, const SelectionWeights& weights,
                           std::span<const ClassId> labels, const NodeMask& mask) {
    const auto [w1, w2] = weights.mixture();
    auto [loss, grad] = masked_cross_entropy(combine_predictions(yc, yg, weights), labels, mask);
    double d_w1 = 0.0;
    double d_w2 = 0.0;
    auto g = grad.values();
    auto a = yc.values();
    auto b = yg.values();
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] == 0.0) continue;
        d_w1 += g[i] * a[i];
        d_w2 += g[i] * b[i];
    }
    CombinedLoss out;
    out.loss = loss;
    out.grad_yc = grad * w1;
    out.grad_yg = grad * w2;
    out.grad_phi1 = w1 * w2 * (d_w1 - d_w2);
    out.grad_phi2 = -out.grad_phi1;
    return out;
}

std::string_view variant_name(Variant v) {
    switch (v) {
        case Variant::Full: return "full";
        case Variant::FcOnly: return "fc-only";
        case Variant::FgOnly: return "fg-only";
        case Variant::MlpOnly: return "mlp-only";
        case Variant::GnnPseudoLabels: return "gnn-pseudo-labels";
    }
    return "unknown";
}

Variant parse_variant(std::string_view name) {
    if (name == "full" || name == "lwgnn") return Variant::Full;
    if (name == "fc-only" || name == "fc" || name == "no-selector-fC-only") return Variant::FcOnly;
    if (name == "fg-only" || name == "fg" || name == "gcn") return Variant::FgOnly;
    if (name == "mlp-only" || name == "mlp") return Variant::MlpOnly;
    if (name == "gnn-pseudo-labels" || name == "gnn-pseudo") return Variant::GnnPseudoLabels;
    throw PreconditionError("unknown variant '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
    if (!(lr_c > 0.0 && lr_g > 0.0 && lr_phi > 0.0 && pseudo_lr > 0.0)) {
        throw PreconditionError("learning rates must be positive");
    }
    if (inner_steps == 0) throw PreconditionError("inner_steps must be >= 1");
    if (max_outer == 0) throw PreconditionError("max_outer must be >= 1");
    if (layers == 0 || gcn_layers == 0) throw PreconditionError("layer counts must be >= 1");
    if (hidden == 0 || gcn_hidden == 0 || pseudo_hidden == 0) throw PreconditionError("hidden widths must be >= 1");
    if (!(gcn_dropout >= 0.0 && gcn_dropout < 1.0)) throw PreconditionError("gcn_dropout must be in [0, 1)");
    if (!(fc_dropout >= 0.0 && fc_dropout < 1.0)) throw PreconditionError("fc_dropout must be in [0, 1)");
    if (gcn_weight_decay < 0.0 || pseudo_weight_decay < 0.0 || fc_weight_decay < 0.0) {
        throw PreconditionError("weight decay must be >= 0");
    }
}

namespace {

bool uses_fc(Variant v) { return v == Variant::Full || v == Variant::FcOnly || v == Variant::GnnPseudoLabels; }
bool uses_fg(Variant v) { return v == Variant::Full || v == Variant::FgOnly || v == Variant::GnnPseudoLabels; }

// Combined loss of whichever branches are active. Single-branch variants use that branch's
// probabilities directly.
CombinedLoss branch_loss(const DenseMatrix* yc, const DenseMatrix* yg, const SelectionWeights& weights,
                         std::span<const ClassId> labels, const NodeMask& mask) {
    if (yc != nullptr && yg != nullptr) return combined_loss(*yc, *yg, weights, labels, mask);
    CombinedLoss out;
    auto [loss, grad] = masked_cross_entropy(yc != nullptr ? *yc : *yg, labels, mask);
    out.loss = loss;
    (yc != nullptr ? out.grad_yc : out.grad_yg) = std::move(grad);
    return out;
}

DenseMatrix mix(const DenseMatrix* yc, const DenseMatrix* yg, const SelectionWeights& weights) {
    if (yc != nullptr && yg != nullptr) return combine_predictions(*yc, *yg, weights);
    return yc != nullptr ? *yc : *yg;
}

SplitAccuracy split_accuracy(const DenseMatrix& probs, const Graph& graph) {
    SplitAccuracy acc;
    acc.train = masked_accuracy(probs, graph.labels(), graph.train_mask());
    acc.val = masked_accuracy(probs, graph.labels(), graph.val_mask());
    acc.test = mask_count(graph.test_mask()) > 0 ? masked_accuracy(probs, graph.labels(), graph.test_mask()) : 0.0;
    return acc;
}

PseudoTrainConfig pseudo_config(const TrainConfig& config) {
    PseudoTrainConfig p;
    p.max_epochs = config.pseudo_max_epochs;
    p.patience = config.pseudo_patience;
    p.lr = config.pseudo_lr;
    p.weight_decay = config.pseudo_weight_decay;
    p.hidden_dim = config.pseudo_hidden;
    p.optimizer = config.optimizer;
    p.seed = config.seed;
    return p;
}

constexpr double kSelectionGradientFloor = 1e-10;

void require_finite(double loss, const char* where) {
    if (!std::isfinite(loss)) throw NumericError(std::string("train: non-finite loss during ") + where);
}

}  // namespace

TrainResult train(const Graph& graph, const TrainConfig& config) {
    config.validate();
    if (mask_count(graph.train_mask()) == 0) throw PreconditionError("train: empty train mask");
    if (mask_count(graph.val_mask()) == 0) throw PreconditionError("train: empty validation mask");

    const auto started = std::chrono::steady_clock::now();
    const Variant variant = config.variant;
    TrainResult result;
    result.report.config = config;
    TrainedModels& models = result.models;
    models.variant = variant;
    models.a_hat = normalized_adjacency(graph);

    if (variant == Variant::MlpOnly) {
        auto pseudo = train_pseudo_predictor(graph, pseudo_config(config));
        result.report.pseudo_label_val_accuracy = pseudo.best_val_accuracy;
        result.report.best_iteration = pseudo.best_epoch;
        result.report.outer_iterations = pseudo.train_loss.size();
        models.pseudo = std::move(pseudo.model);
        result.report.combined = split_accuracy(mlp_forward(graph.features(), models.pseudo->params).probs, graph);
        result.report.wall_clock_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        return result;
    }

    // Pseudo labels and class operators, frozen for the rest of training.
    if (uses_fc(variant)) {
        DenseMatrix pseudo_probs;
        if (variant == Variant::GnnPseudoLabels) {
            TrainConfig gcn_cfg = config;
            gcn_cfg.variant = Variant::FgOnly;
            const TrainResult gcn = train(graph, gcn_cfg);
            pseudo_probs = predict(gcn.models, gcn.weights, graph);
            result.report.pseudo_label_val_accuracy = gcn.report.combined.val;
        } else {
            auto pseudo = train_pseudo_predictor(graph, pseudo_config(config));
            result.report.pseudo_label_val_accuracy = pseudo.best_val_accuracy;
            models.pseudo = std::move(pseudo.model);
            pseudo_probs = mlp_forward(graph.features(), models.pseudo->params).probs;
        }
        models.assignment = assign_labels(graph, pseudo_probs, config.pseudo_labels_include_val);
        models.class_adjacency = build_class_adjacency(graph, models.assignment);
    }

    std::mt19937_64 init_rng(config.seed);
    std::mt19937_64 dropout_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
    if (uses_fc(variant)) {
        LwGnnConfig lw;
        lw.input_dim = graph.feature_dim();
        lw.num_classes = graph.num_classes();
        lw.layers = config.layers;
        lw.hidden = config.hidden;
        lw.fallback = config.fallback;
        lw.dropout = config.fc_dropout;
        lw.weight_decay = config.fc_weight_decay;
        models.fc = make_lwgnn(lw, init_rng);
    }
    if (uses_fg(variant)) {
        GcnConfig gc;
        gc.input_dim = graph.feature_dim();
        gc.num_classes = graph.num_classes();
        gc.layers = config.gcn_layers;
        gc.hidden = config.gcn_hidden;
        gc.dropout = config.gcn_dropout;
        gc.weight_decay = config.gcn_weight_decay;
        models.fg = make_gcn(gc, init_rng);
    }
    const bool mixing = models.fc.has_value() && models.fg.has_value();

    ParameterStore phi;
    phi.add("phi", DenseMatrix(1, 2));
    auto current_weights = [&phi] { return SelectionWeights{phi.value("phi")(0, 0), phi.value("phi")(0, 1)}; };

    struct Snapshot {
        std::optional<LwGnnModel> fc;
        std::optional<GcnModel> fg;
        SelectionWeights weights;
        std::size_t iteration = 0;
    } best{models.fc, models.fg, current_weights(), 0};
    double best_acc = -1.0;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;

    const Labels& labels = graph.labels();
    const DenseMatrix& x = graph.features();
    std::size_t iteration = 0;
    for (; iteration < config.max_outer; ++iteration) {
        const SelectionWeights weights = current_weights();

        // Upper level: validation loss at the current branch parameters.
        std::optional<LwGnnForward> fc_eval;
        std::optional<GcnForward> fg_eval;
        if (models.fc) fc_eval = lwgnn_forward(x, *models.fc, models.class_adjacency);
        if (models.fg) fg_eval = gcn_forward(models.a_hat, x, *models.fg);
        const DenseMatrix* yc = fc_eval ? &fc_eval->probs : nullptr;
        const DenseMatrix* yg = fg_eval ? &fg_eval->probs : nullptr;

        const CombinedLoss val = branch_loss(yc, yg, weights, labels, graph.val_mask());
        require_finite(val.loss, "validation");
        const double val_acc = masked_accuracy(mix(yc, yg, weights), labels, graph.val_mask());

        IterationRecord record{iteration, 0.0, val.loss, val_acc, mixing ? weights.weight_fc() : (yc ? 1.0 : 0.0)};
        bool snapshot = false;
        bool progress = false;
        switch (config.snapshot_rule) {
            case SnapshotRule::Accuracy:
                snapshot = progress = val_acc > best_acc || (val_acc == best_acc && val.loss < best_loss);
                break;
            case SnapshotRule::Loss:
                snapshot = progress = val.loss < best_loss;
                break;
            case SnapshotRule::AccuracyAndLoss:
                progress = val_acc >= best_acc || val.loss <= best_loss;
                snapshot = val_acc >= best_acc && val.loss <= best_loss;
                break;
        }
        if (snapshot) best = {models.fc, models.fg, weights, iteration};
        if (progress) {
            if (config.snapshot_rule == SnapshotRule::AccuracyAndLoss) {
                best_acc = std::max(best_acc, val_acc);
                best_loss = std::min(best_loss, val.loss);
            } else {
                best_acc = val_acc;
                best_loss = val.loss;
            }
            since_best = 0;
        } else if (++since_best >= config.patience) {
            result.report.history.push_back(record);
            ++iteration;
            break;
        }

        if (mixing) {
            DenseMatrix& g = phi.gradient("phi");
            g(0, 0) = val.grad_phi1;
            g(0, 1) = val.grad_phi2;
            optimizer_step(phi, config.optimizer, config.lr_phi);
        }
        const SelectionWeights inner_weights = current_weights();

        // Lower level: T joint steps on the training loss with phi fixed.
        for (std::size_t t = 0; t < config.inner_steps; ++t) {
            // Without dropout the evaluation pass of f_C doubles as the first training pass.
            if (models.fc && (t > 0 || config.fc_dropout > 0.0)) {
                fc_eval = lwgnn_forward(x, *models.fc, models.class_adjacency, &dropout_rng);
            }
            if (models.fg) fg_eval = gcn_forward(models.a_hat, x, *models.fg, &dropout_rng);
            yc = fc_eval ? &fc_eval->probs : nullptr;
            yg = fg_eval ? &fg_eval->probs : nullptr;

            CombinedLoss tr = branch_loss(yc, yg, inner_weights, labels, graph.train_mask());
            if (models.fc) tr.loss += lwgnn_weight_decay(*models.fc, true);
            if (models.fg) tr.loss += gcn_weight_decay(*models.fg, true);
            require_finite(tr.loss, "training");
            record.train_loss = tr.loss;

            if (models.fc) {
                lwgnn_backward(x, *models.fc, models.class_adjacency, *fc_eval, tr.grad_yc);
                optimizer_step(models.fc->params, config.optimizer, config.lr_c);
            }
            if (models.fg) {
                gcn_backward(models.a_hat, *models.fg, *fg_eval, tr.grad_yg);
                optimizer_step(models.fg->params, config.optimizer, config.lr_g);
            }
        }
        result.report.history.push_back(record);
    }

    models.fc = std::move(best.fc);
    models.fg = std::move(best.fg);
    result.weights = best.weights;
    result.report.best_iteration = best.iteration;
    result.report.outer_iterations = iteration;
    if (mixing) {
        result.report.weight_fc_at_snapshot = result.weights.weight_fc();
        const DenseMatrix yc = lwgnn_forward(x, *models.fc, models.class_adjacency).probs;
        const DenseMatrix yg = gcn_forward(models.a_hat, x, *models.fg).probs;
        ParameterStore refine;
        refine.add("phi", DenseMatrix{{result.weights.phi1, result.weights.phi2}});
        for (std::size_t step = 0; step < config.selection_steps; ++step) {
            const SelectionWeights w{refine.value("phi")(0, 0), refine.value("phi")(0, 1)};
            const CombinedLoss val = combined_loss(yc, yg, w, labels, graph.val_mask());
            require_finite(val.loss, "selection");
            if (std::abs(val.grad_phi1) < kSelectionGradientFloor) break;
            DenseMatrix& g = refine.gradient("phi");
            g(0, 0) = val.grad_phi1;
            g(0, 1) = val.grad_phi2;
            optimizer_step(refine, config.optimizer, config.lr_phi);
            ++result.report.selection_steps;
        }
        result.weights = {refine.value("phi")(0, 0), refine.value("phi")(0, 1)};
        result.report.weight_fc = result.weights.weight_fc();
    }

    // The only place test labels are read.
    std::optional<DenseMatrix> yc_final;
    std::optional<DenseMatrix> yg_final;
    if (models.fc) {
        yc_final = lwgnn_forward(x, *models.fc, models.class_adjacency).probs;
        result.report.fc = split_accuracy(*yc_final, graph);
    }
    if (models.fg) {
        yg_final = gcn_forward(models.a_hat, x, *models.fg).probs;
        result.report.fg = split_accuracy(*yg_final, graph);
    }
    result.report.combined = split_accuracy(
        mix(yc_final ? &*yc_final : nullptr, yg_final ? &*yg_final : nullptr, result.weights), graph);
    result.report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

TrainResult run_ablation(const Graph& graph, TrainConfig config, Variant variant) {
    config.variant = variant;
    return train(graph, config);
}

DenseMatrix predict(const TrainedModels& models, const SelectionWeights& weights, const Graph& graph) {
    if (models.variant == Variant::MlpOnly) {
        if (!models.pseudo) throw PreconditionError("predict: MLP variant without a trained MLP");
        return mlp_forward(graph.features(), models.pseudo->params).probs;
    }
    std::optional<DenseMatrix> yc;
    std::optional<DenseMatrix> yg;
    if (models.fc) yc = lwgnn_forward(graph.features(), *models.fc, models.class_adjacency).probs;
    if (models.fg) yg = gcn_forward(models.a_hat, graph.features(), *models.fg).probs;
    if (!yc && !yg) throw PreconditionError("predict: no trained branch");
    return mix(yc ? &*yc : nullptr, yg ? &*yg : nullptr, weights);
}

double evaluate(const TrainedModels& models, const SelectionWeights& weights, const Graph& graph,
                const NodeMask& mask) {
    if (mask_count(mask) == 0) throw PreconditionError("evaluate: empty mask");
    return masked_accuracy(predict(models, weights, graph), graph.labels(), mask);
}

MeanStd mean_std(std::span<const double> values) {
    if (values.empty()) return {};
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

std::vector<DepthResult> depth_sweep(const Graph& graph, const TrainConfig& config, std::span<const std::size_t> depths,
                                     std::size_t num_seeds) {
    if (depths.empty()) throw PreconditionError("depth_sweep: no depths given");
    if (num_seeds == 0) throw PreconditionError("depth_sweep: need at least one seed");
    std::vector<DepthResult> out;
    for (std::size_t depth : depths) {
        DepthResult row;
        row.depth = depth;
        for (std::size_t s = 0; s < num_seeds; ++s) {
            TrainConfig cfg = config;
            cfg.seed = config.seed + s;
            cfg.layers = depth;
            row.fc_accuracy.push_back(run_ablation(graph, cfg, Variant::FcOnly).report.combined.test);
            cfg.layers = config.layers;
            cfg.gcn_layers = depth;
            row.gcn_accuracy.push_back(run_ablation(graph, cfg, Variant::FgOnly).report.combined.test);
        }
        row.fc = mean_std(row.fc_accuracy);
        row.gcn = mean_std(row.gcn_accuracy);
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace lwgnn
