#include "lwgnn/pseudo_label.hpp"

#include <cmath>

#include "lwgnn/error.hpp"
#include "lwgnn/ops.hpp"

namespace lwgnn {

MlpModel make_mlp(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes, std::mt19937_64& rng) {
    MlpModel m;
    m.input_dim = input_dim;
    m.hidden_dim = hidden_dim;
    m.num_classes = num_classes;
    m.params.add("mlp.W1", glorot_uniform(input_dim, hidden_dim, rng));
    m.params.add("mlp.b1", DenseMatrix(1, hidden_dim));
    m.params.add("mlp.W2", glorot_uniform(hidden_dim, num_classes, rng));
    m.params.add("mlp.b2", DenseMatrix(1, num_classes));
    return m;
}

MlpActivations mlp_forward(const DenseMatrix& features, const ParameterStore& params) {
    MlpActivations acts;
    acts.hidden_pre = dense_matmul(features, params.value("mlp.W1"));
    add_row_vector(acts.hidden_pre, params.value("mlp.b1"));
    acts.hidden = relu(acts.hidden_pre);
    DenseMatrix logits = dense_matmul(acts.hidden, params.value("mlp.W2"));
    add_row_vector(logits, params.value("mlp.b2"));
    acts.probs = row_softmax(logits);
    return acts;
}

void mlp_backward(const DenseMatrix& features, ParameterStore& params, const MlpActivations& acts,
                  const DenseMatrix& grad_probs) {
    const DenseMatrix grad_logits = row_softmax_backward(acts.probs, grad_probs);
    params.gradient("mlp.W2") += matmul_transpose_a(acts.hidden, grad_logits);
    params.gradient("mlp.b2") += column_sums(grad_logits);
    const DenseMatrix grad_hidden = matmul_transpose_b(grad_logits, params.value("mlp.W2"));
    const DenseMatrix grad_pre = relu_backward(acts.hidden_pre, grad_hidden);
    params.gradient("mlp.W1") += matmul_transpose_a(features, grad_pre);
    params.gradient("mlp.b1") += column_sums(grad_pre);
}

PseudoTrainResult train_pseudo_predictor(const Graph& graph, const PseudoTrainConfig& config) {
    if (mask_count(graph.train_mask()) == 0) throw PreconditionError("train_pseudo_predictor: empty train mask");
    const bool has_val = mask_count(graph.val_mask()) > 0;

    std::mt19937_64 rng(config.seed);
    PseudoTrainResult result{make_mlp(graph.feature_dim(), config.hidden_dim, graph.num_classes(), rng), {}, 0, -1.0};
    ParameterStore& params = result.model.params;
    ParameterStore best = params;
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        const MlpActivations acts = mlp_forward(graph.features(), params);
        if (has_val) {
            const double val_acc = masked_accuracy(acts.probs, graph.labels(), graph.val_mask());
            if (val_acc > result.best_val_accuracy) {
                result.best_val_accuracy = val_acc;
                result.best_epoch = epoch;
                best = params;
                since_best = 0;
            } else if (++since_best >= config.patience) {
                break;
            }
        }
        auto [loss, grad] = masked_cross_entropy(acts.probs, graph.labels(), graph.train_mask());
        if (!std::isfinite(loss)) throw NumericError("train_pseudo_predictor: non-finite loss");
        result.train_loss.push_back(loss);
        mlp_backward(graph.features(), params, acts, grad);
        if (config.weight_decay > 0.0) {
            for (auto& [name, p] : params) {
                if (name.find(".W") == std::string::npos) continue;
                auto w = p.value.values();
                auto g = p.gradient.values();
                for (std::size_t i = 0; i < w.size(); ++i) g[i] += config.weight_decay * w[i];
            }
        }
        optimizer_step(params, config.optimizer, config.lr);
    }
    if (has_val) {
        params = std::move(best);
    } else {
        result.best_epoch = result.train_loss.empty() ? 0 : result.train_loss.size() - 1;
        result.best_val_accuracy = 0.0;
    }
    return result;
}

LabelAssignment assign_labels(const Graph& graph, const DenseMatrix& probs, bool include_validation) {
    if (probs.rows() != graph.num_nodes() || probs.cols() != graph.num_classes()) {
        throw ShapeError("assign_labels: probability matrix must be N×c");
    }
    LabelAssignment out{row_argmax(probs), std::vector<LabelSource>(graph.num_nodes(), LabelSource::Predicted)};
    for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
        const bool labeled = graph.train_mask()[v] || (include_validation && graph.val_mask()[v]);
        if (labeled) {
            out.labels[v] = graph.labels()[v];
            out.source[v] = LabelSource::GroundTruth;
        }
    }
    return out;
}

}  // namespace lwgnn
