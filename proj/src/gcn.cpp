#include "lwgnn/gcn.hpp"

#include "lwgnn/error.hpp"
#include "lwgnn/ops.hpp"

namespace lwgnn {

std::string GcnModel::layer_name(std::size_t k) { return "gcn.W" + std::to_string(k); }

GcnModel make_gcn(const GcnConfig& config, std::mt19937_64& rng) {
    if (config.layers == 0) throw PreconditionError("make_gcn: need at least one layer");
    if (!(config.dropout >= 0.0 && config.dropout < 1.0)) throw PreconditionError("make_gcn: dropout must be in [0, 1)");
    GcnModel model{config, {}};
    for (std::size_t k = 0; k < config.layers; ++k) {
        const std::size_t in = k == 0 ? config.input_dim : config.hidden;
        const std::size_t out = k + 1 == config.layers ? config.num_classes : config.hidden;
        model.params.add(GcnModel::layer_name(k), glorot_uniform(in, out, rng));
    }
    return model;
}

GcnForward gcn_forward(const SparseMatrix& a_hat, const DenseMatrix& features, const GcnModel& model,
                       std::mt19937_64* rng) {
    if (a_hat.rows() != a_hat.cols() || a_hat.cols() != features.rows()) {
        throw ShapeError("gcn_forward: adjacency must be N×N for N feature rows");
    }
    const auto& cfg = model.config;
    const bool train = rng != nullptr && cfg.dropout > 0.0;
    GcnForward fwd;
    DenseMatrix current = features;
    for (std::size_t k = 0; k < cfg.layers; ++k) {
        if (train) {
            fwd.masks.push_back(dropout_mask(current.rows(), current.cols(), cfg.dropout, *rng));
            current = hadamard(current, fwd.masks.back());
        }
        fwd.inputs.push_back(current);
        fwd.pre.push_back(sparse_dense_matmul(a_hat, dense_matmul(current, model.params.value(GcnModel::layer_name(k)))));
        if (k + 1 < cfg.layers) {
            fwd.hidden.push_back(relu(fwd.pre.back()));
            current = fwd.hidden.back();
        }
    }
    fwd.probs = row_softmax(fwd.pre.back());
    return fwd;
}

void gcn_backward(const SparseMatrix& a_hat, GcnModel& model, const GcnForward& forward, const DenseMatrix& grad_probs) {
    // Â is symmetric, so Âᵀ · g = Â · g.
    DenseMatrix grad_pre = row_softmax_backward(forward.probs, grad_probs);
    for (std::size_t k = model.config.layers; k-- > 0;) {
        const std::string name = GcnModel::layer_name(k);
        const DenseMatrix grad_xw = sparse_dense_matmul(a_hat, grad_pre);
        model.params.gradient(name) += matmul_transpose_a(forward.inputs[k], grad_xw);
        if (k == 0) break;
        DenseMatrix grad_input = matmul_transpose_b(grad_xw, model.params.value(name));
        if (!forward.masks.empty()) grad_input = hadamard(grad_input, forward.masks[k]);
        grad_pre = relu_backward(forward.pre[k - 1], grad_input);
    }
}

double gcn_weight_decay(GcnModel& model, bool accumulate_gradients) {
    const double wd = model.config.weight_decay;
    if (wd == 0.0) return 0.0;
    Parameter& w0 = model.params.at(GcnModel::layer_name(0));
    if (accumulate_gradients) {
        auto g = w0.gradient.values();
        auto w = w0.value.values();
        for (std::size_t i = 0; i < w.size(); ++i) g[i] += wd * w[i];
    }
    return 0.5 * wd * frobenius_norm_squared(w0.value);
}

}  // namespace lwgnn
