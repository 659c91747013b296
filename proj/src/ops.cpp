#include "lwgnn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lwgnn/error.hpp"

namespace lwgnn {

DenseMatrix relu(const DenseMatrix& x) {
    DenseMatrix out = x;
    for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
    return out;
}

DenseMatrix relu_backward(const DenseMatrix& x, const DenseMatrix& upstream) {
    if (x.rows() != upstream.rows() || x.cols() != upstream.cols()) throw ShapeError("relu_backward: shape mismatch");
    DenseMatrix out = upstream;
    auto in = x.values();
    auto g = out.values();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = in[i] > 0.0 ? g[i] : 0.0;
    return out;
}

DenseMatrix row_softmax(const DenseMatrix& x) {
    DenseMatrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto src = x.row(r);
        auto dst = out.row(r);
        if (src.empty()) continue;
        const double top = *std::max_element(src.begin(), src.end());
        double total = 0.0;
        for (std::size_t c = 0; c < src.size(); ++c) {
            dst[c] = std::exp(src[c] - top);
            total += dst[c];
        }
        for (double& v : dst) v /= total;
    }
    return out;
}

DenseMatrix row_softmax_backward(const DenseMatrix& probs, const DenseMatrix& upstream) {
    if (probs.rows() != upstream.rows() || probs.cols() != upstream.cols()) {
        throw ShapeError("row_softmax_backward: shape mismatch");
    }
    DenseMatrix out(probs.rows(), probs.cols());
    for (std::size_t r = 0; r < probs.rows(); ++r) {
        auto p = probs.row(r);
        auto g = upstream.row(r);
        double dot = 0.0;
        for (std::size_t c = 0; c < p.size(); ++c) dot += p[c] * g[c];
        auto dst = out.row(r);
        for (std::size_t c = 0; c < p.size(); ++c) dst[c] = p[c] * (g[c] - dot);
    }
    return out;
}

LossAndGradient masked_cross_entropy(const DenseMatrix& probs, std::span<const ClassId> labels,
                                     const NodeMask& mask) {
    if (labels.size() != probs.rows() || mask.size() != probs.rows()) {
        throw ShapeError("masked_cross_entropy: labels/mask length must equal row count");
    }
    const std::size_t count = mask_count(mask);
    if (count == 0) throw PreconditionError("masked_cross_entropy: empty mask");

    LossAndGradient out{0.0, DenseMatrix(probs.rows(), probs.cols())};
    const double scale = 1.0 / static_cast<double>(count);
    for (std::size_t v = 0; v < probs.rows(); ++v) {
        if (!mask[v]) continue;
        const ClassId y = labels[v];
        if (y < 0 || static_cast<std::size_t>(y) >= probs.cols()) {
            throw PreconditionError("masked_cross_entropy: masked node " + std::to_string(v) + " has no valid label");
        }
        const double p = probs(v, static_cast<std::size_t>(y));
        const double clamped = std::max(p, kLogClamp);
        out.loss -= std::log(clamped) * scale;
        // Below the clamp the loss is flat in p.
        out.gradient(v, static_cast<std::size_t>(y)) = p >= kLogClamp ? -scale / clamped : 0.0;
    }
    return out;
}

MaxPoolResult maxpool_stack(std::span<const DenseMatrix> inputs) {
    if (inputs.empty()) throw PreconditionError("maxpool_stack: need at least one input");
    const auto& first = inputs.front();
    for (const auto& m : inputs) {
        if (m.rows() != first.rows() || m.cols() != first.cols()) throw ShapeError("maxpool_stack: shape mismatch");
    }
    MaxPoolResult out{first, std::vector<std::uint32_t>(first.size(), 0)};
    auto pooled = out.pooled.values();
    for (std::size_t k = 1; k < inputs.size(); ++k) {
        auto src = inputs[k].values();
        const auto layer = static_cast<std::uint32_t>(k);
        for (std::size_t i = 0; i < pooled.size(); ++i) {
            // strict comparison keeps ties on the lowest layer
            const bool higher = src[i] > pooled[i];
            pooled[i] = higher ? src[i] : pooled[i];
            out.argmax[i] = higher ? layer : out.argmax[i];
        }
    }
    return out;
}

std::vector<DenseMatrix> maxpool_backward(const MaxPoolResult& forward, const DenseMatrix& upstream,
                                          std::size_t num_inputs) {
    if (upstream.rows() != forward.pooled.rows() || upstream.cols() != forward.pooled.cols()) {
        throw ShapeError("maxpool_backward: shape mismatch");
    }
    std::vector<DenseMatrix> grads(num_inputs, DenseMatrix(upstream.rows(), upstream.cols()));
    auto g = upstream.values();
    for (std::size_t i = 0; i < g.size(); ++i) grads[forward.argmax[i]].values()[i] = g[i];
    return grads;
}

std::vector<ClassId> row_argmax(const DenseMatrix& x) {
    std::vector<ClassId> out(x.rows(), 0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto row = x.row(r);
        out[r] = static_cast<ClassId>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return out;
}

double masked_accuracy(const DenseMatrix& probs, std::span<const ClassId> labels, const NodeMask& mask) {
    if (labels.size() != probs.rows() || mask.size() != probs.rows()) {
        throw ShapeError("masked_accuracy: labels/mask length must equal row count");
    }
    const auto predicted = row_argmax(probs);
    std::size_t hits = 0;
    std::size_t total = 0;
    for (std::size_t v = 0; v < probs.rows(); ++v) {
        if (!mask[v]) continue;
        if (labels[v] == kUnlabeled) throw PreconditionError("masked_accuracy: masked node without a label");
        ++total;
        hits += predicted[v] == labels[v] ? 1 : 0;
    }
    if (total == 0) throw PreconditionError("masked_accuracy: empty mask");
    return static_cast<double>(hits) / static_cast<double>(total);
}

DenseMatrix dropout_mask(std::size_t rows, std::size_t cols, double rate, std::mt19937_64& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) throw PreconditionError("dropout_mask: rate must be in [0, 1)");
    DenseMatrix mask(rows, cols, 1.0);
    if (rate == 0.0) return mask;
    const double keep_scale = 1.0 / (1.0 - rate);
    // Each 64-bit draw yields four 16-bit lanes; an entry is dropped when its lane < rate · 2^16.
    const auto threshold = static_cast<std::uint32_t>(std::lround(rate * 65536.0));
    double* values = mask.data();
    const std::size_t n = mask.size();
    for (std::size_t i = 0; i < n; i += 4) {
        std::uint64_t bits = rng();
        const std::size_t end = std::min(n, i + 4);
        for (std::size_t j = i; j < end; ++j, bits >>= 16) {
            const bool keep = static_cast<std::uint32_t>(bits & 0xFFFFU) >= threshold;
            values[j] = keep_scale * static_cast<double>(keep);
        }
    }
    return mask;
}

}  // namespace lwgnn
