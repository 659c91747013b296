#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "lwgnn/dense.hpp"
#include "lwgnn/types.hpp"

namespace lwgnn {

inline constexpr double kLogClamp = 1e-12;

DenseMatrix relu(const DenseMatrix& x);
// Passes upstream where x > 0; the subgradient at 0 is 0.
DenseMatrix relu_backward(const DenseMatrix& x, const DenseMatrix& upstream);

// Per-row softmax with max subtraction.
DenseMatrix row_softmax(const DenseMatrix& x);
// Gradient with respect to the logits, given the softmax output.
DenseMatrix row_softmax_backward(const DenseMatrix& probs, const DenseMatrix& upstream);

struct LossAndGradient {
    double loss = 0.0;
    DenseMatrix gradient;  // d loss / d probs, same shape as probs
};

// Mean of -log(max(p[v][y_v], 1e-12)) over masked nodes.
LossAndGradient masked_cross_entropy(const DenseMatrix& probs, std::span<const ClassId> labels,
                                     const NodeMask& mask);

struct MaxPoolResult {
    DenseMatrix pooled;
    std::vector<std::uint32_t> argmax;  // source index per entry, row-major; ties keep the lowest index
};

MaxPoolResult maxpool_stack(std::span<const DenseMatrix> inputs);
// Routes each upstream entry to the input that won the max.
std::vector<DenseMatrix> maxpool_backward(const MaxPoolResult& forward, const DenseMatrix& upstream,
                                          std::size_t num_inputs);

// Index of the largest entry in each row, ties to the lowest column.
std::vector<ClassId> row_argmax(const DenseMatrix& x);

// Fraction of masked rows whose argmax equals the label. Throws PreconditionError on an empty mask.
double masked_accuracy(const DenseMatrix& probs, std::span<const ClassId> labels, const NodeMask& mask);

// Inverted-dropout multiplier: each entry is 0 with probability `rate` (resolved to 1/65536),
// else 1/(1-rate).
DenseMatrix dropout_mask(std::size_t rows, std::size_t cols, double rate, std::mt19937_64& rng);

}  // namespace lwgnn
