#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lwgnn/error.hpp"
#include "lwgnn/ops.hpp"

using namespace lwgnn;

namespace {

DenseMatrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 3.0) {
    std::uniform_real_distribution<double> d(-scale, scale);
    DenseMatrix m(r, c);
    for (double& v : m.values()) v = d(rng);
    return m;
}

}  // namespace

TEST(Relu, ExamplesAndGradient) {
    EXPECT_EQ(relu(DenseMatrix{{-1, -2}, {-0.5, -3}}), DenseMatrix(2, 2));
    EXPECT_EQ(relu(DenseMatrix{{-1, 2}}), (DenseMatrix{{0, 2}}));
    EXPECT_EQ(relu_backward(DenseMatrix{{-1, 2}}, DenseMatrix{{5, 5}}), (DenseMatrix{{0, 5}}));
    // subgradient at exactly zero is zero
    EXPECT_EQ(relu_backward(DenseMatrix{{0.0}}, DenseMatrix{{7.0}}), (DenseMatrix{{0.0}}));
    EXPECT_THROW(relu_backward(DenseMatrix(1, 2), DenseMatrix(2, 1)), ShapeError);
}

TEST(RowSoftmax, Examples) {
    const DenseMatrix p = row_softmax(DenseMatrix{{0, 0}, {std::log(3.0), 0}, {1000, 0}});
    EXPECT_DOUBLE_EQ(p(0, 0), 0.5);
    EXPECT_NEAR(p(1, 0), 0.75, 1e-15);
    EXPECT_NEAR(p(1, 1), 0.25, 1e-15);
    EXPECT_TRUE(p.all_finite());
    EXPECT_NEAR(p(2, 0), 1.0, 1e-15);
    EXPECT_NEAR(p(2, 1), 0.0, 1e-15);
}

TEST(RowSoftmaxProperty, RowsSumToOneAndShiftInvariant) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> shift(-50.0, 50.0);
    for (int trial = 0; trial < 100; ++trial) {
        const DenseMatrix x = random_matrix(1 + rng() % 7, 1 + rng() % 6, rng);
        const DenseMatrix p = row_softmax(x);
        DenseMatrix shifted = x;
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const double s = shift(rng);
            double sum = 0.0;
            for (std::size_t c = 0; c < x.cols(); ++c) {
                shifted(r, c) += s;
                sum += p(r, c);
            }
            EXPECT_NEAR(sum, 1.0, 1e-12);
        }
        EXPECT_LE(max_abs_difference(row_softmax(shifted), p), 1e-12);
    }
}

TEST(MaskedCrossEntropy, Examples) {
    const std::vector<ClassId> labels{0, 1};
    const NodeMask all{true, true};
    EXPECT_NEAR(masked_cross_entropy(DenseMatrix{{1, 0}, {0, 1}}, labels, all).loss, 0.0, 1e-15);
    EXPECT_NEAR(masked_cross_entropy(DenseMatrix{{0.5, 0.5}, {0.5, 0.5}}, labels, all).loss, std::log(2.0), 1e-15);
}

TEST(MaskedCrossEntropy, GradientFormula) {
    const DenseMatrix p{{0.2, 0.8}, {0.4, 0.6}, {0.9, 0.1}};
    const std::vector<ClassId> labels{1, 0, 0};
    const NodeMask mask{true, true, false};
    const auto out = masked_cross_entropy(p, labels, mask);
    EXPECT_NEAR(out.loss, -(std::log(0.8) + std::log(0.4)) / 2.0, 1e-15);
    EXPECT_NEAR(out.gradient(0, 1), -1.0 / (2.0 * 0.8), 1e-15);
    EXPECT_NEAR(out.gradient(1, 0), -1.0 / (2.0 * 0.4), 1e-15);
    EXPECT_EQ(out.gradient(0, 0), 0.0);
    EXPECT_EQ(out.gradient(2, 0), 0.0);
}

TEST(MaskedCrossEntropy, UnmaskedRowIsIgnored) {
    DenseMatrix p{{0.3, 0.7}, {0.6, 0.4}};
    const std::vector<ClassId> labels{1, 0};
    const NodeMask mask{true, false};
    const double before = masked_cross_entropy(p, labels, mask).loss;
    p(1, 0) = 0.4;
    p(1, 1) = 0.6;
    EXPECT_EQ(masked_cross_entropy(p, labels, mask).loss, before);
}

TEST(MaskedCrossEntropy, ClampsZeroProbability) {
    const auto out = masked_cross_entropy(DenseMatrix{{1.0, 0.0}}, std::vector<ClassId>{1}, NodeMask{true});
    EXPECT_NEAR(out.loss, -std::log(kLogClamp), 1e-9);
    EXPECT_TRUE(out.gradient.all_finite());
}

TEST(MaskedCrossEntropy, Errors) {
    const DenseMatrix p{{0.5, 0.5}};
    EXPECT_THROW(masked_cross_entropy(p, std::vector<ClassId>{0}, NodeMask{false}), PreconditionError);
    EXPECT_THROW(masked_cross_entropy(p, std::vector<ClassId>{0, 1}, NodeMask{true}), ShapeError);
    EXPECT_THROW(masked_cross_entropy(p, std::vector<ClassId>{kUnlabeled}, NodeMask{true}), PreconditionError);
}

TEST(MaskedCrossEntropyProperty, PermutationEquivariant) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng() % 6, c = 2 + rng() % 3;
        const DenseMatrix p = row_softmax(random_matrix(n, c, rng));
        std::vector<ClassId> labels(n);
        NodeMask mask(n);
        for (std::size_t v = 0; v < n; ++v) {
            labels[v] = static_cast<ClassId>(rng() % c);
            mask[v] = rng() % 4 != 0;
        }
        mask[0] = true;
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        DenseMatrix pp(n, c);
        std::vector<ClassId> lp(n);
        NodeMask mp(n);
        for (std::size_t v = 0; v < n; ++v) {
            for (std::size_t j = 0; j < c; ++j) pp(v, j) = p(perm[v], j);
            lp[v] = labels[perm[v]];
            mp[v] = mask[perm[v]];
        }
        const auto a = masked_cross_entropy(p, labels, mask);
        const auto b = masked_cross_entropy(pp, lp, mp);
        EXPECT_NEAR(a.loss, b.loss, 1e-12);
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t j = 0; j < c; ++j) EXPECT_EQ(b.gradient(v, j), a.gradient(perm[v], j));
    }
}

TEST(MaxPool, SingleInputIsIdentity) {
    const DenseMatrix h{{1, -2}, {3, 4}};
    const DenseMatrix in[] = {h};
    const auto out = maxpool_stack(in);
    EXPECT_EQ(out.pooled, h);
    EXPECT_EQ(maxpool_backward(out, h, 1).front(), h);
}

TEST(MaxPool, HandExampleAndRouting) {
    const DenseMatrix in[] = {DenseMatrix{{1, 5}}, DenseMatrix{{3, 2}}};
    const auto out = maxpool_stack(in);
    EXPECT_EQ(out.pooled, (DenseMatrix{{3, 5}}));
    EXPECT_EQ(out.argmax, (std::vector<std::uint32_t>{1, 0}));
    const auto grads = maxpool_backward(out, DenseMatrix{{1, 1}}, 2);
    EXPECT_EQ(grads[0], (DenseMatrix{{0, 1}}));
    EXPECT_EQ(grads[1], (DenseMatrix{{1, 0}}));
}

TEST(MaxPool, TiesGoToLowestLayer) {
    const DenseMatrix in[] = {DenseMatrix{{2, 0}}, DenseMatrix{{2, 1}}, DenseMatrix{{2, 1}}};
    const auto out = maxpool_stack(in);
    EXPECT_EQ(out.argmax, (std::vector<std::uint32_t>{0, 1}));
}

TEST(MaxPool, Errors) {
    EXPECT_THROW(maxpool_stack(std::span<const DenseMatrix>{}), PreconditionError);
    const DenseMatrix in[] = {DenseMatrix(1, 2), DenseMatrix(2, 1)};
    EXPECT_THROW(maxpool_stack(in), ShapeError);
}

TEST(MaxPoolProperty, GradientRoutesEachEntryExactlyOnce) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t k = 1 + rng() % 4, r = 1 + rng() % 5, c = 1 + rng() % 5;
        std::vector<DenseMatrix> in;
        for (std::size_t i = 0; i < k; ++i) in.push_back(random_matrix(r, c, rng));
        const auto out = maxpool_stack(in);
        const DenseMatrix up = random_matrix(r, c, rng);
        const auto grads = maxpool_backward(out, up, k);
        for (std::size_t e = 0; e < r * c; ++e) {
            double sum = 0.0;
            int nonzero = 0;
            for (const auto& g : grads) {
                sum += g.values()[e];
                nonzero += g.values()[e] != 0.0 ? 1 : 0;
            }
            EXPECT_EQ(sum, up.values()[e]);
            EXPECT_LE(nonzero, 1);
            EXPECT_EQ(out.pooled.values()[e], in[out.argmax[e]].values()[e]);
        }
    }
}

TEST(RowArgmax, TiesToLowestColumn) {
    EXPECT_EQ(row_argmax(DenseMatrix{{0.2, 0.4, 0.4}, {1, 1, 0}}), (std::vector<ClassId>{1, 0}));
}

TEST(MaskedAccuracy, CountsMaskedRowsOnly) {
    const DenseMatrix p{{0.9, 0.1}, {0.2, 0.8}, {0.6, 0.4}};
    EXPECT_DOUBLE_EQ(masked_accuracy(p, std::vector<ClassId>{0, 0, 0}, NodeMask{true, true, false}), 0.5);
    EXPECT_THROW(masked_accuracy(p, std::vector<ClassId>{0, 0, 0}, NodeMask{false, false, false}), PreconditionError);
}

TEST(DropoutMask, ZeroRateIsAllOnes) {
    std::mt19937_64 rng(1);
    EXPECT_EQ(dropout_mask(3, 4, 0.0, rng), DenseMatrix(3, 4, 1.0));
}

TEST(DropoutMask, KeptFractionAndScale) {
    std::mt19937_64 rng(2);
    const DenseMatrix m = dropout_mask(100, 100, 0.5, rng);
    std::size_t kept = 0;
    for (double v : m.values()) {
        ASSERT_TRUE(v == 0.0 || v == 2.0);
        kept += v != 0.0 ? 1 : 0;
    }
    EXPECT_NEAR(static_cast<double>(kept) / 10000.0, 0.5, 0.05);
}

TEST(DropoutMask, DeterministicAndValidated) {
    std::mt19937_64 a(9), b(9);
    EXPECT_EQ(dropout_mask(7, 5, 0.3, a), dropout_mask(7, 5, 0.3, b));
    EXPECT_THROW(dropout_mask(2, 2, 1.0, a), PreconditionError);
    EXPECT_THROW(dropout_mask(2, 2, -0.1, a), PreconditionError);
}
