#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lwgnn/error.hpp"
#include "lwgnn/ops.hpp"
#include "lwgnn/pseudo_label.hpp"
#include "lwgnn/synthetic.hpp"

using namespace lwgnn;

namespace {

Graph separable_graph(std::uint64_t seed) {
    SyntheticSpec s;
    s.num_nodes = 300;
    s.num_classes = 3;
    s.feature_dim = 4;
    s.class_center_separation = 8.0;
    s.noise_scale = 0.5;
    s.target_homophily = 0.3;
    s.seed = seed;
    const Graph g = generate_synthetic(s);
    return g.with_masks(split_nodes(g, 20, 60, seed));
}

Graph two_node_graph(Labels labels, SplitMasks masks) {
    return Graph(2, 2, std::vector<Graph::Edge>{{0, 1}}, DenseMatrix(2, 2), std::move(labels), std::move(masks));
}

}  // namespace

TEST(MlpForward, ZeroParametersGiveUniformRows) {
    std::mt19937_64 rng(0);
    MlpModel m = make_mlp(3, 5, 4, rng);
    for (auto& [name, p] : m.params) p.value.fill(0.0);
    const auto acts = mlp_forward(DenseMatrix{{1, 2, 3}, {-1, 0, 4}}, m.params);
    ASSERT_EQ(acts.probs.rows(), 2u);
    ASSERT_EQ(acts.probs.cols(), 4u);
    for (double v : acts.probs.values()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(MlpForward, HandEvaluatedSingleNode) {
    std::mt19937_64 rng(0);
    MlpModel m = make_mlp(1, 2, 2, rng);
    m.params.value("mlp.W1") = DenseMatrix{{0.5, -0.3}};
    m.params.value("mlp.b1") = DenseMatrix{{0.1, 0.2}};
    m.params.value("mlp.W2") = DenseMatrix{{0.4, -0.2}, {0.7, 0.1}};
    m.params.value("mlp.b2") = DenseMatrix{{0.0, 0.05}};
    const auto acts = mlp_forward(DenseMatrix{{2.0}}, m.params);
    // hidden = relu([1.1, -0.4]) = [1.1, 0]; logits = [0.44, -0.17]
    const double z0 = 0.44, z1 = -0.22 + 0.05;
    const double p0 = std::exp(z0) / (std::exp(z0) + std::exp(z1));
    EXPECT_NEAR(acts.hidden(0, 0), 1.1, 1e-15);
    EXPECT_EQ(acts.hidden(0, 1), 0.0);
    EXPECT_NEAR(acts.probs(0, 0), p0, 1e-14);
    EXPECT_NEAR(acts.probs(0, 1), 1.0 - p0, 1e-14);
}

TEST(MlpForward, ShapeMismatchThrows) {
    std::mt19937_64 rng(0);
    const MlpModel m = make_mlp(3, 4, 2, rng);
    EXPECT_THROW(mlp_forward(DenseMatrix(2, 5), m.params), ShapeError);
}

TEST(MlpForwardProperty, RowsAreIndependent) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    const MlpModel m = make_mlp(4, 8, 3, rng);
    for (int trial = 0; trial < 20; ++trial) {
        DenseMatrix x(6, 4);
        for (double& v : x.values()) v = nd(rng);
        const DenseMatrix before = mlp_forward(x, m.params).probs;
        for (std::size_t j = 0; j < 4; ++j) x(5, j) = nd(rng) * 10.0;
        const DenseMatrix after = mlp_forward(x, m.params).probs;
        for (std::size_t r = 0; r < 5; ++r)
            for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(after(r, j), before(r, j));
    }
}

TEST(TrainPseudoPredictor, SeparableFeaturesAreFitWithin200Epochs) {
    const Graph g = separable_graph(5);
    PseudoTrainConfig cfg;
    cfg.max_epochs = 200;
    cfg.patience = 200;
    cfg.seed = 1;
    const auto result = train_pseudo_predictor(g, cfg);
    const DenseMatrix probs = mlp_forward(g.features(), result.model.params).probs;
    EXPECT_GE(masked_accuracy(probs, g.labels(), g.train_mask()), 0.99);
    EXPECT_LE(result.train_loss.size(), 200u);
    EXPECT_LT(result.train_loss.back(), result.train_loss.front());
}

TEST(TrainPseudoPredictor, DeterministicUnderSeed) {
    const Graph g = separable_graph(6);
    PseudoTrainConfig cfg;
    cfg.max_epochs = 60;
    cfg.seed = 11;
    const auto a = train_pseudo_predictor(g, cfg);
    const auto b = train_pseudo_predictor(g, cfg);
    EXPECT_EQ(a.model.params.value("mlp.W1"), b.model.params.value("mlp.W1"));
    EXPECT_EQ(a.model.params.value("mlp.W2"), b.model.params.value("mlp.W2"));
    EXPECT_EQ(a.train_loss, b.train_loss);
    EXPECT_EQ(a.best_epoch, b.best_epoch);
}

TEST(TrainPseudoPredictor, EmptyTrainMaskThrows) {
    const Graph g = separable_graph(1);
    const Graph bare = g.with_masks(SplitMasks{NodeMask(g.num_nodes(), false), g.val_mask(), g.test_mask()});
    EXPECT_THROW(train_pseudo_predictor(bare, PseudoTrainConfig{}), PreconditionError);
}

TEST(TrainPseudoPredictorProperty, LossDecreasesOnLearnableInstances) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        PseudoTrainConfig cfg;
        cfg.max_epochs = 50;
        cfg.patience = 50;
        cfg.seed = seed;
        const auto r = train_pseudo_predictor(separable_graph(seed + 20), cfg);
        EXPECT_LT(r.train_loss.back(), r.train_loss.front());
    }
}

TEST(AssignLabels, GroundTruthWinsOnLabeledNodes) {
    const Graph g = two_node_graph({1, 0}, SplitMasks{{true, false}, {false, false}, {false, true}});
    const auto a = assign_labels(g, DenseMatrix{{0.9, 0.1}, {0.2, 0.8}});
    EXPECT_EQ(a.labels, (std::vector<ClassId>{1, 1}));
    EXPECT_EQ(a.source[0], LabelSource::GroundTruth);
    EXPECT_EQ(a.source[1], LabelSource::Predicted);
}

TEST(AssignLabels, ArgmaxAndTieBreak) {
    const Graph g3(2, 3, std::vector<Graph::Edge>{{0, 1}}, DenseMatrix(2, 3), Labels{0, 2},
                   SplitMasks{{false, true}, {false, false}, {true, false}});
    EXPECT_EQ(assign_labels(g3, DenseMatrix{{0.1, 0.7, 0.2}, {0.3, 0.3, 0.4}}).labels[0], 1);
    const Graph g = two_node_graph({1, 1}, SplitMasks{{false, true}, {false, false}, {true, false}});
    EXPECT_EQ(assign_labels(g, DenseMatrix{{0.5, 0.5}, {0.5, 0.5}}).labels[0], 0);
}

TEST(AssignLabels, ValidationNodesOptional) {
    const Graph g = two_node_graph({1, 1}, SplitMasks{{true, false}, {false, true}, {false, false}});
    const DenseMatrix p{{0.9, 0.1}, {0.9, 0.1}};
    EXPECT_EQ(assign_labels(g, p, true).labels[1], 1);
    EXPECT_EQ(assign_labels(g, p, false).labels[1], 0);
    EXPECT_THROW(assign_labels(g, DenseMatrix(3, 2)), ShapeError);
}

TEST(AssignLabelsProperty, LabeledNodesNeverChange) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const Graph g = separable_graph(100 + trial);
        DenseMatrix logits(g.num_nodes(), g.num_classes());
        std::normal_distribution<double> nd;
        for (double& v : logits.values()) v = nd(rng);
        const auto a = assign_labels(g, row_softmax(logits));
        for (std::size_t v = 0; v < g.num_nodes(); ++v) {
            if (g.train_mask()[v] || g.val_mask()[v]) {
                EXPECT_EQ(a.labels[v], g.labels()[v]);
                EXPECT_EQ(a.source[v], LabelSource::GroundTruth);
            }
        }
    }
}
