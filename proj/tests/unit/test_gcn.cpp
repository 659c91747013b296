#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lwgnn/error.hpp"
#include "lwgnn/gcn.hpp"
#include "lwgnn/graph.hpp"

using namespace lwgnn;

namespace {

DenseMatrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    DenseMatrix m(r, c);
    for (double& v : m.values()) v = nd(rng);
    return m;
}

GcnModel small_gcn(std::size_t d, std::size_t c, std::size_t layers, std::mt19937_64& rng) {
    GcnConfig cfg;
    cfg.input_dim = d;
    cfg.num_classes = c;
    cfg.layers = layers;
    cfg.hidden = 5;
    return make_gcn(cfg, rng);
}

}  // namespace

TEST(MakeGcn, ShapesAndErrors) {
    std::mt19937_64 rng(0);
    const GcnModel m = small_gcn(4, 3, 3, rng);
    EXPECT_EQ(m.params.value("gcn.W0").rows(), 4u);
    EXPECT_EQ(m.params.value("gcn.W1").cols(), 5u);
    EXPECT_EQ(m.params.value("gcn.W2").cols(), 3u);
    GcnConfig bad;
    bad.layers = 0;
    EXPECT_THROW(make_gcn(bad, rng), PreconditionError);
}

TEST(GcnForward, EdgelessGraphIsABiasFreeMlp) {
    std::mt19937_64 rng(1);
    const std::size_t n = 5, d = 3, c = 2;
    const DenseMatrix x = random_matrix(n, d, rng);
    const Graph g(n, c, std::span<const Graph::Edge>{}, x);
    const GcnModel m = small_gcn(d, c, 2, rng);
    const auto fwd = gcn_forward(normalized_adjacency(g), x, m);
    const DenseMatrix& w0 = m.params.value("gcn.W0");
    const DenseMatrix& w1 = m.params.value("gcn.W1");
    for (std::size_t v = 0; v < n; ++v) {
        std::vector<double> hidden(5, 0.0), logit(c, 0.0);
        for (std::size_t a = 0; a < 5; ++a) {
            for (std::size_t j = 0; j < d; ++j) hidden[a] += x(v, j) * w0(j, a);
            hidden[a] = std::max(hidden[a], 0.0);
        }
        for (std::size_t i = 0; i < c; ++i)
            for (std::size_t a = 0; a < 5; ++a) logit[i] += hidden[a] * w1(a, i);
        const double p0 = 1.0 / (1.0 + std::exp(logit[1] - logit[0]));
        EXPECT_NEAR(fwd.probs(v, 0), p0, 1e-12);
    }
}

TEST(GcnForward, ShapeMismatchThrows) {
    std::mt19937_64 rng(2);
    const GcnModel m = small_gcn(3, 2, 2, rng);
    EXPECT_THROW(gcn_forward(SparseMatrix::identity(4), DenseMatrix(5, 3), m), ShapeError);
}

TEST(GcnForwardProperty, PermutationEquivariant) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 3 + rng() % 8, d = 2 + rng() % 3;
        std::vector<Graph::Edge> edges;
        for (std::uint32_t v = 0; v < n; ++v)
            for (std::uint32_t u = v + 1; u < n; ++u)
                if (rng() % 3 == 0) edges.emplace_back(v, u);
        const DenseMatrix x = random_matrix(n, d, rng);
        std::vector<std::uint32_t> perm(n), inverse(n);
        std::iota(perm.begin(), perm.end(), 0u);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::uint32_t v = 0; v < n; ++v) inverse[perm[v]] = v;
        std::vector<Graph::Edge> pe;
        for (auto [a, b] : edges) pe.emplace_back(inverse[a], inverse[b]);
        DenseMatrix px(n, d);
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t j = 0; j < d; ++j) px(v, j) = x(perm[v], j);
        const GcnModel m = small_gcn(d, 3, 1 + trial % 3, rng);
        const auto a = gcn_forward(normalized_adjacency(Graph(n, 3, edges, x)), x, m).probs;
        const auto b = gcn_forward(normalized_adjacency(Graph(n, 3, pe, px)), px, m).probs;
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(b(v, i), a(perm[v], i), 1e-12);
    }
}

TEST(GcnForward, DropoutOnlyInTrainingPasses) {
    std::mt19937_64 rng(4);
    const DenseMatrix x = random_matrix(6, 3, rng);
    const SparseMatrix a = SparseMatrix::identity(6);
    const GcnModel m = small_gcn(3, 2, 2, rng);
    EXPECT_TRUE(gcn_forward(a, x, m).masks.empty());
    std::mt19937_64 r1(5), r2(5);
    const auto t1 = gcn_forward(a, x, m, &r1);
    EXPECT_EQ(t1.masks.size(), 2u);
    EXPECT_EQ(t1.probs, gcn_forward(a, x, m, &r2).probs);
}

TEST(GcnWeightDecay, FirstLayerOnly) {
    std::mt19937_64 rng(6);
    GcnModel m = small_gcn(3, 2, 2, rng);
    double sq = 0.0;
    for (double v : m.params.value("gcn.W0").values()) sq += v * v;
    EXPECT_NEAR(gcn_weight_decay(m, true), 0.5 * 5e-4 * sq, 1e-16);
    EXPECT_NEAR(m.params.gradient("gcn.W0")(1, 2), 5e-4 * m.params.value("gcn.W0")(1, 2), 1e-18);
    EXPECT_EQ(m.params.gradient("gcn.W1"), DenseMatrix(5, 2));
    m.config.weight_decay = 0.0;
    EXPECT_EQ(gcn_weight_decay(m, false), 0.0);
}

TEST(GcnForward, LastHiddenFeedsTheOutputLayer) {
    std::mt19937_64 rng(7);
    const DenseMatrix x = random_matrix(4, 3, rng);
    const GcnModel two = small_gcn(3, 2, 2, rng);
    const auto f2 = gcn_forward(SparseMatrix::identity(4), x, two);
    EXPECT_EQ(&f2.last_hidden(), &f2.hidden.back());
    const GcnModel one = small_gcn(3, 2, 1, rng);
    const auto f1 = gcn_forward(SparseMatrix::identity(4), x, one);
    EXPECT_EQ(&f1.last_hidden(), &f1.pre.back());
}
