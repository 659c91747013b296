#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "lwgnn/error.hpp"
#include "lwgnn/graph.hpp"
#include "lwgnn/graph_io.hpp"
#include "support/oracles.hpp"

using namespace lwgnn;
using namespace lwgnn::oracle;

namespace {

using Edge = Graph::Edge;

Graph make_graph(std::size_t n, std::size_t c, std::vector<Edge> edges, Labels labels = {}) {
    return Graph(n, c, edges, DenseMatrix(n, 1, 1.0), std::move(labels));
}

}  // namespace

TEST(Graph, MinimalGraph) {
    const Graph g = make_graph(2, 2, {{0, 1}}, {0, 1});
    EXPECT_EQ(g.num_edges(), 1u);
    EXPECT_EQ(g.degree(0), 1u);
    EXPECT_EQ(g.neighbors(1)[0], 0u);
    EXPECT_EQ(g.edge_list(), (std::vector<Edge>{{0, 1}}));
}

TEST(Graph, DropsSelfLoopsAndDuplicates) {
    const Graph g = make_graph(3, 1, {{0, 0}, {0, 1}, {1, 0}, {0, 1}, {2, 1}});
    EXPECT_EQ(g.self_loops_dropped(), 1u);
    EXPECT_EQ(g.num_edges(), 2u);
    EXPECT_EQ(g.degree(1), 2u);
}

TEST(Graph, ConsistencyErrors) {
    EXPECT_THROW(Graph(2, 2, std::vector<Edge>{{0, 2}}, DenseMatrix(2, 1)), ConsistencyError);
    EXPECT_THROW(Graph(2, 2, std::vector<Edge>{}, DenseMatrix(3, 1)), ConsistencyError);
    EXPECT_THROW(Graph(2, 2, std::vector<Edge>{}, DenseMatrix(2, 1), Labels{0, 2}), ConsistencyError);
    SplitMasks overlapping{{true, false}, {true, false}, {false, true}};
    EXPECT_THROW(Graph(2, 2, std::vector<Edge>{}, DenseMatrix(2, 1), Labels{0, 1}, overlapping), ConsistencyError);
    SplitMasks unlabeled_train{{true, false}, {false, false}, {false, false}};
    EXPECT_THROW(Graph(2, 2, std::vector<Edge>{}, DenseMatrix(2, 1), Labels{kUnlabeled, 1}, unlabeled_train),
                 ConsistencyError);
}

TEST(GraphProperty, AdjacencySymmetricWithoutSelfLoops) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const RandomLabeled r = random_labeled(rng);
        const Graph g = make_graph(r.n, 4, r.edges);
        for (std::size_t v = 0; v < g.num_nodes(); ++v) {
            auto nb = g.neighbors(v);
            EXPECT_TRUE(std::is_sorted(nb.begin(), nb.end()));
            for (std::uint32_t u : nb) {
                EXPECT_NE(u, v);
                auto back = g.neighbors(u);
                EXPECT_TRUE(std::binary_search(back.begin(), back.end(), static_cast<std::uint32_t>(v)));
            }
        }
    }
}

TEST(HomophilyRatio, Examples) {
    EXPECT_DOUBLE_EQ(homophily_ratio(make_graph(3, 1, {{0, 1}, {1, 2}, {0, 2}}, {0, 0, 0}), Labels{0, 0, 0}), 1.0);
    const Graph k22 = make_graph(4, 2, {{0, 2}, {0, 3}, {1, 2}, {1, 3}});
    EXPECT_DOUBLE_EQ(homophily_ratio(k22, Labels{0, 0, 1, 1}), 0.0);
    const Graph path = make_graph(5, 2, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    EXPECT_DOUBLE_EQ(homophily_ratio(path, Labels{0, 0, 1, 1, 0}), 0.5);
}

TEST(HomophilyRatio, Errors) {
    EXPECT_THROW(homophily_ratio(make_graph(3, 1, {}), Labels{0, 0, 0}), PreconditionError);
    EXPECT_THROW(homophily_ratio(make_graph(2, 1, {{0, 1}}), Labels{0, kUnlabeled}), PreconditionError);
    EXPECT_THROW(homophily_ratio(make_graph(2, 1, {{0, 1}}), Labels{0}), PreconditionError);
}

TEST(HomophilyRatioProperty, MatchesBruteForceScanExactly) {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
        const RandomLabeled r = random_labeled(rng);
        ASSERT_LE(r.n, 30u);
        const Graph g = make_graph(r.n, 4, r.edges);
        EXPECT_EQ(homophily_ratio(g, r.labels), brute_force_homophily(r)) << "trial " << trial;
    }
}

TEST(NormalizedAdjacency, EdgelessIsIdentity) {
    EXPECT_EQ(normalized_adjacency(make_graph(4, 1, {})).to_dense(), DenseMatrix::identity(4));
}

TEST(NormalizedAdjacency, SingleEdge) {
    EXPECT_LE(max_abs_difference(normalized_adjacency(make_graph(2, 1, {{0, 1}})).to_dense(), DenseMatrix(2, 2, 0.5)),
              1e-15);
}

TEST(NormalizedAdjacency, Star) {
    const SparseMatrix a = normalized_adjacency(make_graph(4, 1, {{0, 1}, {0, 2}, {0, 3}}));
    EXPECT_NEAR(a.at(0, 0), 0.25, 1e-15);
    for (int leaf = 1; leaf <= 3; ++leaf) {
        EXPECT_NEAR(a.at(0, leaf), 1.0 / std::sqrt(8.0), 1e-15);
        EXPECT_NEAR(a.at(leaf, 0), 1.0 / std::sqrt(8.0), 1e-15);
        EXPECT_NEAR(a.at(leaf, leaf), 0.5, 1e-15);
    }
}

TEST(NormalizedAdjacencyProperty, ScaledRowSumIdentity) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const RandomLabeled r = random_labeled(rng);
        const Graph g = make_graph(r.n, 4, r.edges);
        const SparseMatrix a = normalized_adjacency(g);
        EXPECT_EQ(a.transposed(), a);
        for (std::size_t v = 0; v < g.num_nodes(); ++v) {
            double s = 0.0;
            for (std::size_t k = a.row_offsets()[v]; k < a.row_offsets()[v + 1]; ++k) {
                s += a.values()[k] * std::sqrt(static_cast<double>(g.degree(a.col_indices()[k]) + 1));
            }
            EXPECT_NEAR(s, std::sqrt(static_cast<double>(g.degree(v) + 1)), 1e-12);
        }
    }
}

TEST(SplitNodes, CountsDeterminismAndErrors) {
    Labels labels;
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 10; ++i) labels.push_back(c);
    const Graph g = make_graph(30, 3, {{0, 1}}, labels);
    const SplitMasks m = split_nodes(g, 2, 5, 42);
    EXPECT_EQ(mask_count(m.train), 6u);
    EXPECT_EQ(mask_count(m.val), 5u);
    EXPECT_EQ(mask_count(m.test), 19u);
    for (int c = 0; c < 3; ++c) {
        std::size_t per = 0;
        for (std::size_t v = 0; v < 30; ++v) per += (m.train[v] && labels[v] == c) ? 1 : 0;
        EXPECT_EQ(per, 2u);
    }
    for (std::size_t v = 0; v < 30; ++v) EXPECT_EQ(int(m.train[v]) + int(m.val[v]) + int(m.test[v]), 1);
    EXPECT_EQ(split_nodes(g, 2, 5, 42), m);
    EXPECT_NE(split_nodes(g, 2, 5, 43), m);
    EXPECT_THROW(split_nodes(g, 11, 0, 1), PreconditionError);
    EXPECT_THROW(split_nodes(g, 5, 20, 1), PreconditionError);
    EXPECT_NO_THROW(g.with_masks(m));
}

TEST(GraphIo, MinimalDocument) {
    const Graph g = parse_graph_json(R"({"num_nodes": 2, "num_classes": 2, "edges": [[0, 1]],
                                         "features": [[0.5], [1.5]], "labels": [0, 1]})");
    EXPECT_EQ(g.num_edges(), 1u);
    EXPECT_EQ(g.neighbors(0).size(), 1u);
    EXPECT_EQ(g.neighbors(1).size(), 1u);
    EXPECT_DOUBLE_EQ(g.features()(1, 0), 1.5);
}

TEST(GraphIo, SelfLoopDroppedAndCounted) {
    const Graph g = parse_graph_json(R"({"num_nodes": 2, "num_classes": 1, "edges": [[0, 0], [0, 1]],
                                         "features": [[0], [0]], "labels": [0, 0]})");
    EXPECT_EQ(g.self_loops_dropped(), 1u);
    EXPECT_EQ(g.num_edges(), 1u);
}

TEST(GraphIo, DuplicateEdgeStoredOncePerDirection) {
    const Graph g = parse_graph_json(R"({"num_nodes": 2, "num_classes": 1, "edges": [[0, 1], [0, 1], [1, 0]],
                                         "features": [[0], [0]]})");
    EXPECT_EQ(g.neighbor_indices().size(), 2u);
    EXPECT_FALSE(g.has_labels());
}

TEST(GraphIo, Errors) {
    EXPECT_THROW(parse_graph_json("{"), ParseError);
    EXPECT_THROW(parse_graph_json("[]"), ParseError);
    EXPECT_THROW(parse_graph_json(R"({"num_classes": 1, "edges": [], "features": []})"), ParseError);
    EXPECT_THROW(parse_graph_json(R"({"num_nodes": 1, "num_classes": 1, "edges": [[0]], "features": [[0]]})"),
                 ParseError);
    EXPECT_THROW(parse_graph_json(R"({"num_nodes": 2, "num_classes": 1, "edges": [], "features": [[0]]})"),
                 ConsistencyError);
    EXPECT_THROW(parse_graph_json(R"({"num_nodes": 1, "num_classes": 2, "edges": [], "features": [[0]],
                                      "labels": [2]})"),
                 ConsistencyError);
    EXPECT_THROW(parse_graph_json(R"({"num_nodes": 1, "num_classes": 1, "edges": [[0, 3]], "features": [[0]]})"),
                 ConsistencyError);
    EXPECT_THROW(load_graph("/nonexistent/graph.json"), DataError);
}

TEST(GraphIoProperty, SaveLoadRoundTrip) {
    std::mt19937_64 rng(5);
    const auto dir = std::filesystem::temp_directory_path() / "lwgnn_graph_io_test";
    std::filesystem::create_directories(dir);
    for (int trial = 0; trial < 20; ++trial) {
        const RandomLabeled r = random_labeled(rng);
        std::uniform_real_distribution<double> d(-3.0, 3.0);
        DenseMatrix x(r.n, 3);
        for (double& v : x.values()) v = d(rng);
        Labels labels = r.labels;
        labels[r.n - 1] = kUnlabeled;
        const Graph g(r.n, 4, r.edges, x, labels);
        const Graph back = parse_graph_json(graph_to_json(g));
        EXPECT_EQ(back.row_offsets(), g.row_offsets());
        EXPECT_EQ(back.neighbor_indices(), g.neighbor_indices());
        EXPECT_EQ(back.features(), g.features());
        EXPECT_EQ(back.labels(), g.labels());
        save_graph(g, dir / "g.json");
        EXPECT_EQ(load_graph(dir / "g.json").features(), g.features());
    }
    std::filesystem::remove_all(dir);
}

TEST(GraphIo, MasksRoundTrip) {
    Labels labels{0, 1, 0, 1};
    const Graph g = make_graph(4, 2, {{0, 1}, {2, 3}}, labels)
                        .with_masks({{true, true, false, false}, {false, false, true, false}, {false, false, false, true}});
    const Graph back = parse_graph_json(graph_to_json(g));
    EXPECT_EQ(back.masks(), g.masks());
}
