#include "lwgnn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "lwgnn/error.hpp"

namespace lwgnn {
namespace {

std::uint64_t pair_count(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

}  // namespace

Graph generate_synthetic(const SyntheticSpec& spec) {
    const std::size_t n = spec.num_nodes;
    const std::size_t c = spec.num_classes;
    if (c == 0 || c > n) throw PreconditionError("generate_synthetic: need 1 <= num_classes <= num_nodes");
    if (!(spec.target_homophily >= 0.0 && spec.target_homophily <= 1.0)) {
        throw PreconditionError("generate_synthetic: target_homophily must lie in [0, 1]");
    }
    if (!(spec.avg_degree > 0.0)) throw PreconditionError("generate_synthetic: avg_degree must be positive");
    if (!(spec.noise_scale > 0.0)) throw PreconditionError("generate_synthetic: noise_scale must be positive");
    if (spec.class_center_separation < 0.0) throw PreconditionError("generate_synthetic: negative separation");
    if (spec.feature_dim < c) throw PreconditionError("generate_synthetic: feature_dim must be >= num_classes");

    const auto num_edges = static_cast<std::uint64_t>(std::floor(spec.avg_degree * static_cast<double>(n) / 2.0));
    if (num_edges > pair_count(n)) {
        throw PreconditionError("generate_synthetic: " + std::to_string(num_edges) + " edges exceed the " +
                                std::to_string(pair_count(n)) + " available node pairs");
    }

    std::mt19937_64 rng(spec.seed);

    Labels labels(n);
    for (std::size_t v = 0; v < n; ++v) labels[v] = static_cast<ClassId>(v % c);
    std::shuffle(labels.begin(), labels.end(), rng);
    std::vector<std::vector<std::uint32_t>> members(c);
    for (std::uint32_t v = 0; v < n; ++v) members[static_cast<std::size_t>(labels[v])].push_back(v);

    std::vector<double> intra_weights(c);
    std::uint64_t intra_pairs = 0;
    for (std::size_t k = 0; k < c; ++k) {
        intra_weights[k] = static_cast<double>(pair_count(members[k].size()));
        intra_pairs += pair_count(members[k].size());
    }
    const std::uint64_t cross_pairs = pair_count(n) - intra_pairs;

    std::bernoulli_distribution intra_coin(spec.target_homophily);
    std::vector<bool> edge_is_intra(num_edges);
    std::uint64_t intra_edges = 0;
    for (std::uint64_t e = 0; e < num_edges; ++e) {
        edge_is_intra[e] = intra_coin(rng);
        intra_edges += edge_is_intra[e] ? 1 : 0;
    }
    if (intra_edges > intra_pairs || num_edges - intra_edges > cross_pairs) {
        throw PreconditionError("generate_synthetic: infeasible edge count for the requested homophily");
    }

    std::discrete_distribution<std::size_t> pick_class(intra_weights.begin(), intra_weights.end());
    std::uniform_int_distribution<std::uint32_t> pick_node(0, static_cast<std::uint32_t>(n - 1));
    std::set<Graph::Edge> chosen;
    std::vector<Graph::Edge> edges;
    edges.reserve(num_edges);
    for (std::uint64_t e = 0; e < num_edges; ++e) {
        Graph::Edge candidate;
        do {
            std::uint32_t a = 0;
            std::uint32_t b = 0;
            if (edge_is_intra[e]) {
                const auto& pool = members[pick_class(rng)];
                std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
                do {
                    a = pool[pick(rng)];
                    b = pool[pick(rng)];
                } while (a == b);
            } else {
                do {
                    a = pick_node(rng);
                    b = pick_node(rng);
                } while (labels[a] == labels[b]);
            }
            candidate = {std::min(a, b), std::max(a, b)};
        } while (chosen.count(candidate) != 0);
        chosen.insert(candidate);
        edges.push_back(candidate);
    }

    DenseMatrix features(n, spec.feature_dim);
    std::normal_distribution<double> noise(0.0, spec.noise_scale);
    for (std::size_t v = 0; v < n; ++v) {
        auto row = features.row(v);
        for (double& x : row) x = noise(rng);
        row[static_cast<std::size_t>(labels[v])] += spec.class_center_separation;
    }

    return Graph(n, c, edges, std::move(features), std::move(labels));
}

SyntheticSpec benchmark_spec(double target_homophily, std::size_t num_nodes, std::size_t num_classes,
                             std::uint64_t seed) {
    SyntheticSpec spec;
    spec.num_nodes = num_nodes;
    spec.num_classes = num_classes;
    spec.target_homophily = target_homophily;
    spec.avg_degree = 6.0;
    spec.feature_dim = num_classes;
    spec.class_center_separation = 4.0;
    spec.noise_scale = 1.2;
    spec.seed = seed;
    return spec;
}

Graph benchmark_graph(const SyntheticSpec& spec) {
    Graph g = generate_synthetic(spec);
    const auto val = static_cast<std::size_t>(std::llround(kBenchmarkValFraction * static_cast<double>(spec.num_nodes)));
    return g.with_masks(split_nodes(g, kBenchmarkTrainPerClass, val, spec.seed));
}

}  // namespace lwgnn
