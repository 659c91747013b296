#pragma once

#include <cstddef>
#include <cstdint>

#include "lwgnn/graph.hpp"

namespace lwgnn {

// Planted-partition graph with controllable edge homophily and Gaussian class clusters.
struct SyntheticSpec {
    std::size_t num_nodes = 1000;
    std::size_t num_classes = 5;
    double target_homophily = 0.5;
    double avg_degree = 5.0;
    std::size_t feature_dim = 16;
    double class_center_separation = 1.0;
    double noise_scale = 1.0;
    std::uint64_t seed = 0;
};

// Class sizes are balanced (shuffled round-robin). Each of floor(avg_degree * N / 2) edges is
// intra-class with probability target_homophily, and is drawn uniformly from the chosen pair type.
// Features are separation * e_class + N(0, noise_scale^2) per coordinate. Masks are left empty.
Graph generate_synthetic(const SyntheticSpec& spec);

// Benchmark graph used by the CLI defaults and the acceptance suite: feature_dim = num_classes,
// separation 4, noise 1.2, average degree 6.
SyntheticSpec benchmark_spec(double target_homophily, std::size_t num_nodes = 1000, std::size_t num_classes = 5,
                             std::uint64_t seed = 0);

inline constexpr std::size_t kBenchmarkTrainPerClass = 20;
inline constexpr double kBenchmarkValFraction = 0.3;

// generate_synthetic(spec) split with 20 training nodes per class and 30% of the nodes for
// validation, using spec.seed for the split.
Graph benchmark_graph(const SyntheticSpec& spec);

}  // namespace lwgnn
