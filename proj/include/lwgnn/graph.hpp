#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lwgnn/dense.hpp"
#include "lwgnn/sparse.hpp"
#include "lwgnn/types.hpp"

namespace lwgnn {

struct SplitMasks {
    NodeMask train;
    NodeMask val;
    NodeMask test;

    friend bool operator==(const SplitMasks&, const SplitMasks&) = default;
};

// Undirected attributed graph with symmetric CSR adjacency and no stored self-loops.
// Immutable once constructed.
class Graph {
public:
    using Edge = std::pair<std::uint32_t, std::uint32_t>;

    Graph() = default;
    // Builds a graph from an edge list. Edges are symmetrized and de-duplicated, self-loops dropped.
    // `labels` may be empty (no labels) or hold one entry per node with kUnlabeled for unknown.
    // Throws ConsistencyError when the pieces disagree.
    Graph(std::size_t num_nodes, std::size_t num_classes, std::span<const Edge> edges, DenseMatrix features,
          Labels labels = {}, std::optional<SplitMasks> masks = std::nullopt);

    std::size_t num_nodes() const noexcept { return num_nodes_; }
    std::size_t num_classes() const noexcept { return num_classes_; }
    std::size_t feature_dim() const noexcept { return features_.cols(); }
    // Each undirected edge counted once.
    std::size_t num_edges() const noexcept { return neighbors_.size() / 2; }
    std::size_t self_loops_dropped() const noexcept { return self_loops_dropped_; }

    const std::vector<std::size_t>& row_offsets() const noexcept { return offsets_; }
    const std::vector<std::uint32_t>& neighbor_indices() const noexcept { return neighbors_; }
    std::span<const std::uint32_t> neighbors(std::size_t v) const noexcept {
        return {neighbors_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }
    std::size_t degree(std::size_t v) const noexcept { return offsets_[v + 1] - offsets_[v]; }
    // Undirected edges with first < second, in CSR order.
    std::vector<Edge> edge_list() const;

    const DenseMatrix& features() const noexcept { return features_; }
    bool has_labels() const noexcept { return !labels_.empty(); }
    const Labels& labels() const noexcept { return labels_; }
    bool all_labeled() const noexcept;

    const NodeMask& train_mask() const noexcept { return masks_.train; }
    const NodeMask& val_mask() const noexcept { return masks_.val; }
    const NodeMask& test_mask() const noexcept { return masks_.test; }
    const SplitMasks& masks() const noexcept { return masks_; }

    Graph with_masks(SplitMasks masks) const;
    Graph with_labels(Labels labels) const;
    Graph with_features(DenseMatrix features) const;

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    void validate_labels_and_masks() const;

    std::size_t num_nodes_ = 0;
    std::size_t num_classes_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::uint32_t> neighbors_;
    DenseMatrix features_;
    Labels labels_;
    SplitMasks masks_;
    std::size_t self_loops_dropped_ = 0;
};

// Fraction of undirected edges whose endpoints share a label.
// Throws PreconditionError for an edgeless graph or unlabeled endpoints.
double homophily_ratio(const Graph& graph, std::span<const ClassId> labels);

// D̃^(-1/2) (A + I) D̃^(-1/2) with D̃ = degree + 1.
SparseMatrix normalized_adjacency(const Graph& graph);

// Exactly `train_per_class` training nodes per class, `val_count` validation nodes from the
// remaining labeled nodes, and every other labeled node in the test mask.
SplitMasks split_nodes(const Graph& graph, std::size_t train_per_class, std::size_t val_count, std::uint64_t seed);

}  // namespace lwgnn
