#include "lwgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "lwgnn/error.hpp"

namespace lwgnn {

Graph::Graph(std::size_t num_nodes, std::size_t num_classes, std::span<const Edge> edges, DenseMatrix features,
             Labels labels, std::optional<SplitMasks> masks)
    : num_nodes_(num_nodes), num_classes_(num_classes), features_(std::move(features)), labels_(std::move(labels)) {
    if (features_.rows() != num_nodes_) {
        throw ConsistencyError("feature matrix has " + std::to_string(features_.rows()) + " rows, expected " +
                               std::to_string(num_nodes_));
    }
    // Directed (v,u) pairs in both orientations, then sorted and deduplicated per row.
    std::vector<Edge> directed;
    directed.reserve(edges.size() * 2);
    for (const auto& [a, b] : edges) {
        if (a >= num_nodes_ || b >= num_nodes_) {
            throw ConsistencyError("edge (" + std::to_string(a) + ", " + std::to_string(b) + ") references a node >= " +
                                   std::to_string(num_nodes_));
        }
        if (a == b) {
            ++self_loops_dropped_;
            continue;
        }
        directed.emplace_back(a, b);
        directed.emplace_back(b, a);
    }
    std::sort(directed.begin(), directed.end());
    directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

    offsets_.assign(num_nodes_ + 1, 0);
    neighbors_.reserve(directed.size());
    for (const auto& [v, u] : directed) {
        ++offsets_[v + 1];
        neighbors_.push_back(u);
    }
    for (std::size_t v = 0; v < num_nodes_; ++v) offsets_[v + 1] += offsets_[v];

    if (masks) {
        masks_ = std::move(*masks);
    } else {
        masks_ = {NodeMask(num_nodes_, false), NodeMask(num_nodes_, false), NodeMask(num_nodes_, false)};
    }
    validate_labels_and_masks();
}

void Graph::validate_labels_and_masks() const {
    if (!labels_.empty()) {
        if (labels_.size() != num_nodes_) {
            throw ConsistencyError("label array has " + std::to_string(labels_.size()) + " entries, expected " +
                                   std::to_string(num_nodes_));
        }
        for (std::size_t v = 0; v < num_nodes_; ++v) {
            const ClassId y = labels_[v];
            if (y == kUnlabeled) continue;
            if (y < 0 || static_cast<std::size_t>(y) >= num_classes_) {
                throw ConsistencyError("node " + std::to_string(v) + " has label " + std::to_string(y) +
                                       " outside [0, " + std::to_string(num_classes_) + ")");
            }
        }
    }
    for (const NodeMask* m : {&masks_.train, &masks_.val, &masks_.test}) {
        if (m->size() != num_nodes_) throw ConsistencyError("mask length does not match node count");
    }
    for (std::size_t v = 0; v < num_nodes_; ++v) {
        const int hits = int(masks_.train[v]) + int(masks_.val[v]) + int(masks_.test[v]);
        if (hits > 1) throw ConsistencyError("node " + std::to_string(v) + " appears in more than one mask");
        if ((masks_.train[v] || masks_.val[v]) && (labels_.empty() || labels_[v] == kUnlabeled)) {
            throw ConsistencyError("train/val node " + std::to_string(v) + " has no label");
        }
    }
}

std::vector<Graph::Edge> Graph::edge_list() const {
    std::vector<Edge> out;
    out.reserve(num_edges());
    for (std::uint32_t v = 0; v < num_nodes_; ++v)
        for (std::uint32_t u : neighbors(v))
            if (v < u) out.emplace_back(v, u);
    return out;
}

bool Graph::all_labeled() const noexcept {
    return has_labels() && std::none_of(labels_.begin(), labels_.end(), [](ClassId y) { return y == kUnlabeled; });
}

Graph Graph::with_masks(SplitMasks masks) const {
    Graph g = *this;
    g.masks_ = std::move(masks);
    g.validate_labels_and_masks();
    return g;
}

Graph Graph::with_labels(Labels labels) const {
    Graph g = *this;
    g.labels_ = std::move(labels);
    g.validate_labels_and_masks();
    return g;
}

Graph Graph::with_features(DenseMatrix features) const {
    if (features.rows() != num_nodes_) throw ConsistencyError("with_features: row count mismatch");
    Graph g = *this;
    g.features_ = std::move(features);
    return g;
}

double homophily_ratio(const Graph& graph, std::span<const ClassId> labels) {
    if (labels.size() != graph.num_nodes()) throw PreconditionError("homophily_ratio: one label per node required");
    if (graph.num_edges() == 0) throw PreconditionError("homophily_ratio: undefined for an edgeless graph");
    std::size_t same = 0;
    std::size_t total = 0;
    for (std::uint32_t v = 0; v < graph.num_nodes(); ++v) {
        for (std::uint32_t u : graph.neighbors(v)) {
            if (u <= v) continue;
            if (labels[v] == kUnlabeled || labels[u] == kUnlabeled) {
                throw PreconditionError("homophily_ratio: every node must be labeled");
            }
            ++total;
            if (labels[v] == labels[u]) ++same;
        }
    }
    return static_cast<double>(same) / static_cast<double>(total);
}

SparseMatrix normalized_adjacency(const Graph& graph) {
    const std::size_t n = graph.num_nodes();
    std::vector<double> inv_sqrt(n);
    for (std::size_t v = 0; v < n; ++v) inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(graph.degree(v) + 1));

    std::vector<std::size_t> offsets(n + 1, 0);
    std::vector<SparseMatrix::Index> cols;
    std::vector<double> vals;
    cols.reserve(graph.neighbor_indices().size() + n);
    vals.reserve(cols.capacity());
    for (std::uint32_t v = 0; v < n; ++v) {
        bool diagonal_done = false;
        for (std::uint32_t u : graph.neighbors(v)) {
            if (!diagonal_done && u > v) {
                cols.push_back(v);
                vals.push_back(inv_sqrt[v] * inv_sqrt[v]);
                diagonal_done = true;
            }
            cols.push_back(u);
            vals.push_back(inv_sqrt[v] * inv_sqrt[u]);
        }
        if (!diagonal_done) {
            cols.push_back(v);
            vals.push_back(inv_sqrt[v] * inv_sqrt[v]);
        }
        offsets[v + 1] = cols.size();
    }
    return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::move(vals));
}

SplitMasks split_nodes(const Graph& graph, std::size_t train_per_class, std::size_t val_count, std::uint64_t seed) {
    if (!graph.has_labels()) throw PreconditionError("split_nodes: graph has no labels");
    const std::size_t n = graph.num_nodes();
    std::vector<std::vector<std::uint32_t>> by_class(graph.num_classes());
    for (std::uint32_t v = 0; v < n; ++v) {
        const ClassId y = graph.labels()[v];
        if (y != kUnlabeled) by_class[static_cast<std::size_t>(y)].push_back(v);
    }

    std::mt19937_64 rng(seed);
    SplitMasks masks{NodeMask(n, false), NodeMask(n, false), NodeMask(n, false)};
    std::vector<std::uint32_t> pool;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& members = by_class[c];
        if (members.size() < train_per_class) {
            throw PreconditionError("split_nodes: class " + std::to_string(c) + " has " +
                                    std::to_string(members.size()) + " labeled nodes, need " +
                                    std::to_string(train_per_class));
        }
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (i < train_per_class) {
                masks.train[members[i]] = true;
            } else {
                pool.push_back(members[i]);
            }
        }
    }
    if (pool.size() < val_count) {
        throw PreconditionError("split_nodes: only " + std::to_string(pool.size()) +
                                " labeled nodes remain for " + std::to_string(val_count) + " validation nodes");
    }
    std::sort(pool.begin(), pool.end());
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t i = 0; i < pool.size(); ++i) (i < val_count ? masks.val : masks.test)[pool[i]] = true;
    return masks;
}

}  // namespace lwgnn
