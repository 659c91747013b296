#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "lwgnn/graph.hpp"

namespace lwgnn {

// edge-list-json: {num_nodes, num_classes, edges: [[s,d],...], features: [[...],...],
//                  labels: [...] (-1 = unlabeled), train_mask/val_mask/test_mask: [node ids] (optional)}
//
// Throws ParseError for malformed documents and ConsistencyError for contradictory content.
// Self-loops are dropped; the count is available as Graph::self_loops_dropped().
Graph load_graph(const std::filesystem::path& path);
Graph parse_graph_json(std::string_view text);

std::string graph_to_json(const Graph& graph);
void save_graph(const Graph& graph, const std::filesystem::path& path);

}  // namespace lwgnn
