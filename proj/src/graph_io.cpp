#include "lwgnn/graph_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lwgnn/error.hpp"

namespace lwgnn {
namespace {

using nlohmann::json;

const json& require(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw ParseError(std::string("graph file: missing field '") + key + "'");
    return *it;
}

std::size_t read_count(const json& doc, const char* key) {
    const json& v = require(doc, key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ParseError(std::string("graph file: '") + key + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

NodeMask read_mask(const json& doc, const char* key, std::size_t n) {
    NodeMask mask(n, false);
    auto it = doc.find(key);
    if (it == doc.end()) return mask;
    if (!it->is_array()) throw ParseError(std::string("graph file: '") + key + "' must be an array of node ids");
    for (const auto& id : *it) {
        if (!id.is_number_integer()) throw ParseError(std::string("graph file: non-integer id in '") + key + "'");
        const auto v = id.get<long long>();
        if (v < 0 || static_cast<std::size_t>(v) >= n) {
            throw ConsistencyError(std::string("graph file: '") + key + "' references node " + std::to_string(v));
        }
        mask[static_cast<std::size_t>(v)] = true;
    }
    return mask;
}

json mask_ids(const NodeMask& mask) {
    json ids = json::array();
    for (std::size_t v = 0; v < mask.size(); ++v)
        if (mask[v]) ids.push_back(v);
    return ids;
}

}  // namespace

Graph parse_graph_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("graph file: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("graph file: top level must be an object");

    try {
        const std::size_t n = read_count(doc, "num_nodes");
        const std::size_t c = read_count(doc, "num_classes");

        std::vector<Graph::Edge> edges;
        const json& edge_array = require(doc, "edges");
        if (!edge_array.is_array()) throw ParseError("graph file: 'edges' must be an array");
        edges.reserve(edge_array.size());
        for (const auto& e : edge_array) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
                throw ParseError("graph file: malformed edge record " + e.dump());
            }
            const auto a = e[0].get<long long>();
            const auto b = e[1].get<long long>();
            if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n || static_cast<std::size_t>(b) >= n) {
                throw ConsistencyError("graph file: edge " + e.dump() + " out of range");
            }
            edges.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
        }

        const json& rows = require(doc, "features");
        if (!rows.is_array()) throw ParseError("graph file: 'features' must be an array of rows");
        if (rows.size() != n) {
            throw ConsistencyError("graph file: " + std::to_string(rows.size()) + " feature rows for " +
                                   std::to_string(n) + " nodes");
        }
        const std::size_t d = rows.empty() ? 0 : rows.front().size();
        DenseMatrix features(n, d);
        for (std::size_t v = 0; v < n; ++v) {
            const auto& row = rows[v];
            if (!row.is_array()) throw ParseError("graph file: feature row " + std::to_string(v) + " is not an array");
            if (row.size() != d) throw ConsistencyError("graph file: ragged feature row " + std::to_string(v));
            for (std::size_t j = 0; j < d; ++j) {
                if (!row[j].is_number()) throw ParseError("graph file: non-numeric feature in row " + std::to_string(v));
                features(v, j) = row[j].get<double>();
            }
        }

        Labels labels;
        if (auto it = doc.find("labels"); it != doc.end()) {
            if (!it->is_array()) throw ParseError("graph file: 'labels' must be an array");
            if (it->size() != n) throw ConsistencyError("graph file: label count does not match num_nodes");
            labels.reserve(n);
            for (const auto& y : *it) {
                if (!y.is_number_integer()) throw ParseError("graph file: non-integer label");
                labels.push_back(y.get<ClassId>());
            }
        }

        SplitMasks masks{read_mask(doc, "train_mask", n), read_mask(doc, "val_mask", n), read_mask(doc, "test_mask", n)};
        return Graph(n, c, edges, std::move(features), std::move(labels), std::move(masks));
    } catch (const json::exception& e) {
        throw ParseError(std::string("graph file: ") + e.what());
    }
}

Graph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open graph file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_graph_json(buffer.str());
}

std::string graph_to_json(const Graph& graph) {
    json doc;
    doc["num_nodes"] = graph.num_nodes();
    doc["num_classes"] = graph.num_classes();
    json edges = json::array();
    for (const auto& [a, b] : graph.edge_list()) edges.push_back({a, b});
    doc["edges"] = std::move(edges);
    json rows = json::array();
    for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
        auto r = graph.features().row(v);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    doc["features"] = std::move(rows);
    if (graph.has_labels()) doc["labels"] = graph.labels();
    doc["train_mask"] = mask_ids(graph.train_mask());
    doc["val_mask"] = mask_ids(graph.val_mask());
    doc["test_mask"] = mask_ids(graph.test_mask());
    return doc.dump();
}

void save_graph(const Graph& graph, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write graph file " + path.string());
    out << graph_to_json(graph) << '\n';
}

}  // namespace lwgnn
