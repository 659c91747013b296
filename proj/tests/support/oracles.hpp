#pragma once

// Independent reference implementations shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "lwgnn/graph.hpp"
#include "lwgnn/labelwise.hpp"

namespace lwgnn::oracle {

struct RandomLabeled {
    std::size_t n;
    std::vector<Graph::Edge> edges;  // may contain duplicates, both orientations and self-loops
    Labels labels;
};

inline RandomLabeled random_labeled(std::mt19937_64& rng) {
    RandomLabeled r;
    r.n = 2 + rng() % 29;
    const std::size_t c = 1 + rng() % 4;
    r.labels.resize(r.n);
    for (auto& y : r.labels) y = static_cast<ClassId>(rng() % c);
    const std::size_t m = 1 + rng() % (3 * r.n);
    for (std::size_t i = 0; i < m; ++i) {
        r.edges.emplace_back(static_cast<std::uint32_t>(rng() % r.n), static_cast<std::uint32_t>(rng() % r.n));
    }
    // guarantee at least one proper edge
    r.edges.emplace_back(0, 1);
    return r;
}

// Brute force: scan every unordered pair once against the raw edge list.
inline double brute_force_homophily(const RandomLabeled& r) {
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (auto [a, b] : r.edges) {
        if (a == b) continue;
        seen.insert({std::min(a, b), std::max(a, b)});
    }
    std::size_t same = 0;
    for (auto [a, b] : seen) same += r.labels[a] == r.labels[b] ? 1 : 0;
    return static_cast<double>(same) / static_cast<double>(seen.size());
}

using Table = std::vector<std::vector<double>>;

struct Instance {
    std::size_t n = 0, c = 0, d = 0;
    std::vector<Graph::Edge> edges;
    Graph graph;
    LabelAssignment assignment;
};

inline Instance random_instance(std::mt19937_64& rng, std::size_t max_n, std::size_t max_c) {
    Instance in;
    in.n = 2 + rng() % (max_n - 1);
    in.c = 1 + rng() % max_c;
    in.d = 1 + rng() % 4;
    for (std::uint32_t v = 0; v < in.n; ++v)
        for (std::uint32_t u = v + 1; u < in.n; ++u)
            if (rng() % 2 == 0) in.edges.emplace_back(v, u);
    std::normal_distribution<double> nd;
    DenseMatrix x(in.n, in.d);
    for (double& v : x.values()) v = nd(rng);
    in.graph = Graph(in.n, in.c, in.edges, x);
    for (std::size_t v = 0; v < in.n; ++v) {
        in.assignment.labels.push_back(static_cast<ClassId>(rng() % in.c));
        in.assignment.source.push_back(LabelSource::Predicted);
    }
    return in;
}

inline LwGnnModel random_model(const Instance& in, std::size_t layers, std::size_t hidden, std::mt19937_64& rng,
                        EmptyClassFallback fallback = EmptyClassFallback::Zero) {
    LwGnnConfig cfg;
    cfg.input_dim = in.d;
    cfg.num_classes = in.c;
    cfg.layers = layers;
    cfg.hidden = hidden;
    cfg.fallback = fallback;
    LwGnnModel m = make_lwgnn(cfg, rng);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : m.params.value("lw.head.b").values()) v = u(rng);
    return m;
}

// Scalar re-derivation from the edge list: no CSR, no sparse operators, no matrix kernels.
inline Table oracle_forward(const Instance& in, const LwGnnModel& m, bool class_average) {
    const std::size_t n = in.n, c = in.c, p = m.config.hidden;
    std::vector<std::vector<int>> adj(n, std::vector<int>(n, 0));
    for (auto [a, b] : in.edges) adj[a][b] = adj[b][a] = 1;
    const auto& y = in.assignment.labels;
    auto deg = [&](std::size_t v, std::size_t cls) {
        double k = 0;
        for (std::size_t u = 0; u < n; ++u)
            if (adj[v][u] && static_cast<std::size_t>(y[u]) == cls) k += 1;
        return k;
    };

    Table h(n, std::vector<double>(in.d));
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t j = 0; j < in.d; ++j) h[v][j] = in.graph.features()(v, j);

    Table pooled(n, std::vector<double>((c + 1) * p, -1e300));
    for (std::size_t k = 1; k <= m.config.layers; ++k) {
        const DenseMatrix& w = m.params.value(LwGnnModel::layer_name(k));
        Table z(n, std::vector<double>(p, 0.0));
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t j = 0; j < h[v].size(); ++j) z[v][a] += h[v][j] * w(a, j);
        Table out(n, std::vector<double>((c + 1) * p, 0.0));
        for (std::size_t v = 0; v < n; ++v) {
            for (std::size_t a = 0; a < p; ++a) out[v][a] = z[v][a];
            for (std::size_t cls = 0; cls < c; ++cls) {
                for (std::size_t a = 0; a < p; ++a) {
                    double s = 0.0;
                    if (deg(v, cls) == 0 && class_average) {
                        double cnt = 0;
                        for (std::size_t u = 0; u < n; ++u) {
                            if (static_cast<std::size_t>(y[u]) != cls) continue;
                            s += z[u][a];
                            cnt += 1;
                        }
                        if (cnt > 0) s /= cnt;
                    } else {
                        for (std::size_t u = 0; u < n; ++u) {
                            if (!adj[v][u] || static_cast<std::size_t>(y[u]) != cls) continue;
                            s += z[u][a] / std::sqrt(std::max(deg(v, cls), 1.0) * std::max(deg(u, cls), 1.0));
                        }
                    }
                    out[v][(cls + 1) * p + a] = s;
                }
            }
            for (double& e : out[v]) e = std::max(e, 0.0);
            for (std::size_t j = 0; j < out[v].size(); ++j) pooled[v][j] = std::max(pooled[v][j], out[v][j]);
        }
        h = out;
    }

    const DenseMatrix& hw = m.params.value("lw.head.W");
    const DenseMatrix& hb = m.params.value("lw.head.b");
    Table probs(n, std::vector<double>(c));
    for (std::size_t v = 0; v < n; ++v) {
        std::vector<double> logit(c);
        for (std::size_t i = 0; i < c; ++i) {
            logit[i] = hb(0, i);
            for (std::size_t j = 0; j < pooled[v].size(); ++j) logit[i] += pooled[v][j] * hw(i, j);
        }
        const double mx = *std::max_element(logit.begin(), logit.end());
        double z = 0.0;
        for (double l : logit) z += std::exp(l - mx);
        for (std::size_t i = 0; i < c; ++i) probs[v][i] = std::exp(logit[i] - mx) / z;
    }
    return probs;
}

inline double oracle_distance(const Table& want, const DenseMatrix& got) {
    double worst = 0.0;
    for (std::size_t v = 0; v < want.size(); ++v)
        for (std::size_t i = 0; i < want[v].size(); ++i) worst = std::max(worst, std::abs(want[v][i] - got(v, i)));
    return worst;
}

}  // namespace lwgnn::oracle
