// graph.hpp — undirected communication graph with implicit self-loops.
//
// Adjacency lists hold proper neighbours only (a node never appears in its
// own list); the self-loop every node carries is implicit and shows up as
// the holding probability of the Metropolis-Hastings chains.
#pragma once
#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rwsgd/errors.hpp"
#include "rwsgd/rng.hpp"

namespace rwsgd {

using NodeId = std::size_t;

class Graph {
public:
    Graph() = default;

    // Builds a graph from proper edges. Duplicates are merged; self-loops
    // and out-of-range endpoints are rejected. Connectivity is checked.
    Graph(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& edges) : adj_(n) {
        detail::require(n >= 1, "graph must have at least one node");
        for (auto [a, b] : edges) {
            detail::require(a < n && b < n, "edge endpoint out of range: " + std::to_string(a) +
                                                " " + std::to_string(b) + " (n=" +
                                                std::to_string(n) + ")");
            detail::require(a != b, "explicit self-loop " + std::to_string(a) +
                                        " in edge list; self-loops are implicit");
            adj_[a].push_back(b);
            adj_[b].push_back(a);
        }
        for (auto& nb : adj_) {
            std::sort(nb.begin(), nb.end());
            nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        }
        if (!connected())
            throw ConfigError("graph not connected (n=" + std::to_string(n) + ")");
    }

    std::size_t size() const noexcept { return adj_.size(); }

    const std::vector<NodeId>& neighbors(NodeId i) const {
        check(i);
        return adj_[i];
    }

    std::size_t degree(NodeId i) const {
        check(i);
        return adj_[i].size();
    }

    std::size_t edge_count() const noexcept {
        std::size_t twice = 0;
        for (const auto& nb : adj_) twice += nb.size();
        return twice / 2;
    }

    bool has_edge(NodeId a, NodeId b) const {
        const auto& nb = neighbors(a);
        return std::binary_search(nb.begin(), nb.end(), b);
    }

    // Proper edges (i<j), lexicographic.
    std::vector<std::pair<NodeId, NodeId>> edges() const {
        std::vector<std::pair<NodeId, NodeId>> out;
        out.reserve(edge_count());
        for (NodeId i = 0; i < adj_.size(); ++i)
            for (NodeId j : adj_[i])
                if (i < j) out.emplace_back(i, j);
        return out;
    }

    // Breadth-first reachability from node 0 over proper edges.
    bool connected() const {
        if (adj_.empty()) return false;
        std::vector<char> seen(adj_.size(), 0);
        std::queue<NodeId> q;
        q.push(0);
        seen[0] = 1;
        std::size_t reached = 1;
        while (!q.empty()) {
            const NodeId u = q.front();
            q.pop();
            for (NodeId v : adj_[u])
                if (!seen[v]) {
                    seen[v] = 1;
                    ++reached;
                    q.push(v);
                }
        }
        return reached == adj_.size();
    }

    // Two-colouring test over proper edges (graph assumed connected).
    bool bipartite() const {
        if (adj_.empty()) return false;
        std::vector<int> colour(adj_.size(), -1);
        std::queue<NodeId> q;
        q.push(0);
        colour[0] = 0;
        while (!q.empty()) {
            const NodeId u = q.front();
            q.pop();
            for (NodeId v : adj_[u]) {
                if (colour[v] < 0) {
                    colour[v] = 1 - colour[u];
                    q.push(v);
                } else if (colour[v] == colour[u]) {
                    return false;
                }
            }
        }
        return true;
    }

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    void check(NodeId i) const {
        if (i >= adj_.size())
            throw std::out_of_range("node index " + std::to_string(i) + " out of range (n=" +
                                    std::to_string(adj_.size()) + ")");
    }

    std::vector<std::vector<NodeId>> adj_;
};

inline std::size_t degree(const Graph& g, NodeId i) { return g.degree(i); }

inline constexpr int kErdosRenyiAttempts = 100;

// G(n, p) conditioned on connectivity: a disconnected sample is discarded and
// the generator is reseeded with seed+1, seed+2, ... (at most 100 attempts).
inline Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
    detail::require(n >= 2, "erdos_renyi: n must be >= 2, got " + std::to_string(n));
    detail::require(p > 0.0 && p <= 1.0, "erdos_renyi: p must lie in (0, 1], got " +
                                             std::to_string(p));
    for (int attempt = 0; attempt < kErdosRenyiAttempts; ++attempt) {
        Rng rng(seed + static_cast<std::uint64_t>(attempt));
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (NodeId i = 0; i < n; ++i)
            for (NodeId j = i + 1; j < n; ++j)
                if (rng.uniform() < p) edges.emplace_back(i, j);
        try {
            return Graph(n, edges);
        } catch (const ConfigError&) {
            // disconnected; resample
        }
    }
    std::ostringstream msg;
    msg << "graph not connected: n=" << n << " p=" << p << " after " << kErdosRenyiAttempts
        << " attempts";
    throw NumericalError(msg.str());
}

// Edge-list text format: first line "n", then one "i j" pair per proper
// edge with i<j.
inline void write_edge_list(std::ostream& os, const Graph& g) {
    os << g.size() << '\n';
    for (auto [i, j] : g.edges()) os << i << ' ' << j << '\n';
}

inline Graph read_edge_list(std::istream& is) {
    std::string line;
    std::size_t n = 0;
    bool have_n = false;
    std::vector<std::pair<NodeId, NodeId>> edges;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        if (!have_n) {
            if (!(ls >> n)) throw ConfigError("edge list: expected node count on line 1");
            have_n = true;
            continue;
        }
        long long a = -1, b = -1;
        if (!(ls >> a >> b) || a < 0 || b < 0)
            throw ConfigError("edge list: malformed edge on line " + std::to_string(lineno));
        edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
    }
    if (!have_n) throw ConfigError("edge list: empty input");
    return Graph(n, edges);
}

}  // namespace rwsgd
