#include "qac/graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <utility>

namespace qac {

namespace {

std::string node_str(NodeId j) { return "node " + std::to_string(j); }

}  // namespace

Digraph Digraph::build(int n, std::span<const Edge> edges) {
    if (n < 2) throw ValidationError("digraph needs at least 2 nodes, got " + std::to_string(n));
    Digraph g;
    g.n_ = n;
    g.in_.resize(n);
    g.out_.resize(n);
    std::set<std::pair<NodeId, NodeId>> seen;
    for (const Edge& e : edges) {
        if (e.receiver < 0 || e.receiver >= n || e.sender < 0 || e.sender >= n)
            throw ValidationError("edge endpoint out of range: (" + std::to_string(e.receiver) +
                                  ", " + std::to_string(e.sender) + ") with n=" + std::to_string(n));
        if (e.receiver == e.sender)
            throw ValidationError("self-edge at " + node_str(e.sender));
        if (!seen.insert({e.receiver, e.sender}).second)
            throw ValidationError("duplicate edge (" + std::to_string(e.receiver) + ", " +
                                  std::to_string(e.sender) + ")");
        g.in_[e.receiver].push_back(e.sender);
        g.out_[e.sender].push_back(e.receiver);
        g.edges_.push_back(e);
    }
    for (auto& v : g.in_) std::sort(v.begin(), v.end());
    for (auto& v : g.out_) std::sort(v.begin(), v.end());
    std::sort(g.edges_.begin(), g.edges_.end());
    return g;
}

bool is_strongly_connected(const Digraph& g) {
    const int n = g.node_count();
    auto reaches_all = [n](auto&& neighbors) {
        std::vector<char> seen(n, 0);
        std::vector<NodeId> stack{0};
        seen[0] = 1;
        int count = 1;
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            for (NodeId w : neighbors(v)) {
                if (!seen[w]) {
                    seen[w] = 1;
                    ++count;
                    stack.push_back(w);
                }
            }
        }
        return count == n;
    };
    // Node 0 reaches everyone and everyone reaches node 0.
    return reaches_all([&](NodeId v) -> const std::vector<NodeId>& { return g.out_neighbors(v); }) &&
           reaches_all([&](NodeId v) -> const std::vector<NodeId>& { return g.in_neighbors(v); });
}

PriorityMap PriorityMap::by_node_index(const Digraph& g) {
    PriorityMap p;
    p.ordered_.resize(g.node_count());
    for (NodeId j = 0; j < g.node_count(); ++j)
        p.ordered_[j] = g.out_neighbors(j);  // already ascending
    return p;
}

PriorityMap PriorityMap::from_entries(const Digraph& g, std::span<const PriorityEntry> entries) {
    const int n = g.node_count();
    PriorityMap p;
    p.ordered_.resize(n);
    constexpr NodeId kUnset = -1;
    for (NodeId j = 0; j < n; ++j) p.ordered_[j].assign(g.out_degree(j), kUnset);

    std::vector<int> assigned(n, 0);
    for (const PriorityEntry& e : entries) {
        if (e.node < 0 || e.node >= n || e.neighbor < 0 || e.neighbor >= n)
            throw ValidationError("priority entry out of range at " + node_str(e.node));
        const auto& outs = g.out_neighbors(e.node);
        if (!std::binary_search(outs.begin(), outs.end(), e.neighbor))
            throw ValidationError(node_str(e.neighbor) + " is not an out-neighbor of " +
                                  node_str(e.node));
        if (e.order < 0 || e.order >= g.out_degree(e.node))
            throw ValidationError("order " + std::to_string(e.order) + " out of range for " +
                                  node_str(e.node));
        auto& slot = p.ordered_[e.node][e.order];
        if (slot != kUnset)
            throw ValidationError("order " + std::to_string(e.order) + " assigned twice by " +
                                  node_str(e.node));
        for (NodeId other : p.ordered_[e.node])
            if (other == e.neighbor)
                throw ValidationError(node_str(e.node) + " lists " + node_str(e.neighbor) +
                                      " twice");
        slot = e.neighbor;
        ++assigned[e.node];
    }
    for (NodeId j = 0; j < n; ++j)
        if (assigned[j] != g.out_degree(j))
            throw ValidationError(node_str(j) + " has " + std::to_string(assigned[j]) +
                                  " priorities for " + std::to_string(g.out_degree(j)) +
                                  " out-neighbors");
    return p;
}

ProbabilityAssignment ProbabilityAssignment::uniform(const Digraph& g) {
    ProbabilityAssignment a;
    a.nodes_.resize(g.node_count());
    for (NodeId j = 0; j < g.node_count(); ++j) {
        const auto& outs = g.out_neighbors(j);
        if (outs.empty())
            throw ValidationError(node_str(j) + " has no out-neighbors; probabilities would "
                                  "degenerate to 1");
        PerNode& pn = a.nodes_[j];
        pn.targets = outs;
        pn.targets.push_back(j);  // self last
        pn.num.assign(pn.targets.size(), 1);
        pn.den = pn.targets.size();
    }
    return a;
}

NodeId ProbabilityAssignment::sample(NodeId j, Rng& rng) const {
    const PerNode& pn = nodes_[j];
    std::uint64_t r = rng.below(pn.den);
    std::uint64_t cum = 0;
    for (std::size_t i = 0; i < pn.num.size(); ++i) {
        cum += pn.num[i];
        if (r < cum) return pn.targets[i];
    }
    return pn.targets.back();  // unreachable: numerators sum to den
}

Digraph gen_ring_directed(int n) {
    if (n < 2) throw ValidationError("ring needs at least 2 nodes, got " + std::to_string(n));
    std::vector<Edge> edges;
    edges.reserve(n);
    for (NodeId i = 0; i < n; ++i) edges.push_back({(i + 1) % n, i});
    return Digraph::build(n, edges);
}

Digraph gen_ring_undirected(int n) {
    if (n < 2) throw ValidationError("ring needs at least 2 nodes, got " + std::to_string(n));
    std::set<std::pair<NodeId, NodeId>> es;
    for (NodeId i = 0; i < n; ++i) {
        NodeId next = (i + 1) % n;
        es.insert({next, i});
        es.insert({i, next});
    }
    std::vector<Edge> edges;
    for (auto [r, s] : es) edges.push_back({r, s});
    return Digraph::build(n, edges);
}

Digraph gen_random_strongly_connected(int n, double extra_edge_prob, std::uint64_t seed) {
    if (n < 2) throw ValidationError("random digraph needs at least 2 nodes, got " +
                                     std::to_string(n));
    if (!(extra_edge_prob >= 0.0 && extra_edge_prob <= 1.0))
        throw ValidationError("extra_edge_prob must lie in [0, 1]");
    Rng rng(seed);
    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);

    std::set<std::pair<NodeId, NodeId>> es;
    for (int i = 0; i < n; ++i) es.insert({perm[(i + 1) % n], perm[i]});
    // Fixed (sender, receiver) scan order keeps the draw sequence reproducible.
    for (NodeId s = 0; s < n; ++s)
        for (NodeId r = 0; r < n; ++r)
            if (r != s && !es.contains({r, s}) && rng.chance(extra_edge_prob)) es.insert({r, s});

    std::vector<Edge> edges;
    for (auto [r, s] : es) edges.push_back({r, s});
    return Digraph::build(n, edges);
}

}  // namespace qac
