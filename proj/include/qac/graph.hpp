#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qac/checked.hpp"
#include "qac/rng.hpp"

namespace qac {

// 0-based everywhere in the library; file formats and the CLI speak 1-based.
using NodeId = std::int32_t;

// Directed edge: receiver gets messages from sender.
struct Edge {
    NodeId receiver = 0;
    NodeId sender = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

class Digraph {
public:
    Digraph() = default;

    // Validates: n >= 2, endpoints in range, no self-edges, no duplicates.
    static Digraph build(int n, std::span<const Edge> edges);

    int node_count() const { return n_; }
    std::int64_t edge_count() const { return static_cast<std::int64_t>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }

    const std::vector<NodeId>& in_neighbors(NodeId j) const { return in_[j]; }
    const std::vector<NodeId>& out_neighbors(NodeId j) const { return out_[j]; }
    int in_degree(NodeId j) const { return static_cast<int>(in_[j].size()); }
    int out_degree(NodeId j) const { return static_cast<int>(out_[j].size()); }

private:
    int n_ = 0;
    std::vector<Edge> edges_;                // sorted (receiver, sender)
    std::vector<std::vector<NodeId>> in_;    // ascending
    std::vector<std::vector<NodeId>> out_;   // ascending
};

// True iff every ordered pair of nodes is joined by a directed path.
bool is_strongly_connected(const Digraph& g);

// Per node, which neighbor is specified and which slot it takes.
struct PriorityEntry {
    NodeId node = 0;
    NodeId neighbor = 0;
    int order = 0;
};

// Fixed round-robin transmission order: for each node, a bijection from its
// out-neighbors onto {0, ..., out_degree - 1}.
class PriorityMap {
public:
    PriorityMap() = default;

    // Order by ascending out-neighbor id.
    static PriorityMap by_node_index(const Digraph& g);

    // Explicit orders; must cover every node's out-neighbors exactly once.
    static PriorityMap from_entries(const Digraph& g, std::span<const PriorityEntry> entries);

    // ordered_out(j)[k] is the out-neighbor of j with order k.
    std::span<const NodeId> ordered_out(NodeId j) const { return ordered_[j]; }
    int node_count() const { return static_cast<int>(ordered_.size()); }

private:
    std::vector<std::vector<NodeId>> ordered_;
};

// Per-node transmission distribution over out-neighbors plus self, stored as
// exact rationals with a common denominator. Sampling maps one bounded
// integer draw onto cumulative numerators; no floating point involved.
class ProbabilityAssignment {
public:
    ProbabilityAssignment() = default;

    // 1/(1 + out_degree) for every out-neighbor and for self.
    static ProbabilityAssignment uniform(const Digraph& g);

    // Targets are the node's out-neighbors ascending, then the node itself.
    std::span<const NodeId> targets(NodeId j) const { return nodes_[j].targets; }
    std::span<const std::uint64_t> numerators(NodeId j) const { return nodes_[j].num; }
    std::uint64_t denominator(NodeId j) const { return nodes_[j].den; }
    int node_count() const { return static_cast<int>(nodes_.size()); }

    // One exact draw: the chosen target (possibly j itself).
    NodeId sample(NodeId j, Rng& rng) const;

private:
    struct PerNode {
        std::vector<NodeId> targets;
        std::vector<std::uint64_t> num;
        std::uint64_t den = 0;
    };
    std::vector<PerNode> nodes_;
};

// Cycle 0 -> 1 -> ... -> n-1 -> 0.
Digraph gen_ring_directed(int n);

// Both directions of every cycle edge.
Digraph gen_ring_undirected(int n);

// A random Hamiltonian cycle plus every other ordered pair independently with
// probability extra_edge_prob. Strongly connected by construction and fully
// determined by (n, extra_edge_prob, seed).
Digraph gen_random_strongly_connected(int n, double extra_edge_prob, std::uint64_t seed);

}  // namespace qac
