#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "qac/graph.hpp"
#include "qac/golden.hpp"

using namespace qac;

TEST_CASE("build_digraph wires neighbor lists consistently") {
    const Edge edges[] = {{1, 0}, {2, 1}, {3, 2}, {0, 3}};
    Digraph g = Digraph::build(4, edges);
    CHECK(g.node_count() == 4);
    CHECK(g.edge_count() == 4);
    for (NodeId j = 0; j < 4; ++j) {
        CHECK(g.out_degree(j) == 1);
        CHECK(g.in_degree(j) == 1);
        CHECK(g.out_neighbors(j)[0] == (j + 1) % 4);
        CHECK(g.in_neighbors(j)[0] == (j + 3) % 4);
    }
}

TEST_CASE("build_digraph rejects malformed input") {
    const Edge self[] = {{0, 0}};
    CHECK_THROWS_AS((void)Digraph::build(3, self), ValidationError);

    const Edge dup[] = {{1, 0}, {1, 0}};
    CHECK_THROWS_AS((void)Digraph::build(3, dup), ValidationError);

    const Edge range[] = {{1, 5}};
    CHECK_THROWS_AS((void)Digraph::build(3, range), ValidationError);

    CHECK_THROWS_AS((void)Digraph::build(1, {}), ValidationError);

    const Edge two[] = {{0, 1}, {1, 0}};
    CHECK_NOTHROW((void)Digraph::build(2, two));
}

TEST_CASE("is_strongly_connected") {
    CHECK(is_strongly_connected(gen_ring_directed(4)));

    // star out of v1: nothing can reach v1 back
    const Edge star[] = {{1, 0}, {2, 0}};
    CHECK_FALSE(is_strongly_connected(Digraph::build(3, star)));

    const Edge two[] = {{0, 1}, {1, 0}};
    CHECK(is_strongly_connected(Digraph::build(2, two)));
}

TEST_CASE("priorities by node index order ascending ids") {
    Digraph g = Digraph::build(4, golden_stopping().edges);
    PriorityMap p = PriorityMap::by_node_index(g);
    CHECK(p.ordered_out(0)[0] == 2);
    CHECK(p.ordered_out(0)[1] == 3);
    CHECK(p.ordered_out(1)[0] == 0);
}

TEST_CASE("explicit priorities are taken verbatim") {
    Digraph g = Digraph::build(4, golden_stopping().edges);
    PriorityMap p = PriorityMap::from_entries(g, golden_stopping().priorities);
    CHECK(p.ordered_out(0)[0] == 3);  // v1 sends to v4 first
    CHECK(p.ordered_out(0)[1] == 2);
    CHECK(p.ordered_out(1)[0] == 0);
    CHECK(p.ordered_out(2)[0] == 0);
    CHECK(p.ordered_out(2)[1] == 3);
    CHECK(p.ordered_out(3)[0] == 1);
}

TEST_CASE("a single out-neighbor always gets order 0") {
    Digraph g = gen_ring_directed(3);
    const PriorityEntry entries[] = {{0, 1, 0}, {1, 2, 0}, {2, 0, 0}};
    PriorityMap p = PriorityMap::from_entries(g, entries);
    for (NodeId j = 0; j < 3; ++j) CHECK(p.ordered_out(j).size() == 1);
}

TEST_CASE("explicit priorities must form a bijection per node") {
    Digraph g = Digraph::build(4, golden_stopping().edges);
    // v1 assigns order 0 twice
    const PriorityEntry twice[] = {
        {0, 3, 0}, {0, 2, 0}, {1, 0, 0}, {2, 0, 0}, {2, 3, 1}, {3, 1, 0},
    };
    CHECK_THROWS_AS((void)PriorityMap::from_entries(g, twice), ValidationError);

    // v1's second edge left unassigned
    const PriorityEntry missing[] = {
        {0, 3, 0}, {1, 0, 0}, {2, 0, 0}, {2, 3, 1}, {3, 1, 0},
    };
    CHECK_THROWS_AS((void)PriorityMap::from_entries(g, missing), ValidationError);

    // not an out-neighbor
    const PriorityEntry stranger[] = {
        {0, 1, 0}, {0, 2, 1}, {1, 0, 0}, {2, 0, 0}, {2, 3, 1}, {3, 1, 0},
    };
    CHECK_THROWS_AS((void)PriorityMap::from_entries(g, stranger), ValidationError);
}

TEST_CASE("uniform probabilities split 1/(1 + out_degree) with exact unit sums") {
    Digraph ring = gen_ring_directed(4);
    ProbabilityAssignment a = ProbabilityAssignment::uniform(ring);
    for (NodeId j = 0; j < 4; ++j) {
        CHECK(a.denominator(j) == 2);  // one out-neighbor and self
        CHECK(a.targets(j).size() == 2);
        CHECK(a.targets(j).back() == j);
        std::uint64_t sum = 0;
        for (std::uint64_t x : a.numerators(j)) sum += x;
        CHECK(sum == a.denominator(j));
    }

    // a node with three out-neighbors gets four entries of 1/4
    const Edge edges[] = {{1, 0}, {2, 0}, {3, 0}, {0, 1}, {0, 2}, {0, 3}};
    Digraph fan = Digraph::build(4, edges);
    ProbabilityAssignment b = ProbabilityAssignment::uniform(fan);
    CHECK(b.denominator(0) == 4);
    CHECK(b.targets(0).size() == 4);
    for (std::uint64_t x : b.numerators(0)) CHECK(x == 1);

    // a sink node would get probability 1, which is out of (0, 1)
    const Edge sink[] = {{1, 0}};
    CHECK_THROWS_AS((void)ProbabilityAssignment::uniform(Digraph::build(2, sink)),
                    ValidationError);
}

TEST_CASE("sampling follows the exact rational thresholds") {
    Digraph ring = gen_ring_directed(2);
    ProbabilityAssignment a = ProbabilityAssignment::uniform(ring);
    Rng rng(7);
    int self = 0, other = 0;
    for (int i = 0; i < 10000; ++i) (a.sample(0, rng) == 0 ? self : other)++;
    CHECK(self + other == 10000);
    CHECK(self > 4500);
    CHECK(other > 4500);
}

TEST_CASE("ring generators") {
    Digraph d4 = gen_ring_directed(4);
    CHECK(d4.edges() == Digraph::build(4, golden_ring().edges).edges());

    CHECK(gen_ring_undirected(3).edge_count() == 6);
    CHECK(gen_ring_undirected(2).edge_count() == 2);  // the 2-cycle, deduplicated

    CHECK_THROWS_AS((void)gen_ring_directed(1), ValidationError);
    CHECK_THROWS_AS((void)gen_ring_undirected(0), ValidationError);
}

TEST_CASE("random digraphs are strongly connected for 100 consecutive seeds") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Digraph g = gen_random_strongly_connected(20, 0.1, seed);
        CHECK(is_strongly_connected(g));
        CHECK(g.edge_count() >= 20);
    }
}

TEST_CASE("random digraph generation is reproducible") {
    for (std::uint64_t seed : {0ULL, 3ULL, 99ULL}) {
        Digraph a = gen_random_strongly_connected(12, 0.2, seed);
        Digraph b = gen_random_strongly_connected(12, 0.2, seed);
        CHECK(a.edges() == b.edges());
    }
    CHECK_THROWS_AS((void)gen_random_strongly_connected(12, 1.5, 0), ValidationError);
    CHECK_THROWS_AS((void)gen_random_strongly_connected(1, 0.5, 0), ValidationError);
}

TEST_CASE("extra_edge_prob 1 yields the complete digraph") {
    Digraph g = gen_random_strongly_connected(5, 1.0, 123);
    CHECK(g.edge_count() == 20);
}
