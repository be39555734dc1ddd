#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qac/engine.hpp"

namespace qac {

// Embedded reference runs with known per-round tables, used by the golden
// subcommand and the test suites.
struct GoldenFixture {
    std::string name;
    Algorithm algorithm = Algorithm::Alg2;
    int n = 0;
    std::vector<Edge> edges;
    std::vector<std::int64_t> values;
    std::vector<PriorityEntry> priorities;  // empty: order by ascending node id
    // expected[k][node] for k = 0..tables-1
    std::vector<std::vector<NodeSnapshot>> expected;
    long k0 = 0;
};

// 4-node directed ring, values {9, 3, 9, 3}, round-robin protocol. Settles
// into two holders that keep exchanging equal masses forever.
const GoldenFixture& golden_ring();

// 4-node digraph, values {2, 4, 7, 9}, self-stopping protocol with explicit
// priorities. Converges and then goes silent.
const GoldenFixture& golden_stopping();

RunConfig golden_config(const GoldenFixture& f, long max_rounds,
                        TerminationPolicy policy = TerminationPolicy::RoundCap);

struct GoldenMismatch {
    long round = 0;
    NodeId node = 0;  // 0-based
    std::string field;
    std::int64_t expected = 0;
    std::int64_t actual = 0;
};

// First differing cell between the fixture's round-k table and the trace.
std::optional<GoldenMismatch> golden_diff_table(const GoldenFixture& f, const Trace& trace,
                                                std::size_t k);

// First differing cell between the fixture's tables and the trace, if any.
std::optional<GoldenMismatch> golden_diff(const GoldenFixture& f, const Trace& trace);

}  // namespace qac
