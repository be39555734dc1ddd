#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qac/engine.hpp"

namespace qac {

// Nodes holding a nonzero mass that is lexicographically maximal on (z, y).
// Empty only when every mass is zero, which conservation rules out at round
// boundaries of a valid run.
std::vector<NodeId> leading_mass_nodes(std::span<const Mass> masses);

// Sum over node masses plus in-flight mass unicasts equals (S, n). State
// broadcasts carry copies, not mass, and are ignored.
bool check_mass_conservation(std::span<const Mass> node_masses,
                             std::span<const Message> in_flight, const Average& avg);

// Smallest k such that every snapshot from k on satisfies the average; absent
// if the trace does not end converged.
std::optional<long> convergence_round(const Trace& trace);

// Worst-case merge-plus-propagation budget for the deterministic protocols:
// (n-1)*n + (n-1)*m^2 + n rounds.
std::int64_t theoretical_bound_alg3(int n, std::int64_t m);

// Generous cap for runs that are not expected to hit it: 10x the bound.
long default_max_rounds(int n, std::int64_t m);

struct RoundMetrics {
    long round = 0;
    int vplus = 0;                    // nodes holding nonzero mass
    std::vector<NodeId> leading;      // leading-mass node set
    std::uint32_t mass_msgs = 0;      // unicast events sent during this round
    std::uint32_t broadcast_msgs = 0; // broadcast events sent during this round
    bool converged = false;
};

// One entry per snapshot; requires a recorded trace.
std::vector<RoundMetrics> round_metrics(const Trace& trace);

// Rows as parsed back from trace/message CSVs. z and zs stay signed here so
// that corrupted files can be audited instead of rejected at parse time.
struct RawNodeRow {
    long round = 0;
    NodeId node = 0;  // 0-based
    std::int64_t y = 0;
    std::int64_t z = 0;
    std::int64_t ys = 0;
    std::int64_t zs = 0;
};

struct RawMsgRow {
    long round = 0;  // send round; -1 for initialization transmissions
    MsgKind kind = MsgKind::MassUnicast;
    NodeId sender = 0;
    NodeId receiver = 0;
    std::int64_t y = 0;
    std::int64_t z = 0;
};

struct InvariantReport {
    struct Violation {
        std::string invariant;
        long round = 0;
        std::string detail;
    };
    std::vector<std::string> checked;  // invariant names that ran clean or not
    std::vector<std::string> skipped;  // "name: reason"
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
};

// Offline audit of a recorded run: cell validity, conservation, |V+|
// monotonicity, state monotonicity, the leading-mass rules, state dominance
// and quiescence stability. The same checks the engine runs online, applied
// to data that may have been round-tripped through files.
InvariantReport audit_rows(Algorithm alg, std::span<const RawNodeRow> rows,
                           std::span<const RawMsgRow> msgs);

InvariantReport audit_trace(const Trace& trace);

}  // namespace qac
