#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qac/graph.hpp"
#include "qac/protocol.hpp"
#include "qac/rng.hpp"

namespace qac {

enum class Algorithm {
    Alg1,  // randomized mass transfer
    Alg2,  // deterministic event-triggered, round-robin
    Alg3,  // deterministic event-triggered with transmission stopping
};

enum class TerminationPolicy {
    Convergence,  // every state equals the average, stable for n rounds
    Quiescence,   // no message of either kind for n consecutive rounds
    RoundCap,     // run exactly max_rounds
    All,          // Convergence and Quiescence both satisfied
};

enum class StopReason { Converged, Quiescent, ConvergedQuiescent, RoundCap };

enum class MsgKind { MassUnicast, StateBroadcast };

// One wire message. Broadcasts are expanded to one entry per receiver; the
// engine counts node-level broadcast events separately. send_round is -1 for
// transmissions performed during initialization.
struct Message {
    MsgKind kind = MsgKind::MassUnicast;
    NodeId sender = 0;
    NodeId receiver = 0;
    std::int64_t y = 0;
    std::uint64_t z = 0;
    long send_round = 0;
    long deliver_round = 0;
};

struct RunConfig {
    Algorithm algorithm = Algorithm::Alg2;
    Digraph graph;
    std::vector<std::int64_t> initial_values;
    std::optional<PriorityMap> priorities;              // Alg2 / Alg3
    std::optional<ProbabilityAssignment> probabilities; // Alg1
    std::uint64_t seed = 0;                             // Alg1 stream
    long max_rounds = 0;                                // must be >= 1
    TerminationPolicy termination = TerminationPolicy::Convergence;
    bool record_trace = true;      // keep snapshots and the message log
    bool check_invariants = true;  // online per-round invariant checks
};

struct NodeSnapshot {
    Mass mass;
    StatePair state;

    friend bool operator==(const NodeSnapshot&, const NodeSnapshot&) = default;
};

// max q^s - min q^s over the nodes of one round, as an exact rational.
struct StateSpread {
    std::int64_t num = 0;
    std::uint64_t den = 1;
};

struct TerminationRecord {
    StopReason reason = StopReason::RoundCap;
    std::optional<long> k0;  // first round of the trace's converged suffix
    long rounds = 0;         // executed rounds; snapshots.size() == rounds + 1
    std::uint64_t mass_msgs = 0;       // unicast events, initialization included
    std::uint64_t broadcast_msgs = 0;  // node-level broadcast events, ditto
};

// Full record of one run. snapshots[k] holds each node's mass and state at
// time index k exactly as a per-round table would print them; spread and
// converged are kept even when snapshots are not (record_trace == false).
struct Trace {
    Algorithm algorithm = Algorithm::Alg2;
    int n = 0;
    std::int64_t m = 0;
    std::uint64_t seed = 0;
    Average average;
    std::vector<std::vector<NodeSnapshot>> snapshots;
    std::vector<Message> messages;
    std::vector<StateSpread> spread;           // per snapshot
    std::vector<char> converged;               // per snapshot
    std::vector<std::uint32_t> mass_events;    // per executed round (send events)
    std::vector<std::uint32_t> bcast_events;   // per executed round (send events)
    TerminationRecord term;
};

// One live run. Exposed so tests and tools can drive rounds directly; run()
// below wraps the usual init/step/terminate loop.
class Simulation {
public:
    explicit Simulation(RunConfig cfg);

    void step();  // one synchronous round of the configured algorithm

    long rounds_done() const { return round_; }
    bool converged_now() const;
    const Average& average() const { return avg_; }
    const std::vector<NodeState>& nodes() const { return nodes_; }
    const std::vector<Message>& in_flight() const { return queue_; }
    std::uint32_t mass_events_last_round() const;
    std::uint32_t bcast_events_last_round() const;

    Trace take_trace(StopReason reason, std::optional<long> k0);

private:
    void init_run();
    void step_alg1();
    void step_alg2();
    void step_alg3();

    void broadcast_state(NodeId j, long send_round);
    void record_round(const std::vector<NodeSnapshot>& row, std::uint32_t mass_ev,
                      std::uint32_t bcast_ev, const std::vector<char>* alg2_triggered,
                      const std::vector<char>* alg3_fired);
    std::vector<NodeSnapshot> snapshot_nodes() const;
    void push_snapshot(const std::vector<NodeSnapshot>& row);
    std::vector<Message> take_due(long round, MsgKind kind);

    RunConfig cfg_;
    int n_ = 0;
    Average avg_;
    std::vector<NodeState> nodes_;
    std::vector<Message> queue_;      // in flight, not yet delivered
    std::vector<char> flush_flag_;    // Alg3: broadcast owed at the next round
    Rng rng_;
    long round_ = 0;
    int prev_vplus_ = 0;
    std::vector<NodeSnapshot> prev_row_;
    std::uint64_t init_mass_events_ = 0;
    std::uint64_t init_bcast_events_ = 0;
    bool quiet_latch_ = false;  // Alg3: saw a converged, message-free round
    Trace trace_;
};

// Runs until the configured termination policy fires or max_rounds is hit.
Trace run(const RunConfig& cfg);

// True iff every node's state equals the average exactly.
bool detect_convergence(std::span<const NodeSnapshot> row, const Average& avg);

// Exact max - min over the states' ratios.
StateSpread state_spread(std::span<const NodeSnapshot> row);

const char* to_string(Algorithm a);
const char* to_string(StopReason r);
const char* to_string(MsgKind k);

}  // namespace qac
