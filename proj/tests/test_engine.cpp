#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "qac/analysis.hpp"
#include "qac/engine.hpp"
#include "qac/golden.hpp"
#include "test_util.hpp"

using namespace qac;

namespace {

std::set<NodeId> holders(const std::vector<NodeSnapshot>& row) {
    std::set<NodeId> out;
    for (std::size_t j = 0; j < row.size(); ++j)
        if (row[j].mass.z > 0) out.insert(static_cast<NodeId>(j));
    return out;
}

}  // namespace

TEST_CASE("ring fixture reproduces its per-round tables cell for cell") {
    const auto& f = golden_ring();
    Trace t = run(golden_config(f, 13));
    const auto diff = golden_diff(f, t);
    if (diff)
        FAIL("first mismatch at round ", diff->round, " node ", diff->node + 1, " field ",
             diff->field, ": expected ", diff->expected, " got ", diff->actual);
    CHECK(convergence_round(t) == 3);

    // From round 3 on, two holders swap the two equal masses with period 2.
    CHECK(holders(t.snapshots[3]) == std::set<NodeId>{1, 3});
    CHECK(holders(t.snapshots[4]) == std::set<NodeId>{0, 2});
    for (std::size_t k = 3; k + 2 < t.snapshots.size(); ++k)
        CHECK(holders(t.snapshots[k]) == holders(t.snapshots[k + 2]));
    for (std::size_t k = 3; k < t.snapshots.size(); ++k)
        for (const NodeSnapshot& s : t.snapshots[k]) CHECK(s.state == StatePair{12, 2});
}

TEST_CASE("ring fixture under convergence termination reports k0 = 3") {
    const auto& f = golden_ring();
    Trace t = run(golden_config(f, 1000, TerminationPolicy::Convergence));
    CHECK(t.term.reason == StopReason::Converged);
    CHECK(t.term.k0 == 3);
    CHECK(t.term.rounds < 20);
}

TEST_CASE("stopping fixture reproduces its per-round tables and then goes silent") {
    const auto& f = golden_stopping();
    Trace t = run(golden_config(f, 24));
    const auto diff = golden_diff(f, t);
    if (diff)
        FAIL("first mismatch at round ", diff->round, " node ", diff->node + 1, " field ",
             diff->field, ": expected ", diff->expected, " got ", diff->actual);
    CHECK(convergence_round(t) == 4);
    REQUIRE(t.mass_events.size() == 24);
    for (std::size_t k = 4; k < 24; ++k) {
        CHECK(t.mass_events[k] == 0);
        CHECK(t.bcast_events[k] == 0);
    }
    // and quiescence-based termination detects exactly that
    Trace q = run(golden_config(f, 1000, TerminationPolicy::Quiescence));
    CHECK(q.term.reason == StopReason::Quiescent);
    CHECK(q.term.k0 == 4);
}

TEST_CASE("alg2 initialization empties every node and puts one unicast per node in flight") {
    Simulation sim(golden_config(golden_ring(), 10));
    CHECK(sim.in_flight().size() == 4);
    for (const NodeState& ns : sim.nodes()) {
        CHECK(ns.mass == Mass{0, 0});
        CHECK(ns.state.zs == 1);
    }
    for (const Message& m : sim.in_flight()) {
        CHECK(m.kind == MsgKind::MassUnicast);
        CHECK(m.send_round == -1);
        CHECK(m.deliver_round == 0);
        CHECK(m.z == 1);
    }
}

TEST_CASE("alg3 initialization keeps masses and broadcasts every state") {
    Simulation sim(golden_config(golden_stopping(), 10));
    // 6 edges, so 6 per-receiver broadcast copies from 4 node-level events
    CHECK(sim.in_flight().size() == 6);
    for (const Message& m : sim.in_flight()) {
        CHECK(m.kind == MsgKind::StateBroadcast);
        CHECK(m.deliver_round == 0);
    }
    int j = 0;
    for (const NodeState& ns : sim.nodes()) {
        CHECK(ns.mass == Mass{golden_stopping().values[j], 1});
        CHECK(ns.state == StatePair{golden_stopping().values[j], 1});
        ++j;
    }
}

TEST_CASE("message timing per algorithm and kind") {
    // alg2 iteration unicasts travel one round; alg3 unicasts land in-round,
    // its broadcasts one round later
    Trace t2 = run(golden_config(golden_ring(), 6));
    for (const Message& m : t2.messages) {
        CHECK(m.kind == MsgKind::MassUnicast);
        CHECK(m.deliver_round == m.send_round + 1);
    }
    Trace t3 = run(golden_config(golden_stopping(), 6));
    for (const Message& m : t3.messages) {
        if (m.kind == MsgKind::MassUnicast)
            CHECK(m.deliver_round == m.send_round);
        else
            CHECK(m.deliver_round == m.send_round + 1);
    }
}

TEST_CASE("alg2 replay: snapshots, messages and triggers agree") {
    const auto& f = golden_ring();
    Trace t = run(golden_config(f, 12));
    const int n = t.n;

    std::map<long, std::vector<const Message*>> by_send;
    for (const Message& m : t.messages) by_send[m.send_round].push_back(&m);

    // After initialization every node has handed off its mass.
    std::vector<Mass> live(n, Mass{});
    std::vector<StatePair> states;
    for (const NodeSnapshot& s : t.snapshots[0]) states.push_back(s.state);

    for (long k = 0; k < t.term.rounds; ++k) {
        std::vector<Mass> merged = live;
        for (const Message* m : by_send.count(k - 1) ? by_send[k - 1] : by_send[-999]) {
            const Mass one{m->y, m->z};
            merged[m->receiver] = merge_masses(merged[m->receiver], std::span(&one, 1));
        }
        std::vector<char> trig(n, 0);
        for (NodeId j = 0; j < n; ++j) {
            if (alg2_trigger(merged[j], states[j])) {
                trig[j] = 1;
                states[j] = StatePair{merged[j].y, merged[j].z};
            }
        }
        const auto& row = t.snapshots[k + 1];
        std::set<NodeId> senders;
        for (NodeId j = 0; j < n; ++j) {
            CHECK(row[j].mass == merged[j]);
            CHECK(row[j].state == states[j]);
            if (trig[j]) senders.insert(j);
        }
        std::set<NodeId> logged;
        if (by_send.count(k))
            for (const Message* m : by_send[k]) {
                logged.insert(m->sender);
                CHECK(Mass{m->y, m->z} == merged[m->sender]);
            }
        CHECK(logged == senders);
        live = merged;
        for (NodeId j = 0; j < n; ++j)
            if (trig[j]) live[j] = Mass{};
    }
}

TEST_CASE("alg1 runs replay bit-identically for a fixed seed") {
    RunConfig cfg;
    cfg.algorithm = Algorithm::Alg1;
    cfg.graph = gen_ring_directed(4);
    cfg.initial_values = {9, 3, 9, 3};
    cfg.probabilities = ProbabilityAssignment::uniform(cfg.graph);
    cfg.seed = 42;
    cfg.max_rounds = 100000;
    Trace a = run(cfg);
    Trace b = run(cfg);
    CHECK(a.term.rounds == b.term.rounds);
    CHECK(a.term.k0 == b.term.k0);
    CHECK(convergence_round(a) == a.term.k0);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) CHECK(a.snapshots[k] == b.snapshots[k]);
    REQUIRE(a.messages.size() == b.messages.size());
    for (std::size_t i = 0; i < a.messages.size(); ++i) {
        CHECK(a.messages[i].sender == b.messages[i].sender);
        CHECK(a.messages[i].receiver == b.messages[i].receiver);
        CHECK(a.messages[i].y == b.messages[i].y);
        CHECK(a.messages[i].send_round == b.messages[i].send_round);
    }
    CHECK(a.term.reason == StopReason::Converged);
}

TEST_CASE("alg1 converges on the ring for a handful of seeds") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        RunConfig cfg;
        cfg.algorithm = Algorithm::Alg1;
        cfg.graph = gen_ring_directed(4);
        cfg.initial_values = {9, 3, 9, 3};
        cfg.probabilities = ProbabilityAssignment::uniform(cfg.graph);
        cfg.seed = seed;
        cfg.max_rounds = 100000;
        Trace t = run(cfg);
        CHECK(t.term.reason == StopReason::Converged);
        REQUIRE(t.term.k0.has_value());
        CHECK(*t.term.k0 <= 100000);
    }
}

TEST_CASE("alg2 with all-equal values is converged from round 0 yet keeps transmitting") {
    RunConfig cfg = golden_config(golden_ring(), 10);
    cfg.initial_values = {7, 7, 7, 7};
    Trace t = run(cfg);
    CHECK(convergence_round(t) == 0);
    for (std::size_t k = 0; k < t.mass_events.size(); ++k) CHECK(t.mass_events[k] == 4);
    for (const auto& row : t.snapshots)
        for (const NodeSnapshot& s : row) CHECK(state_equals_average(s.state, t.average));
}

TEST_CASE("alg3 with all-equal values never transmits anything") {
    RunConfig cfg = golden_config(golden_stopping(), 12);
    cfg.initial_values = {5, 5, 5, 5};
    Trace t = run(cfg);
    CHECK(convergence_round(t) == 0);
    for (std::size_t k = 0; k < t.mass_events.size(); ++k) {
        CHECK(t.mass_events[k] == 0);
        CHECK(t.bcast_events[k] == 0);
    }
}

TEST_CASE("alg3 with swapped first priorities merges everything into one node") {
    // Same digraph and values as the stopping fixture, but v1 prefers v3
    // over v4; all four unit masses then pile up in a single holder.
    GoldenFixture f = golden_stopping();
    f.priorities = {
        {0, 2, 0}, {0, 3, 1},  // v1: v3 first, then v4
        {1, 0, 0},
        {2, 0, 0}, {2, 3, 1},
        {3, 1, 0},
    };
    RunConfig cfg = golden_config(f, 1000, TerminationPolicy::All);
    Trace t = run(cfg);
    CHECK(t.term.reason == StopReason::ConvergedQuiescent);
    const auto& last = t.snapshots.back();
    for (const NodeSnapshot& s : last) CHECK(s.state == StatePair{22, 4});
    int with_mass = 0;
    for (const NodeSnapshot& s : last)
        if (s.mass.z > 0) ++with_mass;
    CHECK(with_mass == 1);
}

TEST_CASE("detect_convergence checks every node against the average") {
    const std::vector<NodeSnapshot> all_good = {
        {Mass{}, StatePair{11, 2}}, {Mass{}, StatePair{11, 2}},
        {Mass{}, StatePair{11, 2}}, {Mass{}, StatePair{11, 2}}};
    CHECK(detect_convergence(all_good, Average{22, 4}));

    std::vector<NodeSnapshot> one_off = all_good;
    one_off[2].state = StatePair{9, 1};
    CHECK_FALSE(detect_convergence(one_off, Average{22, 4}));

    const std::vector<NodeSnapshot> pair = {{Mass{}, StatePair{5, 1}}, {Mass{}, StatePair{5, 1}}};
    CHECK(detect_convergence(pair, Average{10, 2}));
}

TEST_CASE("a perturbed expectation is reported with its cell") {
    GoldenFixture f = golden_ring();
    Trace t = run(golden_config(f, 6));
    REQUIRE_FALSE(golden_diff(f, t).has_value());

    f.expected[2][1].state.ys += 1;
    const auto diff = golden_diff(f, t);
    REQUIRE(diff.has_value());
    CHECK(diff->round == 2);
    CHECK(diff->node == 1);
    CHECK(diff->field == "ys");
    CHECK(diff->expected == 10);
    CHECK(diff->actual == 9);
}

TEST_CASE("termination policy round-cap runs exactly max_rounds") {
    Trace t = run(golden_config(golden_ring(), 7));
    CHECK(t.term.reason == StopReason::RoundCap);
    CHECK(t.term.rounds == 7);
    CHECK(t.snapshots.size() == 8);
    CHECK(t.term.k0 == 3);  // the trace still ends converged
}

TEST_CASE("config validation failures") {
    RunConfig cfg = golden_config(golden_ring(), 10);
    cfg.initial_values = {9, 3, 9};
    CHECK_THROWS_AS((void)run(cfg), ValidationError);

    cfg = golden_config(golden_ring(), 10);
    cfg.priorities.reset();
    CHECK_THROWS_AS((void)run(cfg), ValidationError);

    cfg = golden_config(golden_ring(), 0);
    CHECK_THROWS_AS((void)run(cfg), ValidationError);

    cfg = golden_config(golden_ring(), 10);
    cfg.algorithm = Algorithm::Alg1;
    CHECK_THROWS_AS((void)run(cfg), ValidationError);  // probabilities missing

    // weakly but not strongly connected graph
    RunConfig weak;
    weak.algorithm = Algorithm::Alg2;
    const Edge star[] = {{1, 0}, {2, 0}, {0, 1}};
    weak.graph = Digraph::build(3, star);
    weak.initial_values = {1, 2, 3};
    weak.priorities = PriorityMap::by_node_index(weak.graph);
    weak.max_rounds = 10;
    CHECK_THROWS_AS((void)run(weak), ValidationError);
}

TEST_CASE("the 2-cycle converges under all three protocols") {
    const Edge both[] = {{0, 1}, {1, 0}};
    for (Algorithm alg : {Algorithm::Alg1, Algorithm::Alg2, Algorithm::Alg3}) {
        RunConfig cfg;
        cfg.algorithm = alg;
        cfg.graph = Digraph::build(2, both);
        cfg.initial_values = {4, 6};
        cfg.seed = 3;
        cfg.max_rounds = 100000;
        if (alg == Algorithm::Alg1)
            cfg.probabilities = ProbabilityAssignment::uniform(cfg.graph);
        else
            cfg.priorities = PriorityMap::by_node_index(cfg.graph);
        Trace t = run(cfg);
        REQUIRE(t.term.k0.has_value());
        for (const NodeSnapshot& s : t.snapshots.back())
            CHECK(state_equals_average(s.state, Average{10, 2}));
    }
}

TEST_CASE("randomized instances keep every online invariant") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        for (Algorithm alg : {Algorithm::Alg1, Algorithm::Alg2, Algorithm::Alg3}) {
            RunConfig cfg = test::random_instance(alg, seed, 3, 10);
            cfg.termination = TerminationPolicy::Convergence;
            // check_invariants is on: any violation would throw
            Trace t = run(cfg);
            CHECK(t.term.k0.has_value());
        }
    }
}
