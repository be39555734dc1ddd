#include "qac/engine.hpp"

#include <cstdlib>
#include <limits>
#include <utility>

#include "qac/analysis.hpp"

namespace qac {

const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Alg1: return "alg1";
        case Algorithm::Alg2: return "alg2";
        case Algorithm::Alg3: return "alg3";
    }
    std::abort();
}

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::Converged: return "converged";
        case StopReason::Quiescent: return "quiescent";
        case StopReason::ConvergedQuiescent: return "converged+quiescent";
        case StopReason::RoundCap: return "round-cap";
    }
    std::abort();
}

const char* to_string(MsgKind k) {
    switch (k) {
        case MsgKind::MassUnicast: return "mass";
        case MsgKind::StateBroadcast: return "state";
    }
    std::abort();
}

bool detect_convergence(std::span<const NodeSnapshot> row, const Average& avg) {
    for (const NodeSnapshot& s : row)
        if (!state_equals_average(s.state, avg)) return false;
    return true;
}

StateSpread state_spread(std::span<const NodeSnapshot> row) {
    auto ratio_less = [](const StatePair& a, const StatePair& b) {
        return static_cast<__int128>(a.ys) * static_cast<__int128>(b.zs) <
               static_cast<__int128>(b.ys) * static_cast<__int128>(a.zs);
    };
    const StatePair* lo = &row[0].state;
    const StatePair* hi = lo;
    for (const NodeSnapshot& s : row) {
        if (ratio_less(s.state, *lo)) lo = &s.state;
        if (ratio_less(*hi, s.state)) hi = &s.state;
    }
    const __int128 num = static_cast<__int128>(hi->ys) * static_cast<__int128>(lo->zs) -
                         static_cast<__int128>(lo->ys) * static_cast<__int128>(hi->zs);
    const __int128 den = static_cast<__int128>(hi->zs) * static_cast<__int128>(lo->zs);
    if (num > std::numeric_limits<std::int64_t>::max() ||
        den > std::numeric_limits<std::uint64_t>::max())
        throw OverflowError("state spread exceeds the 64-bit range");
    return StateSpread{static_cast<std::int64_t>(num), static_cast<std::uint64_t>(den)};
}

Simulation::Simulation(RunConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) { init_run(); }

void Simulation::init_run() {
    n_ = cfg_.graph.node_count();
    if (n_ < 2) throw ValidationError("run needs a graph with at least 2 nodes");
    if (static_cast<int>(cfg_.initial_values.size()) != n_)
        throw ValidationError("got " + std::to_string(cfg_.initial_values.size()) +
                              " initial values for " + std::to_string(n_) + " nodes");
    if (!is_strongly_connected(cfg_.graph))
        throw ValidationError("graph is not strongly connected");
    if (cfg_.max_rounds < 1) throw ValidationError("max_rounds must be at least 1");
    switch (cfg_.algorithm) {
        case Algorithm::Alg1:
            if (!cfg_.probabilities || cfg_.probabilities->node_count() != n_)
                throw ValidationError("alg1 needs a probability assignment for this graph");
            break;
        case Algorithm::Alg2:
        case Algorithm::Alg3:
            if (!cfg_.priorities || cfg_.priorities->node_count() != n_)
                throw ValidationError(std::string(to_string(cfg_.algorithm)) +
                                      " needs a priority map for this graph");
            break;
    }
    avg_ = exact_average(cfg_.initial_values);

    nodes_.resize(n_);
    for (NodeId j = 0; j < n_; ++j) {
        const std::int64_t v = cfg_.initial_values[j];
        nodes_[j] = NodeState{Mass{v, 1}, StatePair{v, 1}, 0};
    }
    flush_flag_.assign(n_, 0);

    trace_.algorithm = cfg_.algorithm;
    trace_.n = n_;
    trace_.m = cfg_.graph.edge_count();
    trace_.seed = cfg_.seed;
    trace_.average = avg_;

    // The k=0 table row is taken before any initialization transmissions.
    prev_row_ = snapshot_nodes();
    push_snapshot(prev_row_);
    prev_vplus_ = n_;

    if (cfg_.algorithm == Algorithm::Alg2) {
        // Every node hands its whole mass to its order-0 out-neighbor,
        // delivered at round 0, and continues its round-robin from order 1.
        const PriorityMap& pr = *cfg_.priorities;
        for (NodeId j = 0; j < n_; ++j) {
            const auto order = pr.ordered_out(j);
            const Message msg{MsgKind::MassUnicast, j,  order[0], nodes_[j].mass.y,
                              nodes_[j].mass.z,     -1, 0};
            queue_.push_back(msg);
            if (cfg_.record_trace) trace_.messages.push_back(msg);
            ++init_mass_events_;
            nodes_[j].rr_pointer = 1 % static_cast<int>(order.size());
            nodes_[j].mass = Mass{};
        }
    } else if (cfg_.algorithm == Algorithm::Alg3) {
        for (NodeId j = 0; j < n_; ++j) {
            broadcast_state(j, -1);
            ++init_bcast_events_;
        }
    }
}

void Simulation::step() {
    switch (cfg_.algorithm) {
        case Algorithm::Alg1: step_alg1(); break;
        case Algorithm::Alg2: step_alg2(); break;
        case Algorithm::Alg3: step_alg3(); break;
    }
}

void Simulation::step_alg1() {
    const long k = round_;
    std::uint32_t mass_ev = 0;

    // Transmit: one draw per mass-holding node, in ascending node order so a
    // fixed seed replays the same trace. A self draw keeps the mass in place.
    std::vector<Message> sent;
    for (NodeId j = 0; j < n_; ++j) {
        if (nodes_[j].mass.z == 0) continue;
        const NodeId dest = cfg_.probabilities->sample(j, rng_);
        if (dest == j) continue;
        const Message msg{MsgKind::MassUnicast, j, dest, nodes_[j].mass.y,
                          nodes_[j].mass.z,     k, k};
        sent.push_back(msg);
        if (cfg_.record_trace) trace_.messages.push_back(msg);
        ++mass_ev;
        nodes_[j].mass = Mass{};
    }
    // Receive: merge everything that arrived with what was retained.
    for (const Message& m : sent) {
        const Mass one{m.y, m.z};
        nodes_[m.receiver].mass = merge_masses(nodes_[m.receiver].mass, std::span(&one, 1));
    }
    // Process: adopt when the merged count reaches the state's count.
    for (NodeId j = 0; j < n_; ++j)
        if (alg1_trigger(nodes_[j].mass, nodes_[j].state))
            nodes_[j].state = StatePair{nodes_[j].mass.y, nodes_[j].mass.z};

    ++round_;
    record_round(snapshot_nodes(), mass_ev, 0, nullptr, nullptr);
}

void Simulation::step_alg2() {
    const long k = round_;

    for (const Message& m : take_due(k, MsgKind::MassUnicast)) {
        const Mass one{m.y, m.z};
        nodes_[m.receiver].mass = merge_masses(nodes_[m.receiver].mass, std::span(&one, 1));
    }
    std::vector<char> triggered(n_, 0);
    for (NodeId j = 0; j < n_; ++j) {
        if (alg2_trigger(nodes_[j].mass, nodes_[j].state)) {
            triggered[j] = 1;
            nodes_[j].state = StatePair{nodes_[j].mass.y, nodes_[j].mass.z};
        }
    }
    // The round's table row shows the merged masses before the transmit step
    // empties the senders.
    std::vector<NodeSnapshot> row = snapshot_nodes();

    std::uint32_t mass_ev = 0;
    const PriorityMap& pr = *cfg_.priorities;
    for (NodeId j = 0; j < n_; ++j) {
        if (!triggered[j]) continue;
        const auto order = pr.ordered_out(j);
        const NodeId dest = order[nodes_[j].rr_pointer];
        nodes_[j].rr_pointer = (nodes_[j].rr_pointer + 1) % static_cast<int>(order.size());
        const Message msg{MsgKind::MassUnicast, j, dest, nodes_[j].mass.y,
                          nodes_[j].mass.z,     k, k + 1};
        queue_.push_back(msg);
        if (cfg_.record_trace) trace_.messages.push_back(msg);
        ++mass_ev;
        nodes_[j].mass = Mass{};
    }
    ++round_;
    record_round(row, mass_ev, 0, &triggered, nullptr);
}

void Simulation::step_alg3() {
    const long k = round_;
    std::uint32_t mass_ev = 0;
    std::uint32_t bcast_ev = 0;

    // Broadcasts owed from the previous round's release/adopt triggers go out
    // at the top of the round; absorption-triggered broadcasts below go out
    // within theirs. Receivers see either kind one round after it is sent.
    for (NodeId j = 0; j < n_; ++j) {
        if (flush_flag_[j]) {
            flush_flag_[j] = 0;
            broadcast_state(j, k);
            ++bcast_ev;
        }
    }

    // State absorption: take the lex max over everything received.
    std::vector<std::vector<StatePair>> received(n_);
    for (const Message& m : take_due(k, MsgKind::StateBroadcast))
        received[m.receiver].push_back(StatePair{m.y, static_cast<std::uint64_t>(m.z)});
    for (NodeId j = 0; j < n_; ++j) {
        if (auto up = alg3_state_update(nodes_[j].state, received[j])) {
            nodes_[j].state = *up;
            broadcast_state(j, k);
            ++bcast_ev;
        }
    }

    // Release lagging masses round-robin; delivery lands within this round.
    std::vector<char> fired(n_, 0);
    const PriorityMap& pr = *cfg_.priorities;
    std::vector<Message> sent;
    for (NodeId j = 0; j < n_; ++j) {
        if (!alg3_send_trigger(nodes_[j].mass, nodes_[j].state)) continue;
        fired[j] = 1;
        const auto order = pr.ordered_out(j);
        const NodeId dest = order[nodes_[j].rr_pointer];
        nodes_[j].rr_pointer = (nodes_[j].rr_pointer + 1) % static_cast<int>(order.size());
        const Message msg{MsgKind::MassUnicast, j, dest, nodes_[j].mass.y,
                          nodes_[j].mass.z,     k, k};
        sent.push_back(msg);
        if (cfg_.record_trace) trace_.messages.push_back(msg);
        ++mass_ev;
        nodes_[j].mass = Mass{};
        flush_flag_[j] = 1;
    }
    for (const Message& m : sent) {
        const Mass one{m.y, m.z};
        nodes_[m.receiver].mass = merge_masses(nodes_[m.receiver].mass, std::span(&one, 1));
    }

    // Adopt merged masses that overtook the state.
    for (NodeId j = 0; j < n_; ++j) {
        if (alg3_adopt_trigger(nodes_[j].mass, nodes_[j].state)) {
            nodes_[j].state = StatePair{nodes_[j].mass.y, nodes_[j].mass.z};
            flush_flag_[j] = 1;
        }
    }

    ++round_;
    record_round(snapshot_nodes(), mass_ev, bcast_ev, nullptr, &fired);
}

void Simulation::broadcast_state(NodeId j, long send_round) {
    for (NodeId dest : cfg_.graph.out_neighbors(j)) {
        const Message msg{MsgKind::StateBroadcast, j,          dest,
                          nodes_[j].state.ys,      nodes_[j].state.zs,
                          send_round,              send_round + 1};
        queue_.push_back(msg);
        if (cfg_.record_trace) trace_.messages.push_back(msg);
    }
}

std::vector<Message> Simulation::take_due(long round, MsgKind kind) {
    std::vector<Message> due;
    std::vector<Message> rest;
    rest.reserve(queue_.size());
    for (const Message& m : queue_) {
        if (m.deliver_round < round)
            throw InvariantError("stale message in flight at round " + std::to_string(round));
        (m.deliver_round == round && m.kind == kind ? due : rest).push_back(m);
    }
    queue_ = std::move(rest);
    return due;
}

std::vector<NodeSnapshot> Simulation::snapshot_nodes() const {
    std::vector<NodeSnapshot> row(n_);
    for (NodeId j = 0; j < n_; ++j) row[j] = NodeSnapshot{nodes_[j].mass, nodes_[j].state};
    return row;
}

void Simulation::push_snapshot(const std::vector<NodeSnapshot>& row) {
    if (cfg_.record_trace) trace_.snapshots.push_back(row);
    trace_.spread.push_back(state_spread(row));
    trace_.converged.push_back(detect_convergence(row, avg_) ? 1 : 0);
}

bool Simulation::converged_now() const {
    for (const NodeState& s : nodes_)
        if (!state_equals_average(s.state, avg_)) return false;
    return true;
}

std::uint32_t Simulation::mass_events_last_round() const {
    return trace_.mass_events.empty() ? 0 : trace_.mass_events.back();
}

std::uint32_t Simulation::bcast_events_last_round() const {
    return trace_.bcast_events.empty() ? 0 : trace_.bcast_events.back();
}

void Simulation::record_round(const std::vector<NodeSnapshot>& row, std::uint32_t mass_ev,
                              std::uint32_t bcast_ev, const std::vector<char>* alg2_triggered,
                              const std::vector<char>* alg3_fired) {
    push_snapshot(row);
    trace_.mass_events.push_back(mass_ev);
    trace_.bcast_events.push_back(bcast_ev);

    if (cfg_.check_invariants) {
        const long k = round_;  // row is snapshot index k
        auto fail = [k](const std::string& what) {
            throw InvariantError("round " + std::to_string(k) + ": " + what);
        };

        std::vector<Mass> row_masses(n_);
        int vplus = 0;
        for (NodeId j = 0; j < n_; ++j) {
            const NodeSnapshot& s = row[j];
            if (s.mass.z == 0 && s.mass.y != 0) fail("zero-count mass with nonzero value");
            if (s.state.zs < 1) fail("state count dropped below 1");
            row_masses[j] = s.mass;
            if (s.mass.z > 0) ++vplus;
        }
        if (!check_mass_conservation(row_masses, {}, avg_))
            fail("table-row mass conservation broken");

        std::vector<Mass> live(n_);
        for (NodeId j = 0; j < n_; ++j) live[j] = nodes_[j].mass;
        if (!check_mass_conservation(live, queue_, avg_))
            fail("live mass conservation broken (nodes + in-flight)");

        if (vplus < 1) fail("no nonzero mass anywhere");
        if (vplus > prev_vplus_) fail("|V+| increased");

        for (NodeId j = 0; j < n_; ++j) {
            const StatePair& cur = row[j].state;
            const StatePair& prev = prev_row_[j].state;
            if (cfg_.algorithm == Algorithm::Alg1) {
                if (cur.zs < prev.zs) fail("state count decreased");
            } else if (lex_less(cur, prev)) {
                fail("state moved lexicographically backwards");
            }
        }

        if (alg2_triggered) {
            for (NodeId l : leading_mass_nodes(row_masses))
                if (!(*alg2_triggered)[l]) fail("a leading mass holder did not transmit");
        }
        if (alg3_fired) {
            std::vector<Mass> start_masses(n_);
            for (NodeId j = 0; j < n_; ++j) start_masses[j] = prev_row_[j].mass;
            for (NodeId l : leading_mass_nodes(start_masses))
                if ((*alg3_fired)[l]) fail("a leading mass holder released its mass");

            const auto leading = leading_mass_nodes(row_masses);
            const Mass& top = row_masses[leading.front()];
            for (NodeId j = 0; j < n_; ++j)
                if (lex_less(top.z, top.y, row[j].state.zs, row[j].state.ys))
                    fail("a state exceeds the leading mass");

            const bool quiet = mass_ev + bcast_ev == 0;
            if (quiet_latch_ && !quiet) fail("messages resumed after a converged quiet round");
            if (trace_.converged.back() && quiet) quiet_latch_ = true;
        }

        prev_vplus_ = vplus;
    }
    prev_row_ = row;
}

Trace Simulation::take_trace(StopReason reason, std::optional<long> k0) {
    trace_.term.reason = reason;
    trace_.term.k0 = k0;
    trace_.term.rounds = round_;
    trace_.term.mass_msgs = init_mass_events_;
    trace_.term.broadcast_msgs = init_bcast_events_;
    for (std::uint32_t c : trace_.mass_events) trace_.term.mass_msgs += c;
    for (std::uint32_t c : trace_.bcast_events) trace_.term.broadcast_msgs += c;
    return std::move(trace_);
}

Trace run(const RunConfig& cfg) {
    Simulation sim(cfg);
    const int n = static_cast<int>(sim.nodes().size());
    long conv_streak = sim.converged_now() ? 1 : 0;
    std::optional<long> k0 = conv_streak ? std::optional<long>(0) : std::nullopt;
    long quiet_streak = 0;
    std::optional<StopReason> stop;

    while (sim.rounds_done() < cfg.max_rounds) {
        sim.step();
        if (sim.converged_now()) {
            if (!k0) k0 = sim.rounds_done();
            ++conv_streak;
        } else {
            k0.reset();
            conv_streak = 0;
        }
        const bool quiet = sim.mass_events_last_round() + sim.bcast_events_last_round() == 0;
        quiet_streak = quiet ? quiet_streak + 1 : 0;

        // Convergence must survive n consecutive rounds before the run stops;
        // a coincidental all-ratios-match round does not end it.
        const bool conv_ok = conv_streak >= n;
        const bool quiet_ok = quiet_streak >= n;
        switch (cfg.termination) {
            case TerminationPolicy::Convergence:
                if (conv_ok) stop = StopReason::Converged;
                break;
            case TerminationPolicy::Quiescence:
                if (quiet_ok) stop = StopReason::Quiescent;
                break;
            case TerminationPolicy::All:
                if (conv_ok && quiet_ok) stop = StopReason::ConvergedQuiescent;
                break;
            case TerminationPolicy::RoundCap:
                break;
        }
        if (stop) break;
    }
    return sim.take_trace(stop.value_or(StopReason::RoundCap), k0);
}

}  // namespace qac
