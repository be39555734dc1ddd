#include "qac/analysis.hpp"

#include <algorithm>
#include <set>

namespace qac {

std::vector<NodeId> leading_mass_nodes(std::span<const Mass> masses) {
    std::vector<NodeId> out;
    const Mass* best = nullptr;
    for (std::size_t j = 0; j < masses.size(); ++j) {
        const Mass& m = masses[j];
        if (m.z == 0) continue;
        if (!best || lex_less(*best, m)) {
            best = &m;
            out.clear();
        }
        if (m == *best) out.push_back(static_cast<NodeId>(j));
    }
    return out;
}

bool check_mass_conservation(std::span<const Mass> node_masses,
                             std::span<const Message> in_flight, const Average& avg) {
    std::int64_t sum_y = 0;
    std::uint64_t sum_z = 0;
    for (const Mass& m : node_masses) {
        sum_y = checked_add(sum_y, m.y);
        sum_z = checked_add(sum_z, m.z);
    }
    for (const Message& m : in_flight) {
        if (m.kind != MsgKind::MassUnicast) continue;
        sum_y = checked_add(sum_y, m.y);
        sum_z = checked_add(sum_z, m.z);
    }
    return sum_y == avg.total && sum_z == static_cast<std::uint64_t>(avg.count);
}

std::optional<long> convergence_round(const Trace& trace) {
    const auto& conv = trace.converged;
    if (conv.empty() || !conv.back()) return std::nullopt;
    long k = static_cast<long>(conv.size()) - 1;
    while (k > 0 && conv[k - 1]) --k;
    return k;
}

std::int64_t theoretical_bound_alg3(int n, std::int64_t m) {
    if (n < 2) throw ValidationError("bound needs n >= 2");
    if (m < n) throw ValidationError("a strongly connected digraph has m >= n");
    const std::int64_t nn = n;
    return checked_add(checked_add(checked_mul(nn - 1, nn), checked_mul(nn - 1, checked_mul(m, m))),
                       nn);
}

long default_max_rounds(int n, std::int64_t m) {
    return static_cast<long>(checked_mul(10, theoretical_bound_alg3(n, m)));
}

std::vector<RoundMetrics> round_metrics(const Trace& trace) {
    if (trace.snapshots.empty())
        throw ValidationError("round metrics need a recorded trace");
    std::vector<RoundMetrics> out;
    out.reserve(trace.snapshots.size());
    for (std::size_t k = 0; k < trace.snapshots.size(); ++k) {
        const auto& row = trace.snapshots[k];
        RoundMetrics rm;
        rm.round = static_cast<long>(k);
        std::vector<Mass> masses(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) {
            masses[j] = row[j].mass;
            if (row[j].mass.z > 0) ++rm.vplus;
        }
        rm.leading = leading_mass_nodes(masses);
        if (k < trace.mass_events.size()) {
            rm.mass_msgs = trace.mass_events[k];
            rm.broadcast_msgs = trace.bcast_events[k];
        }
        rm.converged = trace.converged[k] != 0;
        out.push_back(std::move(rm));
    }
    return out;
}

namespace {

struct AuditState {
    InvariantReport report;
    std::set<std::string> failed;

    void violated(const std::string& name, long round, std::string detail) {
        failed.insert(name);
        report.violations.push_back({name, round, std::move(detail)});
    }
    void ran(const std::string& name) { report.checked.push_back(name); }
    void skip(const std::string& name, const std::string& why) {
        report.skipped.push_back(name + ": " + why);
    }
};

}  // namespace

InvariantReport audit_rows(Algorithm alg, std::span<const RawNodeRow> rows,
                           std::span<const RawMsgRow> msgs) {
    if (rows.empty()) throw ValidationError("no trace rows to audit");

    // Reassemble the table: rounds 0..K, each covering nodes 0..n-1 exactly.
    long max_round = 0;
    NodeId max_node = 0;
    for (const RawNodeRow& r : rows) {
        if (r.round < 0 || r.node < 0) throw ValidationError("negative round or node id");
        max_round = std::max(max_round, r.round);
        max_node = std::max(max_node, r.node);
    }
    const int n = max_node + 1;
    const long rounds = max_round;
    if (rows.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(rounds + 1))
        throw ValidationError("trace rows do not form a full (round, node) table");
    std::vector<std::vector<const RawNodeRow*>> table(rounds + 1,
                                                      std::vector<const RawNodeRow*>(n, nullptr));
    for (const RawNodeRow& r : rows) {
        if (table[r.round][r.node]) throw ValidationError("duplicate (round, node) row");
        table[r.round][r.node] = &r;
    }

    AuditState a;

    a.ran("cells");
    for (long k = 0; k <= rounds; ++k) {
        for (NodeId j = 0; j < n; ++j) {
            const RawNodeRow& r = *table[k][j];
            if (r.z < 0) a.violated("cells", k, "negative mass count at node " + std::to_string(j + 1));
            if (r.zs < 1) a.violated("cells", k, "state count below 1 at node " + std::to_string(j + 1));
            if (r.z == 0 && r.y != 0)
                a.violated("cells", k, "zero-count mass with nonzero value at node " +
                                           std::to_string(j + 1));
        }
    }

    a.ran("mass-conservation");
    std::int64_t ref_y = 0, ref_z = 0;
    for (NodeId j = 0; j < n; ++j) {
        ref_y = checked_add(ref_y, table[0][j]->y);
        ref_z = checked_add(ref_z, table[0][j]->z);
    }
    for (long k = 1; k <= rounds; ++k) {
        std::int64_t sy = 0, sz = 0;
        for (NodeId j = 0; j < n; ++j) {
            sy = checked_add(sy, table[k][j]->y);
            sz = checked_add(sz, table[k][j]->z);
        }
        if (sy != ref_y || sz != ref_z)
            a.violated("mass-conservation", k,
                       "sums (" + std::to_string(sy) + ", " + std::to_string(sz) +
                           ") differ from round 0 (" + std::to_string(ref_y) + ", " +
                           std::to_string(ref_z) + ")");
    }

    const bool cells_ok = !a.failed.contains("cells");

    a.ran("vplus-monotone");
    int prev_vplus = -1;
    for (long k = 0; k <= rounds; ++k) {
        int vplus = 0;
        for (NodeId j = 0; j < n; ++j)
            if (table[k][j]->z > 0) ++vplus;
        if (vplus < 1) a.violated("vplus-monotone", k, "no node holds mass");
        if (prev_vplus >= 0 && vplus > prev_vplus)
            a.violated("vplus-monotone", k,
                       "|V+| grew from " + std::to_string(prev_vplus) + " to " +
                           std::to_string(vplus));
        prev_vplus = vplus;
    }

    a.ran("state-monotone");
    for (long k = 1; k <= rounds; ++k) {
        for (NodeId j = 0; j < n; ++j) {
            const RawNodeRow& prev = *table[k - 1][j];
            const RawNodeRow& cur = *table[k][j];
            const bool bad = alg == Algorithm::Alg1
                                 ? cur.zs < prev.zs
                                 : (cur.zs != prev.zs ? cur.zs < prev.zs : cur.ys < prev.ys);
            if (bad)
                a.violated("state-monotone", k,
                           "state of node " + std::to_string(j + 1) + " moved backwards");
        }
    }

    // The leading-mass checks need valid cells and the message log.
    auto leading_of_round = [&](long k) {
        std::vector<Mass> masses(n);
        for (NodeId j = 0; j < n; ++j)
            masses[j] = Mass{table[k][j]->y, static_cast<std::uint64_t>(table[k][j]->z)};
        return leading_mass_nodes(masses);
    };
    std::vector<std::set<NodeId>> mass_senders(rounds + 1);
    for (const RawMsgRow& m : msgs)
        if (m.kind == MsgKind::MassUnicast && m.round >= 0 && m.round <= rounds)
            mass_senders[m.round].insert(m.sender);

    if (!cells_ok) {
        if (alg == Algorithm::Alg2) a.skip("leading-transmits", "invalid cells");
        if (alg == Algorithm::Alg3) {
            a.skip("leading-holds-mass", "invalid cells");
            a.skip("state-dominance", "invalid cells");
            a.skip("quiescence-stable", "invalid cells");
        }
        return a.report;
    }
    if (msgs.empty() && alg != Algorithm::Alg1) {
        a.skip(alg == Algorithm::Alg2 ? "leading-transmits" : "leading-holds-mass",
               "no message log");
    } else if (alg == Algorithm::Alg2) {
        a.ran("leading-transmits");
        for (long k = 0; k < rounds; ++k) {
            // A round-k trigger shows up as the post-merge row k+1 and a
            // unicast sent at round k.
            for (NodeId l : leading_of_round(k + 1))
                if (!mass_senders[k].contains(l))
                    a.violated("leading-transmits", k,
                               "leading holder v" + std::to_string(l + 1) + " sent nothing");
        }
    } else if (alg == Algorithm::Alg3) {
        a.ran("leading-holds-mass");
        for (long k = 0; k < rounds; ++k) {
            for (NodeId l : leading_of_round(k))
                if (mass_senders[k].contains(l))
                    a.violated("leading-holds-mass", k,
                               "leading holder v" + std::to_string(l + 1) + " released its mass");
        }
    }

    if (alg == Algorithm::Alg3) {
        a.ran("state-dominance");
        for (long k = 0; k <= rounds; ++k) {
            const auto leading = leading_of_round(k);
            if (leading.empty()) continue;  // already flagged by vplus
            const RawNodeRow& top = *table[k][leading.front()];
            for (NodeId j = 0; j < n; ++j) {
                const RawNodeRow& r = *table[k][j];
                if (lex_less(static_cast<std::uint64_t>(top.z), top.y,
                             static_cast<std::uint64_t>(r.zs), r.ys))
                    a.violated("state-dominance", k,
                               "state of node " + std::to_string(j + 1) +
                                   " exceeds the leading mass");
            }
        }

        a.ran("quiescence-stable");
        std::vector<std::uint64_t> sends(rounds + 1, 0);
        for (const RawMsgRow& m : msgs)
            if (m.round >= 0 && m.round <= rounds) ++sends[m.round];
        const std::int64_t total = ref_y;
        bool latch = false;
        for (long k = 0; k < rounds; ++k) {
            bool conv = true;
            for (NodeId j = 0; j < n && conv; ++j) {
                const RawNodeRow& r = *table[k][j];
                conv = static_cast<__int128>(r.ys) * n == static_cast<__int128>(r.zs) * total;
            }
            if (latch && sends[k] > 0)
                a.violated("quiescence-stable", k, "messages resumed after a quiet round");
            if (conv && sends[k] == 0) latch = true;
        }
    }

    return a.report;
}

InvariantReport audit_trace(const Trace& trace) {
    if (trace.snapshots.empty())
        throw ValidationError("auditing needs a recorded trace");
    std::vector<RawNodeRow> rows;
    rows.reserve(trace.snapshots.size() * trace.snapshots[0].size());
    for (std::size_t k = 0; k < trace.snapshots.size(); ++k) {
        const auto& row = trace.snapshots[k];
        for (std::size_t j = 0; j < row.size(); ++j) {
            rows.push_back(RawNodeRow{static_cast<long>(k), static_cast<NodeId>(j),
                                      row[j].mass.y, static_cast<std::int64_t>(row[j].mass.z),
                                      row[j].state.ys, static_cast<std::int64_t>(row[j].state.zs)});
        }
    }
    std::vector<RawMsgRow> msgs;
    msgs.reserve(trace.messages.size());
    for (const Message& m : trace.messages)
        msgs.push_back(RawMsgRow{m.send_round, m.kind, m.sender, m.receiver, m.y,
                                 static_cast<std::int64_t>(m.z)});
    return audit_rows(trace.algorithm, rows, msgs);
}

}  // namespace qac
