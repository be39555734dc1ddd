#include "qac/golden.hpp"

#include "qac/analysis.hpp"

namespace qac {

namespace {

NodeSnapshot cell(std::int64_t y, std::uint64_t z, std::int64_t ys, std::uint64_t zs) {
    return NodeSnapshot{Mass{y, z}, StatePair{ys, zs}};
}

GoldenFixture make_ring() {
    GoldenFixture f;
    f.name = "ring";
    f.algorithm = Algorithm::Alg2;
    f.n = 4;
    // v1 -> v2 -> v3 -> v4 -> v1 (stored 0-based as (receiver, sender))
    f.edges = {{1, 0}, {2, 1}, {3, 2}, {0, 3}};
    f.values = {9, 3, 9, 3};
    f.expected = {
        {cell(9, 1, 9, 1), cell(3, 1, 3, 1), cell(9, 1, 9, 1), cell(3, 1, 3, 1)},
        {cell(3, 1, 9, 1), cell(9, 1, 9, 1), cell(3, 1, 9, 1), cell(9, 1, 9, 1)},
        {cell(12, 2, 12, 2), cell(0, 0, 9, 1), cell(12, 2, 12, 2), cell(0, 0, 9, 1)},
        {cell(0, 0, 12, 2), cell(12, 2, 12, 2), cell(0, 0, 12, 2), cell(12, 2, 12, 2)},
    };
    f.k0 = 3;
    return f;
}

GoldenFixture make_stopping() {
    GoldenFixture f;
    f.name = "stopping";
    f.algorithm = Algorithm::Alg3;
    f.n = 4;
    // out-neighbors: v1 -> {v3, v4}, v2 -> {v1}, v3 -> {v1, v4}, v4 -> {v2}
    f.edges = {{2, 0}, {3, 0}, {0, 1}, {0, 2}, {3, 2}, {1, 3}};
    f.values = {2, 4, 7, 9};
    f.priorities = {
        {0, 3, 0}, {0, 2, 1},  // v1: v4 first, then v3
        {1, 0, 0},             // v2: v1
        {2, 0, 0}, {2, 3, 1},  // v3: v1 first, then v4
        {3, 1, 0},             // v4: v2
    };
    f.expected = {
        {cell(2, 1, 2, 1), cell(4, 1, 4, 1), cell(7, 1, 7, 1), cell(9, 1, 9, 1)},
        {cell(4, 1, 7, 1), cell(0, 0, 9, 1), cell(7, 1, 7, 1), cell(11, 2, 11, 2)},
        {cell(0, 0, 9, 1), cell(0, 0, 9, 1), cell(11, 2, 11, 2), cell(11, 2, 11, 2)},
        {cell(0, 0, 9, 1), cell(0, 0, 11, 2), cell(11, 2, 11, 2), cell(11, 2, 11, 2)},
        {cell(0, 0, 11, 2), cell(0, 0, 11, 2), cell(11, 2, 11, 2), cell(11, 2, 11, 2)},
    };
    f.k0 = 4;
    return f;
}

}  // namespace

const GoldenFixture& golden_ring() {
    static const GoldenFixture f = make_ring();
    return f;
}

const GoldenFixture& golden_stopping() {
    static const GoldenFixture f = make_stopping();
    return f;
}

RunConfig golden_config(const GoldenFixture& f, long max_rounds, TerminationPolicy policy) {
    RunConfig cfg;
    cfg.algorithm = f.algorithm;
    cfg.graph = Digraph::build(f.n, f.edges);
    cfg.initial_values = f.values;
    if (f.priorities.empty())
        cfg.priorities = PriorityMap::by_node_index(cfg.graph);
    else
        cfg.priorities = PriorityMap::from_entries(cfg.graph, f.priorities);
    cfg.max_rounds = max_rounds;
    cfg.termination = policy;
    return cfg;
}

std::optional<GoldenMismatch> golden_diff_table(const GoldenFixture& f, const Trace& trace,
                                                std::size_t k) {
    if (k >= trace.snapshots.size())
        return GoldenMismatch{static_cast<long>(k), 0, "missing round", 0, 0};
    const auto& want = f.expected[k];
    const auto& got = trace.snapshots[k];
    for (std::size_t j = 0; j < want.size(); ++j) {
        auto diff = [&](const char* field, std::int64_t w, std::int64_t g)
            -> std::optional<GoldenMismatch> {
            if (w == g) return std::nullopt;
            return GoldenMismatch{static_cast<long>(k), static_cast<NodeId>(j), field, w, g};
        };
        if (auto d = diff("y", want[j].mass.y, got[j].mass.y)) return d;
        if (auto d = diff("z", static_cast<std::int64_t>(want[j].mass.z),
                          static_cast<std::int64_t>(got[j].mass.z)))
            return d;
        if (auto d = diff("ys", want[j].state.ys, got[j].state.ys)) return d;
        if (auto d = diff("zs", static_cast<std::int64_t>(want[j].state.zs),
                          static_cast<std::int64_t>(got[j].state.zs)))
            return d;
    }
    return std::nullopt;
}

std::optional<GoldenMismatch> golden_diff(const GoldenFixture& f, const Trace& trace) {
    for (std::size_t k = 0; k < f.expected.size(); ++k)
        if (auto d = golden_diff_table(f, trace, k)) return d;
    return std::nullopt;
}

}  // namespace qac
