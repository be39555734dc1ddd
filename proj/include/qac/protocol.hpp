#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "qac/checked.hpp"

namespace qac {

// Transferable (value, count) pair. z counts how many of the n initial unit
// masses have merged into it; z == 0 implies y == 0 in any well-formed run.
struct Mass {
    std::int64_t y = 0;
    std::uint64_t z = 0;

    friend bool operator==(const Mass&, const Mass&) = default;
};

// A node's current estimate of the average, held as an exact integer ratio
// ys/zs. zs >= 1 from initialization on; the quotient is only ever rendered
// as a float at trace-output time.
struct StatePair {
    std::int64_t ys = 0;
    std::uint64_t zs = 0;

    friend bool operator==(const StatePair&, const StatePair&) = default;
};

// Per-node protocol state. rr_pointer indexes the node's priority-ordered
// out-neighbor list: the next unicast recipient.
struct NodeState {
    Mass mass;
    StatePair state;
    int rr_pointer = 0;
};

// Exact network average: total / count, never reduced or rounded.
struct Average {
    std::int64_t total = 0;
    int count = 0;
};

// Lexicographic order on (count, value) pairs; used for masses and states alike.
constexpr bool lex_less(std::uint64_t za, std::int64_t ya, std::uint64_t zb, std::int64_t yb) {
    return za != zb ? za < zb : ya < yb;
}

constexpr bool lex_less(const Mass& a, const Mass& b) { return lex_less(a.z, a.y, b.z, b.y); }

constexpr bool lex_less(const StatePair& a, const StatePair& b) {
    return lex_less(a.zs, a.ys, b.zs, b.ys);
}

inline Average exact_average(std::span<const std::int64_t> initial_values) {
    if (initial_values.size() < 2)
        throw ValidationError("need at least 2 initial values, got " +
                              std::to_string(initial_values.size()));
    std::int64_t total = 0;
    for (std::int64_t v : initial_values) total = checked_add(total, v);
    return Average{total, static_cast<int>(initial_values.size())};
}

// Componentwise sum of everything that arrived in one round plus what the
// node already held.
inline Mass merge_masses(Mass own, std::span<const Mass> incoming) {
    for (const Mass& m : incoming) {
        own.y = checked_add(own.y, m.y);
        own.z = checked_add(own.z, m.z);
    }
    return own;
}

// The randomized protocol adopts the merged mass whenever its count reaches
// the state's count. No value tie-break, on purpose.
constexpr bool alg1_trigger(const Mass& mass, const StatePair& state) {
    return mass.z >= state.zs;
}

// Event trigger of the round-robin protocol: strictly larger count, or equal
// count with value at least as large.
constexpr bool alg2_trigger(const Mass& mass, const StatePair& state) {
    return mass.z > state.zs || (mass.z == state.zs && mass.y >= state.ys);
}

// Self-stopping protocol, state absorption: if any received state dominates
// the node's own, return the lexicographic max over received states and the
// own state (so the result is never a downgrade). Absent when nothing
// dominates.
inline std::optional<StatePair> alg3_state_update(const StatePair& own,
                                                  std::span<const StatePair> received) {
    bool dominated = false;
    for (const StatePair& r : received) {
        if (lex_less(own, r)) {
            dominated = true;
            break;
        }
    }
    if (!dominated) return std::nullopt;
    StatePair best = own;
    for (const StatePair& r : received) {
        if (lex_less(best, r)) best = r;
    }
    return best;
}

// Self-stopping protocol: a node releases its (nonzero) mass when it lags
// the node's state.
constexpr bool alg3_send_trigger(const Mass& mass, const StatePair& state) {
    return (0 < mass.z && mass.z < state.zs) || (mass.z == state.zs && mass.y < state.ys);
}

// Self-stopping protocol: a node adopts its merged mass when it exceeds the
// node's state. Strict counterpart of alg3_send_trigger; both are false
// exactly when (z, y) == (zs, ys) or z == 0.
constexpr bool alg3_adopt_trigger(const Mass& mass, const StatePair& state) {
    return mass.z > state.zs || (mass.z == state.zs && mass.y > state.ys);
}

// ys/zs == total/count, by cross-multiplication in 128 bits. Exact.
constexpr bool state_equals_average(const StatePair& state, const Average& avg) {
    return static_cast<__int128>(state.ys) * avg.count ==
           static_cast<__int128>(state.zs) * static_cast<__int128>(avg.total);
}

}  // namespace qac
