#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qac {

// Fatal for the run that raised it, not for the process. Raised instead of
// letting 64-bit arithmetic wrap.
struct OverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input: graph, priority list, values, config, file contents.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A protocol invariant failed during a checked run.
struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r))
        throw OverflowError("signed 64-bit add overflow: " + std::to_string(a) + " + " +
                            std::to_string(b));
    return r;
}

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    if (__builtin_add_overflow(a, b, &r))
        throw OverflowError("unsigned 64-bit add overflow: " + std::to_string(a) + " + " +
                            std::to_string(b));
    return r;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r))
        throw OverflowError("signed 64-bit multiply overflow: " + std::to_string(a) + " * " +
                            std::to_string(b));
    return r;
}

}  // namespace qac
