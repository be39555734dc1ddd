#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qac/engine.hpp"

namespace qac {

enum class RunErrorKind { None, Validation, Overflow, Invariant };

struct SweepRunResult {
    std::uint64_t seed = 0;
    int n = 0;
    std::int64_t m = 0;
    std::optional<long> k0;
    StopReason reason = StopReason::RoundCap;
    std::uint64_t mass_msgs = 0;
    std::uint64_t broadcast_msgs = 0;
    std::vector<StateSpread> spread;  // per snapshot
    std::vector<char> converged;      // per snapshot
    RunErrorKind error = RunErrorKind::None;
    std::string error_text;

    bool ok() const { return error == RunErrorKind::None; }
};

struct Distribution {
    long min = 0;
    long max = 0;
    double mean = 0.0;
    double median = 0.0;
};

struct SweepSummary {
    std::vector<SweepRunResult> runs;  // always in seed order
    std::size_t run_count = 0;
    std::size_t error_count = 0;
    std::size_t converged_count = 0;  // runs whose trace ends converged
    double frac_converged = 0.0;
    Distribution k0_dist;    // over converged runs
    Distribution msgs_dist;  // total events per run, both kinds
};

// Builds the config for one sweep instance. Called concurrently by the
// parallel sweep, so it must be a pure function of the seed.
using InstanceMaker = std::function<RunConfig(std::uint64_t seed)>;

// Reference implementation: runs instances one after another in seed order.
SweepSummary sweep_serial(const InstanceMaker& make, std::span<const std::uint64_t> seeds);

// Same results, instances spread over OpenMP threads (0 = library default).
// Each run lands in its own slot and the reduction happens in seed order, so
// the summary is identical to sweep_serial's.
SweepSummary sweep_parallel(const InstanceMaker& make, std::span<const std::uint64_t> seeds,
                            int threads = 0);

struct PlotRow {
    long round = 0;
    double mean_spread = 0.0;
    double max_spread = 0.0;
    double frac_converged = 0.0;
};

// Per-round aggregation across the sweep's successful runs. Runs shorter than
// a round contribute their terminal values; spreads are compared exactly and
// rendered to floats only here.
std::vector<PlotRow> plot_data(const SweepSummary& summary);

}  // namespace qac
