#include "qac/sweep.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qac {

namespace {

SweepRunResult run_one(const InstanceMaker& make, std::uint64_t seed) {
    SweepRunResult r;
    r.seed = seed;
    try {
        RunConfig cfg = make(seed);
        cfg.record_trace = false;  // sweeps keep per-round aggregates only
        Trace t = run(cfg);
        r.n = t.n;
        r.m = t.m;
        r.k0 = t.term.k0;
        r.reason = t.term.reason;
        r.mass_msgs = t.term.mass_msgs;
        r.broadcast_msgs = t.term.broadcast_msgs;
        r.spread = std::move(t.spread);
        r.converged = std::move(t.converged);
    } catch (const OverflowError& e) {
        r.error = RunErrorKind::Overflow;
        r.error_text = e.what();
    } catch (const InvariantError& e) {
        r.error = RunErrorKind::Invariant;
        r.error_text = e.what();
    } catch (const ValidationError& e) {
        r.error = RunErrorKind::Validation;
        r.error_text = e.what();
    }
    return r;
}

Distribution distribution(std::vector<long> values) {
    Distribution d;
    if (values.empty()) return d;
    std::sort(values.begin(), values.end());
    d.min = values.front();
    d.max = values.back();
    double sum = 0;
    for (long v : values) sum += static_cast<double>(v);
    d.mean = sum / static_cast<double>(values.size());
    const std::size_t mid = values.size() / 2;
    d.median = values.size() % 2 ? static_cast<double>(values[mid])
                                 : (static_cast<double>(values[mid - 1]) +
                                    static_cast<double>(values[mid])) / 2.0;
    return d;
}

SweepSummary summarize(std::vector<SweepRunResult> runs) {
    SweepSummary s;
    s.run_count = runs.size();
    std::vector<long> k0s;
    std::vector<long> msgs;
    for (const SweepRunResult& r : runs) {
        if (!r.ok()) {
            ++s.error_count;
            continue;
        }
        if (r.k0) {
            ++s.converged_count;
            k0s.push_back(*r.k0);
        }
        msgs.push_back(static_cast<long>(r.mass_msgs + r.broadcast_msgs));
    }
    s.frac_converged = runs.empty() ? 0.0
                                    : static_cast<double>(s.converged_count) /
                                          static_cast<double>(runs.size());
    s.k0_dist = distribution(std::move(k0s));
    s.msgs_dist = distribution(std::move(msgs));
    s.runs = std::move(runs);
    return s;
}

bool spread_less(const StateSpread& a, const StateSpread& b) {
    return static_cast<__int128>(a.num) * static_cast<__int128>(b.den) <
           static_cast<__int128>(b.num) * static_cast<__int128>(a.den);
}

}  // namespace

SweepSummary sweep_serial(const InstanceMaker& make, std::span<const std::uint64_t> seeds) {
    std::vector<SweepRunResult> runs(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) runs[i] = run_one(make, seeds[i]);
    return summarize(std::move(runs));
}

SweepSummary sweep_parallel(const InstanceMaker& make, std::span<const std::uint64_t> seeds,
                            int threads) {
    std::vector<SweepRunResult> runs(seeds.size());
#ifdef _OPENMP
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(seeds.size()); ++i)
        runs[i] = run_one(make, seeds[i]);
#else
    (void)threads;
    for (std::size_t i = 0; i < seeds.size(); ++i) runs[i] = run_one(make, seeds[i]);
#endif
    return summarize(std::move(runs));
}

std::vector<PlotRow> plot_data(const SweepSummary& summary) {
    std::size_t rounds = 0;
    std::size_t usable = 0;
    for (const SweepRunResult& r : summary.runs) {
        if (!r.ok() || r.spread.empty()) continue;
        ++usable;
        rounds = std::max(rounds, r.spread.size());
    }
    std::vector<PlotRow> out;
    if (usable == 0) return out;
    out.reserve(rounds);
    for (std::size_t k = 0; k < rounds; ++k) {
        PlotRow row;
        row.round = static_cast<long>(k);
        double sum = 0.0;
        StateSpread max_sp{0, 1};
        std::size_t conv = 0;
        for (const SweepRunResult& r : summary.runs) {
            if (!r.ok() || r.spread.empty()) continue;
            const std::size_t i = std::min(k, r.spread.size() - 1);
            const StateSpread& sp = r.spread[i];
            sum += static_cast<double>(sp.num) / static_cast<double>(sp.den);
            if (spread_less(max_sp, sp)) max_sp = sp;
            if (r.converged[i]) ++conv;
        }
        row.mean_spread = sum / static_cast<double>(usable);
        row.max_spread = static_cast<double>(max_sp.num) / static_cast<double>(max_sp.den);
        row.frac_converged = static_cast<double>(conv) / static_cast<double>(usable);
        out.push_back(row);
    }
    return out;
}

}  // namespace qac
