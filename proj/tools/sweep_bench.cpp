// Times the serial reference sweep against the OpenMP-parallel one on the
// same workload and verifies they produce identical results.
//
// Usage: sweep_bench [count] [n] [alg1|alg2|alg3]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "qac/analysis.hpp"
#include "qac/sweep.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace qac;

namespace {

template <typename F>
double seconds(F&& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool equal_runs(const SweepSummary& a, const SweepSummary& b) {
    if (a.runs.size() != b.runs.size()) return false;
    for (std::size_t i = 0; i < a.runs.size(); ++i)
        if (a.runs[i].k0 != b.runs[i].k0 || a.runs[i].mass_msgs != b.runs[i].mass_msgs ||
            a.runs[i].broadcast_msgs != b.runs[i].broadcast_msgs)
            return false;
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t count = 400;
    int n = 20;
    Algorithm alg = Algorithm::Alg1;
    if (argc > 1) count = std::strtoul(argv[1], nullptr, 10);
    if (argc > 2) n = std::atoi(argv[2]);
    if (argc > 3) {
        if (std::strcmp(argv[3], "alg1") == 0) alg = Algorithm::Alg1;
        else if (std::strcmp(argv[3], "alg2") == 0) alg = Algorithm::Alg2;
        else if (std::strcmp(argv[3], "alg3") == 0) alg = Algorithm::Alg3;
        else {
            std::fprintf(stderr, "unknown algorithm '%s'\n", argv[3]);
            return 1;
        }
    }

    const InstanceMaker make = [n, alg](std::uint64_t seed) {
        RunConfig cfg;
        cfg.algorithm = alg;
        cfg.graph = gen_random_strongly_connected(n, 0.1, seed);
        Rng vals(seed ^ 0xbeefULL);
        cfg.initial_values.resize(n);
        for (auto& v : cfg.initial_values)
            v = -50 + static_cast<std::int64_t>(vals.below(101));
        cfg.seed = seed;
        if (alg == Algorithm::Alg1) {
            cfg.probabilities = ProbabilityAssignment::uniform(cfg.graph);
            cfg.max_rounds = 100000;
        } else {
            cfg.priorities = PriorityMap::by_node_index(cfg.graph);
            cfg.max_rounds = default_max_rounds(n, cfg.graph.edge_count());
        }
        return cfg;
    };
    std::vector<std::uint64_t> seeds(count);
    for (std::size_t i = 0; i < count; ++i) seeds[i] = i;

    std::printf("sweep benchmark: %zu %s runs on random n=%d digraphs\n", count,
                to_string(alg), n);
#ifdef _OPENMP
    std::printf("openmp: %d threads available\n", omp_get_max_threads());
#else
    std::printf("openmp: not compiled in; parallel path falls back to serial\n");
#endif

    SweepSummary serial_result, parallel_result;
    const double t_serial = seconds([&] { serial_result = sweep_serial(make, seeds); });
    const double t_parallel = seconds([&] { parallel_result = sweep_parallel(make, seeds); });

    if (!equal_runs(serial_result, parallel_result)) {
        std::printf("MISMATCH: parallel sweep diverged from the serial reference\n");
        return 1;
    }
    std::printf("serial:   %8.3f s\n", t_serial);
    std::printf("parallel: %8.3f s  (speedup %.2fx)\n", t_parallel,
                t_parallel > 0 ? t_serial / t_parallel : 0.0);
    std::printf("results identical; frac_converged=%.3f k0_max=%ld\n",
                serial_result.frac_converged, serial_result.k0_dist.max);
    return 0;
}
