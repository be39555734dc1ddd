// Command-line front end: run one protocol instance, sweep many, replay the
// embedded reference tables, or audit previously written trace files.
//
// Exit codes: 0 success, 1 validation/config error, 2 invariant or golden
// mismatch, 3 runtime (overflow) error.
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "qac/analysis.hpp"
#include "qac/golden.hpp"
#include "qac/io.hpp"
#include "qac/sweep.hpp"

namespace fs = std::filesystem;
using namespace qac;

namespace {

struct GraphSpec {
    enum class Kind { File, RingDirected, RingUndirected, Random } kind = Kind::RingDirected;
    std::string file;
    int n = 0;
    double p = 0.0;
    std::optional<std::uint64_t> seed;  // random graphs; defaults to --seed
};

struct ValueSpec {
    enum class Kind { List, File, Random } kind = Kind::List;
    std::vector<std::int64_t> list;
    std::string file;
    std::int64_t lo = 0, hi = 0;
    std::optional<std::uint64_t> seed;
};

std::vector<std::string> split_spec(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(':', start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::int64_t parse_int(const std::string& tok, const std::string& what) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("bad " + what + ": '" + tok + "'");
    }
}

GraphSpec parse_graph_spec(const std::string& spec) {
    GraphSpec g;
    const auto parts = split_spec(spec);
    if (parts[0] == "ring-directed" && parts.size() == 2) {
        g.kind = GraphSpec::Kind::RingDirected;
        g.n = static_cast<int>(parse_int(parts[1], "ring size"));
    } else if (parts[0] == "ring-undirected" && parts.size() == 2) {
        g.kind = GraphSpec::Kind::RingUndirected;
        g.n = static_cast<int>(parse_int(parts[1], "ring size"));
    } else if (parts[0] == "random" && (parts.size() == 3 || parts.size() == 4)) {
        g.kind = GraphSpec::Kind::Random;
        g.n = static_cast<int>(parse_int(parts[1], "graph size"));
        try {
            g.p = std::stod(parts[2]);
        } catch (const std::exception&) {
            throw ValidationError("bad edge probability: '" + parts[2] + "'");
        }
        if (parts.size() == 4)
            g.seed = static_cast<std::uint64_t>(parse_int(parts[3], "graph seed"));
    } else {
        throw ValidationError("graph spec must be ring-directed:N, ring-undirected:N or "
                              "random:N:P[:SEED], got '" + spec + "'");
    }
    return g;
}

ValueSpec parse_value_list(const std::string& csv) {
    ValueSpec v;
    v.kind = ValueSpec::Kind::List;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = csv.find(',', start);
        const std::string tok = csv.substr(start, pos == std::string::npos ? pos : pos - start);
        v.list.push_back(parse_int(tok, "value"));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return v;
}

ValueSpec parse_value_random(const std::string& spec) {
    const auto parts = split_spec(spec);
    if (parts.size() != 2 && parts.size() != 3)
        throw ValidationError("values-random spec must be LO:HI[:SEED], got '" + spec + "'");
    ValueSpec v;
    v.kind = ValueSpec::Kind::Random;
    v.lo = parse_int(parts[0], "value range");
    v.hi = parse_int(parts[1], "value range");
    if (v.lo > v.hi) throw ValidationError("values-random range is empty");
    if (parts.size() == 3) v.seed = static_cast<std::uint64_t>(parse_int(parts[2], "value seed"));
    return v;
}

Digraph make_graph(const GraphSpec& g, std::uint64_t fallback_seed) {
    switch (g.kind) {
        case GraphSpec::Kind::File: return read_graph_file(g.file);
        case GraphSpec::Kind::RingDirected: return gen_ring_directed(g.n);
        case GraphSpec::Kind::RingUndirected: return gen_ring_undirected(g.n);
        case GraphSpec::Kind::Random:
            return gen_random_strongly_connected(g.n, g.p, g.seed.value_or(fallback_seed));
    }
    std::abort();
}

std::vector<std::int64_t> make_values(const ValueSpec& v, int n, std::uint64_t fallback_seed) {
    switch (v.kind) {
        case ValueSpec::Kind::List: return v.list;
        case ValueSpec::Kind::File: return read_values_file(v.file);
        case ValueSpec::Kind::Random: {
            Rng rng(v.seed.value_or(fallback_seed));
            std::vector<std::int64_t> out(n);
            for (auto& x : out)
                x = v.lo + static_cast<std::int64_t>(
                               rng.below(static_cast<std::uint64_t>(v.hi - v.lo + 1)));
            return out;
        }
    }
    std::abort();
}

Algorithm parse_algorithm(const std::string& s) {
    if (s == "alg1") return Algorithm::Alg1;
    if (s == "alg2") return Algorithm::Alg2;
    if (s == "alg3") return Algorithm::Alg3;
    throw ValidationError("unknown algorithm '" + s + "' (expected alg1, alg2 or alg3)");
}

TerminationPolicy parse_termination(const std::string& s) {
    if (s == "oracle-convergence") return TerminationPolicy::Convergence;
    if (s == "quiescence") return TerminationPolicy::Quiescence;
    if (s == "round-cap") return TerminationPolicy::RoundCap;
    if (s == "all") return TerminationPolicy::All;
    throw ValidationError("unknown termination policy '" + s + "'");
}

fs::path output_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("QACSIM_OUT_DIR"); env && *env) return env;
    return ".";
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    body(out);
}

// Shared run/sweep options gathered from the command line.
struct CommonOpts {
    std::string algorithm = "alg2";
    std::string graph_spec;
    std::string graph_file;
    std::string values_csv;
    std::string values_file;
    std::string values_random;
    std::string priorities = "by-index";
    std::string termination = "oracle-convergence";
    std::uint64_t seed = 0;
    long max_rounds = 0;  // 0: default cap
    std::string out_dir;

    GraphSpec graph() const {
        const int sources = int(!graph_spec.empty()) + int(!graph_file.empty());
        if (sources != 1)
            throw ValidationError("exactly one of --graph and --graph-file is required");
        if (!graph_file.empty()) {
            GraphSpec g;
            g.kind = GraphSpec::Kind::File;
            g.file = graph_file;
            return g;
        }
        return parse_graph_spec(graph_spec);
    }

    ValueSpec values() const {
        const int sources =
            int(!values_csv.empty()) + int(!values_file.empty()) + int(!values_random.empty());
        if (sources != 1)
            throw ValidationError(
                "exactly one of --values, --values-file and --values-random is required");
        if (!values_csv.empty()) return parse_value_list(values_csv);
        if (!values_file.empty()) {
            ValueSpec v;
            v.kind = ValueSpec::Kind::File;
            v.file = values_file;
            return v;
        }
        return parse_value_random(values_random);
    }

    RunConfig config(std::uint64_t run_seed) const {
        RunConfig cfg;
        cfg.algorithm = parse_algorithm(algorithm);
        cfg.graph = make_graph(graph(), run_seed);
        cfg.initial_values = make_values(values(), cfg.graph.node_count(), run_seed);
        cfg.seed = run_seed;
        cfg.termination = parse_termination(termination);
        cfg.max_rounds = max_rounds > 0 ? max_rounds
                                        : default_max_rounds(cfg.graph.node_count(),
                                                             cfg.graph.edge_count());
        if (cfg.algorithm == Algorithm::Alg1) {
            cfg.probabilities = ProbabilityAssignment::uniform(cfg.graph);
        } else if (priorities == "by-index") {
            cfg.priorities = PriorityMap::by_node_index(cfg.graph);
        } else {
            cfg.priorities = read_priority_file(priorities, cfg.graph);
        }
        return cfg;
    }
};

void add_common_options(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--alg", o.algorithm, "protocol: alg1, alg2 or alg3");
    cmd->add_option("--graph", o.graph_spec,
                    "ring-directed:N | ring-undirected:N | random:N:P[:SEED]");
    cmd->add_option("--graph-file", o.graph_file, "graph file ('n m' header, 'receiver sender' lines)");
    cmd->add_option("--values", o.values_csv, "comma-separated initial values");
    cmd->add_option("--values-file", o.values_file, "file of initial values");
    cmd->add_option("--values-random", o.values_random, "LO:HI[:SEED] uniform initial values");
    cmd->add_option("--priorities", o.priorities,
                    "'by-index' or a priority file ('node neighbor order' lines)");
    cmd->add_option("--termination", o.termination,
                    "oracle-convergence | quiescence | round-cap | all");
    cmd->add_option("--seed", o.seed, "run seed (alg1 stream; default graph/value seed)");
    cmd->add_option("--max-rounds", o.max_rounds, "round cap (default 10x the proof budget)");
    cmd->add_option("--out", o.out_dir, "output directory (or QACSIM_OUT_DIR)");
}

int cmd_run(const CommonOpts& opts) {
    const RunConfig cfg = opts.config(opts.seed);
    Trace t = run(cfg);

    const fs::path dir = output_dir(opts.out_dir);
    fs::create_directories(dir);
    write_file(dir / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, t); });
    write_file(dir / "messages.csv", [&](std::ostream& os) { write_messages_csv(os, t); });
    write_file(dir / "summary.json", [&](std::ostream& os) { write_summary_json(os, t); });

    std::cout << "k0=" << (t.term.k0 ? std::to_string(*t.term.k0) : "none")
              << " terminated_by=" << to_string(t.term.reason) << " rounds=" << t.term.rounds
              << " mass_msgs=" << t.term.mass_msgs << " broadcast_msgs=" << t.term.broadcast_msgs
              << '\n';
    return 0;
}

int cmd_sweep(const CommonOpts& opts, std::size_t count, int threads) {
    if (count < 1) throw ValidationError("sweep needs --count >= 1");
    std::vector<std::uint64_t> seeds(count);
    for (std::size_t i = 0; i < count; ++i) seeds[i] = opts.seed + i;

    const InstanceMaker make = [&opts](std::uint64_t seed) { return opts.config(seed); };
    const SweepSummary s = threads == 1 ? sweep_serial(make, seeds)
                                        : sweep_parallel(make, seeds, threads);

    const fs::path dir = output_dir(opts.out_dir);
    fs::create_directories(dir);
    write_file(dir / "sweep_summary.csv", [&](std::ostream& os) { write_sweep_csv(os, s); });
    const auto rows = plot_data(s);
    write_file(dir / "plot_data.csv", [&](std::ostream& os) { write_plot_csv(os, rows); });

    std::cout << "runs=" << s.run_count << " converged=" << s.converged_count
              << " frac_converged=" << render_float(s.frac_converged);
    if (s.converged_count > 0)
        std::cout << " k0_min=" << s.k0_dist.min << " k0_median=" << render_float(s.k0_dist.median)
                  << " k0_mean=" << render_float(s.k0_dist.mean) << " k0_max=" << s.k0_dist.max;
    std::cout << '\n';

    bool overflowed = false;
    for (const SweepRunResult& r : s.runs) {
        if (!r.ok()) {
            std::cerr << "seed " << r.seed << ": " << r.error_text << '\n';
            overflowed |= r.error == RunErrorKind::Overflow;
        }
    }
    if (s.error_count > 0) return overflowed ? 3 : 1;
    return 0;
}

int cmd_golden() {
    int tables_ok = 0, tables_total = 0;
    bool all_ok = true;
    for (const GoldenFixture* f : {&golden_ring(), &golden_stopping()}) {
        const long extra = f->algorithm == Algorithm::Alg3 ? 20 : 9;
        const long rounds = static_cast<long>(f->expected.size()) - 1 + extra;
        Trace t = run(golden_config(*f, rounds));

        for (std::size_t k = 0; k < f->expected.size(); ++k) {
            ++tables_total;
            const auto diff = golden_diff_table(*f, t, k);
            if (!diff) {
                ++tables_ok;
                std::cout << f->name << " table k=" << k << ": pass\n";
            } else {
                all_ok = false;
                std::cout << f->name << " table k=" << k << ": FAIL at node v"
                          << diff->node + 1 << " field " << diff->field << " (expected "
                          << diff->expected << ", got " << diff->actual << ")\n";
            }
        }
        const auto k0 = convergence_round(t);
        if (k0 != f->k0) {
            all_ok = false;
            std::cout << f->name << " k0: FAIL (expected " << f->k0 << ", got "
                      << (k0 ? std::to_string(*k0) : "none") << ")\n";
        } else {
            std::cout << f->name << " k0=" << f->k0 << ": pass\n";
        }
        if (f->algorithm == Algorithm::Alg3) {
            std::uint64_t after = 0;
            for (std::size_t k = f->k0; k < t.mass_events.size(); ++k)
                after += t.mass_events[k] + t.bcast_events[k];
            if (after != 0) {
                all_ok = false;
                std::cout << f->name << " silence after k0: FAIL (" << after << " messages)\n";
            } else {
                std::cout << f->name << " silence after k0: pass\n";
            }
        }
    }
    std::cout << "golden: " << tables_ok << "/" << tables_total << " tables match\n";
    return all_ok ? 0 : 2;
}

int cmd_check(const std::string& dir_flag, std::string trace_file, std::string messages_file,
              std::string summary_file) {
    const fs::path dir = dir_flag.empty() ? output_dir("") : fs::path(dir_flag);
    if (trace_file.empty()) trace_file = (dir / "trace.csv").string();
    if (messages_file.empty()) messages_file = (dir / "messages.csv").string();
    if (summary_file.empty()) summary_file = (dir / "summary.json").string();

    const LoadedRun loaded = read_run_files(trace_file, messages_file, summary_file);
    const InvariantReport rep = audit_rows(loaded.algorithm, loaded.rows, loaded.msgs);

    std::set<std::string> violated;
    for (const auto& v : rep.violations) violated.insert(v.invariant);
    for (const std::string& name : rep.checked)
        std::cout << "invariant " << name << ": " << (violated.contains(name) ? "FAIL" : "ok")
                  << '\n';
    for (const std::string& s : rep.skipped) std::cout << "invariant " << s << " (skipped)\n";
    for (const auto& v : rep.violations)
        std::cout << "  " << v.invariant << " at round " << v.round << ": " << v.detail << '\n';
    return rep.ok() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"event-triggered quantized average consensus simulator"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    CLI::App* run_cmd = app.add_subcommand("run", "execute one protocol instance");
    add_common_options(run_cmd, run_opts);

    CommonOpts sweep_opts;
    std::size_t sweep_count = 1;
    int sweep_threads = 0;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run many seeded instances");
    add_common_options(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--count", sweep_count, "number of instances (seeds seed..seed+count-1)");
    sweep_cmd->add_option("--threads", sweep_threads, "worker threads (0 = default, 1 = serial)");

    CLI::App* golden_cmd =
        app.add_subcommand("golden", "replay the embedded reference runs and diff every cell");

    std::string check_dir, check_trace, check_messages, check_summary;
    CLI::App* check_cmd = app.add_subcommand("check", "audit previously written trace files");
    check_cmd->add_option("dir", check_dir, "directory holding trace.csv/messages.csv/summary.json");
    check_cmd->add_option("--trace", check_trace, "trace CSV path");
    check_cmd->add_option("--messages", check_messages, "message CSV path");
    check_cmd->add_option("--summary", check_summary, "summary JSON path");

    try {
        app.parse(argc, argv);
        if (run_cmd->parsed()) return cmd_run(run_opts);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts, sweep_count, sweep_threads);
        if (golden_cmd->parsed()) return cmd_golden();
        if (check_cmd->parsed())
            return cmd_check(check_dir, check_trace, check_messages, check_summary);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const OverflowError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const InvariantError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
