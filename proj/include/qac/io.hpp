#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qac/analysis.hpp"
#include "qac/sweep.hpp"

namespace qac {

// Plain-text formats, all 1-based node ids:
//   graph file:    "n m" on the first line, then m lines "receiver sender"
//   priority file: one "node neighbor order" line per out-edge (order 0-based)
//   values file:   whitespace-separated integers
Digraph read_graph_file(const std::filesystem::path& path);
PriorityMap read_priority_file(const std::filesystem::path& path, const Digraph& g);
std::vector<std::int64_t> read_values_file(const std::filesystem::path& path);

// trace CSV:    round,node,y,z,ys,zs,q_float   (one row per snapshot cell)
// messages CSV: round,kind,sender,receiver,y,z (round = send round, -1 for
//               initialization transmissions; broadcasts take one row per
//               receiver)
void write_trace_csv(std::ostream& os, const Trace& trace);
void write_messages_csv(std::ostream& os, const Trace& trace);
void write_summary_json(std::ostream& os, const Trace& trace);

// sweep CSV: seed,n,m,k0,terminated_by,mass_msgs,broadcast_msgs (k0 = -1 when
// the run did not converge); plot CSV: round,mean_spread,max_spread,
// frac_converged.
void write_sweep_csv(std::ostream& os, const SweepSummary& summary);
void write_plot_csv(std::ostream& os, std::span<const PlotRow> rows);

// Parsed-back run, kept raw so corrupted files can still be audited.
struct LoadedRun {
    Algorithm algorithm = Algorithm::Alg2;
    std::vector<RawNodeRow> rows;
    std::vector<RawMsgRow> msgs;
};

LoadedRun read_run_files(const std::filesystem::path& trace_csv,
                         const std::filesystem::path& messages_csv,
                         const std::filesystem::path& summary_json);

// %.12g rendering used everywhere a ratio becomes a float.
std::string render_float(double v);

}  // namespace qac
