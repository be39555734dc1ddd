#include "qac/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace qac {

namespace {

std::string loc(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::int64_t parse_i64(const std::string& tok, const std::string& where) {
    std::int64_t v = 0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw ValidationError(where + ": expected an integer, got '" + tok + "'");
    return v;
}

double parse_double(const std::string& tok, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(where + ": expected a number, got '" + tok + "'");
    }
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    return in;
}

NodeId to_internal(std::int64_t one_based, int n, const std::string& where) {
    if (one_based < 1 || one_based > n)
        throw ValidationError(where + ": node id " + std::to_string(one_based) +
                              " out of range 1.." + std::to_string(n));
    return static_cast<NodeId>(one_based - 1);
}

}  // namespace

std::string render_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

Digraph read_graph_file(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
    ++lineno;
    std::istringstream head(line);
    std::int64_t n = 0, m = 0;
    std::string extra;
    if (!(head >> n >> m) || (head >> extra))
        throw ValidationError(loc(path, lineno) + ": header must be 'n m'");
    if (n < 2) throw ValidationError(loc(path, lineno) + ": n must be at least 2");
    if (m < 0) throw ValidationError(loc(path, lineno) + ": negative edge count");

    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(m));
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream row(line);
        std::int64_t receiver = 0, sender = 0;
        if (!(row >> receiver >> sender) || (row >> extra))
            throw ValidationError(loc(path, lineno) + ": edge line must be 'receiver sender'");
        edges.push_back({to_internal(receiver, static_cast<int>(n), loc(path, lineno)),
                         to_internal(sender, static_cast<int>(n), loc(path, lineno))});
    }
    if (static_cast<std::int64_t>(edges.size()) != m)
        throw ValidationError(path.string() + ": header promises " + std::to_string(m) +
                              " edges, file has " + std::to_string(edges.size()));
    return Digraph::build(static_cast<int>(n), edges);
}

PriorityMap read_priority_file(const std::filesystem::path& path, const Digraph& g) {
    std::ifstream in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    std::vector<PriorityEntry> entries;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream row(line);
        std::int64_t node = 0, neighbor = 0, order = 0;
        std::string extra;
        if (!(row >> node >> neighbor >> order) || (row >> extra))
            throw ValidationError(loc(path, lineno) + ": line must be 'node neighbor order'");
        entries.push_back({to_internal(node, g.node_count(), loc(path, lineno)),
                           to_internal(neighbor, g.node_count(), loc(path, lineno)),
                           static_cast<int>(order)});
    }
    return PriorityMap::from_entries(g, entries);
}

std::vector<std::int64_t> read_values_file(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::vector<std::int64_t> values;
    std::string tok;
    while (in >> tok) values.push_back(parse_i64(tok, path.string()));
    if (values.empty()) throw ValidationError(path.string() + ": no values");
    return values;
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
    os << "round,node,y,z,ys,zs,q_float\n";
    for (std::size_t k = 0; k < trace.snapshots.size(); ++k) {
        const auto& row = trace.snapshots[k];
        for (std::size_t j = 0; j < row.size(); ++j) {
            const NodeSnapshot& s = row[j];
            os << k << ',' << j + 1 << ',' << s.mass.y << ',' << s.mass.z << ',' << s.state.ys
               << ',' << s.state.zs << ','
               << render_float(static_cast<double>(s.state.ys) /
                               static_cast<double>(s.state.zs))
               << '\n';
        }
    }
}

void write_messages_csv(std::ostream& os, const Trace& trace) {
    os << "round,kind,sender,receiver,y,z\n";
    for (const Message& m : trace.messages) {
        os << m.send_round << ',' << to_string(m.kind) << ',' << m.sender + 1 << ','
           << m.receiver + 1 << ',' << m.y << ',' << m.z << '\n';
    }
}

void write_summary_json(std::ostream& os, const Trace& trace) {
    nlohmann::ordered_json j;
    j["algorithm"] = to_string(trace.algorithm);
    j["n"] = trace.n;
    j["m"] = trace.m;
    j["seed"] = trace.seed;
    if (trace.term.k0)
        j["k0"] = *trace.term.k0;
    else
        j["k0"] = nullptr;
    j["terminated_by"] = to_string(trace.term.reason);
    j["rounds"] = trace.term.rounds;
    j["total_mass_msgs"] = trace.term.mass_msgs;
    j["total_broadcast_msgs"] = trace.term.broadcast_msgs;
    os << j.dump(2) << '\n';
}

void write_sweep_csv(std::ostream& os, const SweepSummary& summary) {
    os << "seed,n,m,k0,terminated_by,mass_msgs,broadcast_msgs\n";
    for (const SweepRunResult& r : summary.runs) {
        os << r.seed << ',' << r.n << ',' << r.m << ',' << (r.k0 ? *r.k0 : -1) << ','
           << (r.ok() ? to_string(r.reason) : "error") << ',' << r.mass_msgs << ','
           << r.broadcast_msgs << '\n';
    }
}

void write_plot_csv(std::ostream& os, std::span<const PlotRow> rows) {
    os << "round,mean_spread,max_spread,frac_converged\n";
    for (const PlotRow& r : rows) {
        os << r.round << ',' << render_float(r.mean_spread) << ',' << render_float(r.max_spread)
           << ',' << render_float(r.frac_converged) << '\n';
    }
}

LoadedRun read_run_files(const std::filesystem::path& trace_csv,
                         const std::filesystem::path& messages_csv,
                         const std::filesystem::path& summary_json) {
    LoadedRun out;

    {
        std::ifstream in = open_input(summary_json);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(summary_json.string() + ": " + e.what());
        }
        const std::string alg = j.value("algorithm", "");
        if (alg == "alg1")
            out.algorithm = Algorithm::Alg1;
        else if (alg == "alg2")
            out.algorithm = Algorithm::Alg2;
        else if (alg == "alg3")
            out.algorithm = Algorithm::Alg3;
        else
            throw ValidationError(summary_json.string() + ": unknown algorithm '" + alg + "'");
    }

    {
        std::ifstream in = open_input(trace_csv);
        std::string line;
        std::size_t lineno = 0;
        if (!std::getline(in, line) || split(line, ',')[0] != "round")
            throw ValidationError(trace_csv.string() + ": missing header");
        ++lineno;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            const auto f = split(line, ',');
            if (f.size() != 7)
                throw ValidationError(loc(trace_csv, lineno) + ": expected 7 fields");
            RawNodeRow r;
            r.round = parse_i64(f[0], loc(trace_csv, lineno));
            r.node = static_cast<NodeId>(parse_i64(f[1], loc(trace_csv, lineno)) - 1);
            r.y = parse_i64(f[2], loc(trace_csv, lineno));
            r.z = parse_i64(f[3], loc(trace_csv, lineno));
            r.ys = parse_i64(f[4], loc(trace_csv, lineno));
            r.zs = parse_i64(f[5], loc(trace_csv, lineno));
            parse_double(f[6], loc(trace_csv, lineno));  // rendered ratio; presence checked only
            if (r.node < 0)
                throw ValidationError(loc(trace_csv, lineno) + ": node ids are 1-based");
            out.rows.push_back(r);
        }
        if (out.rows.empty()) throw ValidationError(trace_csv.string() + ": no rows");
    }

    {
        std::ifstream in = open_input(messages_csv);
        std::string line;
        std::size_t lineno = 0;
        if (!std::getline(in, line) || split(line, ',')[0] != "round")
            throw ValidationError(messages_csv.string() + ": missing header");
        ++lineno;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            const auto f = split(line, ',');
            if (f.size() != 6)
                throw ValidationError(loc(messages_csv, lineno) + ": expected 6 fields");
            RawMsgRow m;
            m.round = parse_i64(f[0], loc(messages_csv, lineno));
            if (f[1] == "mass")
                m.kind = MsgKind::MassUnicast;
            else if (f[1] == "state")
                m.kind = MsgKind::StateBroadcast;
            else
                throw ValidationError(loc(messages_csv, lineno) + ": unknown kind '" + f[1] + "'");
            m.sender = static_cast<NodeId>(parse_i64(f[2], loc(messages_csv, lineno)) - 1);
            m.receiver = static_cast<NodeId>(parse_i64(f[3], loc(messages_csv, lineno)) - 1);
            m.y = parse_i64(f[4], loc(messages_csv, lineno));
            m.z = parse_i64(f[5], loc(messages_csv, lineno));
            if (m.sender < 0 || m.receiver < 0)
                throw ValidationError(loc(messages_csv, lineno) + ": node ids are 1-based");
            out.msgs.push_back(m);
        }
    }

    return out;
}

}  // namespace qac
