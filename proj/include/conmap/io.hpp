#pragma once

// Text round-trips for networks, feature CSVs, contagion maps (CSV matrix +
// JSON sidecar), and the report tables. Doubles are written with shortest
// exact round-trip formatting so repeated runs produce byte-identical files;
// loaders skip '#' comment lines, which carry provenance metadata.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"

#include "conmap/bench.hpp"
#include "conmap/contagion.hpp"
#include "conmap/embed.hpp"
#include "conmap/error.hpp"
#include "conmap/graph.hpp"
#include "conmap/matrix.hpp"
#include "conmap/tda.hpp"

namespace conmap::io {

/// Key/value pairs written as '# key=value' comment lines atop every output.
using MetaList = std::vector<std::pair<std::string, std::string>>;

enum class LabelColumn { auto_detect, yes, no };

inline std::string format_double(double x) {
    if (std::isinf(x)) return x > 0.0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view sv) {
    while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t' || sv.front() == '\r'))
        sv.remove_prefix(1);
    while (!sv.empty() && (sv.back() == ' ' || sv.back() == '\t' || sv.back() == '\r'))
        sv.remove_suffix(1);
    return sv;
}

inline bool parse_double(std::string_view sv, double& out) {
    sv = trim(sv);
    if (!sv.empty() && sv.front() == '+') sv.remove_prefix(1);
    if (sv.empty()) return false;
    const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), out);
    return res.ec == std::errc() && res.ptr == sv.data() + sv.size();
}

inline bool parse_i32(std::string_view sv, std::int32_t& out) {
    sv = trim(sv);
    if (!sv.empty() && sv.front() == '+') sv.remove_prefix(1);
    if (sv.empty()) return false;
    const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), out);
    return res.ec == std::errc() && res.ptr == sv.data() + sv.size();
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t begin = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > begin) tokens.push_back(line.substr(begin, i - begin));
    }
    return tokens;
}

inline std::optional<EdgeClass> parse_edge_class(std::string_view tag) {
    if (tag == "G") return EdgeClass::Geometric;
    if (tag == "NG") return EdgeClass::NonGeometric;
    if (tag == "U") return EdgeClass::Unlabeled;
    return std::nullopt;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    return os;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return is;
}

inline void finish_output(std::ostream& os, const std::string& path) {
    os.flush();
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline bool next_line(std::istream& is, std::string& line) {
    if (!std::getline(is, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

}  // namespace detail

inline void write_meta(std::ostream& os, const MetaList& meta) {
    for (const auto& [key, value] : meta) os << "# " << key << "=" << value << "\n";
}

// ---------------------------------------------------------------------------
// Network edge lists: '# nodes=<n>' header, optional 'P i x y' position
// block, then one 'u v G|NG|U' line per edge.

inline void save_network(const Network& net, const std::string& path, const MetaList& meta = {}) {
    auto os = detail::open_output(path);
    os << "# nodes=" << net.node_count() << "\n";
    write_meta(os, meta);
    if (net.has_positions()) {
        const auto& pos = net.positions();
        for (std::size_t i = 0; i < pos.size(); ++i)
            os << "P " << i << " " << format_double(pos[i].x) << " " << format_double(pos[i].y)
               << "\n";
    }
    for (const Edge& e : net.edges()) os << e.u << " " << e.v << " " << to_tag(e.cls) << "\n";
    detail::finish_output(os, path);
}

inline Network load_network(const std::string& path) {
    auto is = detail::open_input(path);
    std::string line;
    int lineno = 0;
    std::int64_t n = -1;
    std::vector<Edge> edges;
    std::vector<Vec2> positions;
    std::vector<char> have_pos;
    std::int64_t pos_count = 0;

    while (detail::next_line(is, line)) {
        ++lineno;
        const std::string_view sv = detail::trim(line);
        if (sv.empty()) continue;
        if (sv.front() == '#') {
            const std::string_view rest = detail::trim(sv.substr(1));
            if (rest.rfind("nodes=", 0) == 0) {
                if (n >= 0) throw ParseError(path, lineno, "duplicate nodes header");
                std::int32_t parsed = 0;
                if (!detail::parse_i32(rest.substr(6), parsed) || parsed <= 0)
                    throw ParseError(path, lineno, "invalid nodes header");
                n = parsed;
                positions.assign(static_cast<std::size_t>(n), Vec2{});
                have_pos.assign(static_cast<std::size_t>(n), 0);
            }
            continue;
        }
        if (n < 0) throw ParseError(path, lineno, "expected '# nodes=<n>' header before data");
        const auto tok = detail::split_ws(sv);
        if (tok[0] == "P") {
            if (tok.size() != 4) throw ParseError(path, lineno, "position line needs 'P i x y'");
            std::int32_t i = 0;
            double x = 0.0;
            double y = 0.0;
            if (!detail::parse_i32(tok[1], i) || i < 0 || i >= n)
                throw ParseError(path, lineno, "position node out of range");
            if (!detail::parse_double(tok[2], x) || !detail::parse_double(tok[3], y))
                throw ParseError(path, lineno, "position coordinates must be numeric");
            if (have_pos[static_cast<std::size_t>(i)])
                throw ParseError(path, lineno, "duplicate position for node " + std::to_string(i));
            have_pos[static_cast<std::size_t>(i)] = 1;
            positions[static_cast<std::size_t>(i)] = Vec2{x, y};
            ++pos_count;
            continue;
        }
        if (tok.size() != 3) throw ParseError(path, lineno, "edge line needs 'u v class'");
        std::int32_t u = 0;
        std::int32_t v = 0;
        if (!detail::parse_i32(tok[0], u) || !detail::parse_i32(tok[1], v))
            throw ParseError(path, lineno, "edge endpoints must be integers");
        if (u < 0 || u >= n || v < 0 || v >= n)
            throw ParseError(path, lineno, "edge endpoint out of range");
        if (u == v) throw ParseError(path, lineno, "self-loop");
        const auto cls = detail::parse_edge_class(tok[2]);
        if (!cls)
            throw ParseError(path, lineno, "unknown edge class: " + std::string(tok[2]));
        edges.push_back(Edge{u, v, *cls});
    }
    if (n < 0) throw ParseError(path, 0, "missing '# nodes=<n>' header");
    if (pos_count != 0 && pos_count != n)
        throw ParseError(path, 0,
                         "position block covers " + std::to_string(pos_count) + " of " +
                             std::to_string(n) + " nodes");
    if (pos_count == 0) positions.clear();
    try {
        return Network(static_cast<std::int32_t>(n), std::move(edges), std::move(positions));
    } catch (const std::invalid_argument& e) {
        throw ParseError(path, 0, e.what());
    }
}

// ---------------------------------------------------------------------------
// Feature matrices: CSV with a mandatory header row; the first column is a
// row label when the flag says so (auto: non-numeric first cell of the first
// data row).

inline FeatureMatrix load_feature_matrix(const std::string& path,
                                         LabelColumn label_mode = LabelColumn::auto_detect) {
    auto is = detail::open_input(path);
    std::string line;
    int lineno = 0;
    bool have_header = false;
    bool decided = label_mode != LabelColumn::auto_detect;
    bool labeled = label_mode == LabelColumn::yes;
    std::size_t width = 0;
    std::size_t rows = 0;
    std::vector<double> values;
    std::vector<std::string> labels;

    while (detail::next_line(is, line)) {
        ++lineno;
        const std::string_view sv = detail::trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        if (!have_header) {
            have_header = true;
            continue;
        }
        const auto cells = detail::split_csv(sv);
        if (!decided) {
            double probe = 0.0;
            labeled = !detail::parse_double(cells[0], probe);
            decided = true;
        }
        if (width == 0) {
            width = cells.size();
            if (width < (labeled ? 2u : 1u)) throw ParseError(path, lineno, "no feature columns");
        } else if (cells.size() != width) {
            throw ParseError(path, lineno,
                             "expected " + std::to_string(width) + " columns, got " +
                                 std::to_string(cells.size()));
        }
        if (labeled) labels.emplace_back(cells[0]);
        for (std::size_t c = labeled ? 1 : 0; c < cells.size(); ++c) {
            double x = 0.0;
            if (!detail::parse_double(cells[c], x))
                throw ParseError(path, lineno,
                                 "column " + std::to_string(c + 1) + ": not a number: '" +
                                     std::string(cells[c]) + "'");
            if (!std::isfinite(x))
                throw ParseError(path, lineno,
                                 "column " + std::to_string(c + 1) + ": non-finite value");
            values.push_back(x);
        }
        ++rows;
    }
    if (!have_header) throw ParseError(path, 0, "missing header row");
    if (rows == 0) throw ParseError(path, 0, "no data rows");
    Matrix m(rows, width - (labeled ? 1 : 0));
    m.data = std::move(values);
    return FeatureMatrix{std::move(m), std::move(labels)};
}

// ---------------------------------------------------------------------------
// Contagion maps: the symmetric matrix as integer CSV, plus a '<path>.json'
// sidecar recording n, threshold, mode, s, and the placeholder value.

inline void save_map(const ContagionMap& cm, const std::string& path, const MetaList& meta = {}) {
    auto os = detail::open_output(path);
    write_meta(os, meta);
    const std::int32_t n = cm.node_count();
    std::string row;
    for (std::int32_t i = 0; i < n; ++i) {
        row.clear();
        const auto vals = cm.sym_row(i);
        for (std::int32_t j = 0; j < n; ++j) {
            if (j) row.push_back(',');
            row += std::to_string(vals[static_cast<std::size_t>(j)]);
        }
        row.push_back('\n');
        os << row;
    }
    detail::finish_output(os, path);

    nlohmann::json side;
    side["n"] = n;
    side["threshold"] = cm.threshold();
    side["mode"] = cm.mode().is_truncated() ? "truncated" : "full";
    if (cm.mode().is_truncated())
        side["s"] = cm.mode().s;
    else
        side["s"] = nullptr;
    side["placeholder"] = cm.placeholder();
    if (!meta.empty()) {
        nlohmann::json jm;
        for (const auto& [key, value] : meta) jm[key] = value;
        side["meta"] = jm;
    }
    const std::string side_path = path + ".json";
    auto os2 = detail::open_output(side_path);
    os2 << side.dump(2) << "\n";
    detail::finish_output(os2, side_path);
}

/// A deserialized map: only the symmetric form survives a round-trip, which
/// is all the downstream stages (persistence, embedding) consume.
struct MapFile {
    std::int32_t n = 0;
    double threshold = 0.0;
    MapMode mode = MapMode::full();
    std::int32_t placeholder = 0;
    std::vector<std::int32_t> sym;  // row-major n*n

    Matrix to_matrix() const {
        Matrix m(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < sym.size(); ++i) m.data[i] = sym[i];
        return m;
    }
};

inline MapFile load_map(const std::string& path) {
    const std::string side_path = path + ".json";
    nlohmann::json side;
    {
        auto is = detail::open_input(side_path);
        try {
            is >> side;
        } catch (const std::exception& e) {
            throw ParseError(side_path, 0, e.what());
        }
    }
    MapFile mf;
    try {
        mf.n = side.at("n").get<std::int32_t>();
        const std::string mode = side.at("mode").get<std::string>();
        if (mode == "full")
            mf.mode = MapMode::full();
        else if (mode == "truncated")
            mf.mode = MapMode::truncated(side.at("s").get<std::int32_t>());
        else
            throw ParseError(side_path, 0, "unknown mode: " + mode);
        mf.threshold = side.at("threshold").get<double>();
        mf.placeholder = side.at("placeholder").get<std::int32_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(side_path, 0, e.what());
    }
    if (mf.n <= 0) throw ParseError(side_path, 0, "n must be positive");
    if (!(mf.threshold >= 0.0 && mf.threshold <= 1.0))
        throw ParseError(side_path, 0, "threshold out of range");
    const std::int32_t expect = 2 * (mf.mode.is_truncated() ? mf.mode.s : mf.n);
    if (mf.placeholder != expect)
        throw ParseError(side_path, 0, "placeholder inconsistent with mode");

    auto is = detail::open_input(path);
    mf.sym.reserve(static_cast<std::size_t>(mf.n) * static_cast<std::size_t>(mf.n));
    std::string line;
    int lineno = 0;
    std::int64_t row = 0;
    while (detail::next_line(is, line)) {
        ++lineno;
        const std::string_view sv = detail::trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        if (row >= mf.n)
            throw ParseError(path, lineno, "more than n=" + std::to_string(mf.n) + " rows");
        const auto cells = detail::split_csv(sv);
        if (static_cast<std::int64_t>(cells.size()) != mf.n)
            throw ParseError(path, lineno,
                             "expected " + std::to_string(mf.n) + " columns, got " +
                                 std::to_string(cells.size()));
        for (const auto cell : cells) {
            std::int32_t v = 0;
            if (!detail::parse_i32(cell, v))
                throw ParseError(path, lineno, "not an integer: '" + std::string(cell) + "'");
            mf.sym.push_back(v);
        }
        ++row;
    }
    if (row != mf.n)
        throw ParseError(path, 0,
                         "expected " + std::to_string(mf.n) + " rows, got " + std::to_string(row));
    return mf;
}

// ---------------------------------------------------------------------------
// Report tables.

/// One row per step t: active fraction after t sweeps and the class tallies
/// of edges joining a node active at t to one activating at t+1 (zero on the
/// final row).
inline void save_telemetry(const ActivationRecord& rec, const std::string& path,
                           const MetaList& meta = {}) {
    auto os = detail::open_output(path);
    write_meta(os, meta);
    os << "t,q,e_geometric,e_nongeometric,e_unlabeled\n";
    for (std::int32_t t = 0; t <= rec.steps_run; ++t) {
        EdgeTally e;
        if (static_cast<std::size_t>(t) < rec.edge_series.size())
            e = rec.edge_series[static_cast<std::size_t>(t)];
        os << t << ',' << format_double(rec.q_series[static_cast<std::size_t>(t)]) << ','
           << e.geometric << ',' << e.non_geometric << ',' << e.unlabeled << "\n";
    }
    detail::finish_output(os, path);
}

inline void save_barcode(const Barcode& bc, const std::string& path, const MetaList& meta = {}) {
    auto os = detail::open_output(path);
    write_meta(os, meta);
    os << "dim,birth,death\n";
    for (const Interval& iv : bc.h0)
        os << "0," << format_double(iv.birth) << ',' << format_double(iv.death) << "\n";
    for (const Interval& iv : bc.h1)
        os << "1," << format_double(iv.birth) << ',' << format_double(iv.death) << "\n";
    detail::finish_output(os, path);
}

inline void save_projection(const Projection& proj, const std::string& path,
                            const MetaList& meta = {},
                            const std::vector<std::string>& labels = {},
                            const std::vector<std::int32_t>& activation_times = {}) {
    const std::size_t n = proj.points.rows;
    const std::size_t k = proj.points.cols;
    if (!labels.empty() && labels.size() != n)
        throw std::invalid_argument("save_projection: labels size mismatch");
    if (!activation_times.empty() && activation_times.size() != n)
        throw std::invalid_argument("save_projection: activation_times size mismatch");
    auto os = detail::open_output(path);
    write_meta(os, meta);
    os << "node";
    for (std::size_t c = 0; c < k; ++c) os << ",pc" << c + 1;
    if (!labels.empty()) os << ",label";
    if (!activation_times.empty()) os << ",activation_time";
    os << "\n";
    for (std::size_t i = 0; i < n; ++i) {
        os << i;
        for (std::size_t c = 0; c < k; ++c) os << ',' << format_double(proj.points.at(i, c));
        if (!labels.empty()) os << ',' << labels[i];
        if (!activation_times.empty()) os << ',' << activation_times[i];
        os << "\n";
    }
    detail::finish_output(os, path);
}

inline void save_bifurcation(const BifurcationGrid& grid, const std::string& path,
                             const MetaList& meta = {}) {
    auto os = detail::open_output(path);
    write_meta(os, meta);
    os << "alpha,T,delta,regime\n";
    for (std::size_t a = 0; a < grid.alphas.size(); ++a)
        for (std::size_t t = 0; t < grid.thresholds.size(); ++t)
            os << format_double(grid.alphas[a]) << ',' << format_double(grid.thresholds[t]) << ','
               << format_double(grid.delta.at(a, t)) << ',' << to_string(grid.regime_at(a, t))
               << "\n";
    detail::finish_output(os, path);
}

inline nlohmann::json scaling_report_json(const ScalingFit& fit, const nlohmann::json& config,
                                          const HostInfo& host, const MetaList& meta = {}) {
    nlohmann::json j;
    j["config"] = config;
    j["zeta"] = fit.zeta;
    j["gamma"] = fit.gamma;
    j["r_squared"] = fit.r_squared;
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& [x, seconds] : fit.samples)
        samples.push_back(nlohmann::json::array({x, seconds}));
    j["samples"] = samples;
    j["host"] = {{"hostname", host.hostname},
                 {"compiler", host.compiler},
                 {"hardware_threads", host.hardware_threads}};
    if (!meta.empty()) {
        nlohmann::json jm;
        for (const auto& [key, value] : meta) jm[key] = value;
        j["meta"] = jm;
    }
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    auto os = detail::open_output(path);
    os << content;
    detail::finish_output(os, path);
}

}  // namespace conmap::io
