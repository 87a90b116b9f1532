// conmap: generate networks, build contagion maps, and run the downstream
// persistence / embedding / benchmark stages from the command line.
//
// Exit codes: 0 success, 1 runtime failure (I/O, parse, generation,
// convergence), 2 usage or validation error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "conmap/conmap.hpp"

namespace {

using namespace conmap;

int env_workers() {
    const char* env = std::getenv("CONMAP_WORKERS");
    if (env == nullptr) return 1;
    const int w = std::atoi(env);
    return w >= 1 ? w : 1;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(text.substr(start));
            break;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

/// 'start:end:step' (inclusive endpoints, 1e-9 slack) or a comma list.
std::vector<double> parse_double_sweep(const std::string& flag, const std::string& text) {
    const auto bad = [&]() -> std::vector<double> {
        throw std::invalid_argument(flag + ": malformed sweep '" + text + "'");
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) return bad();
        double start = 0.0;
        double end = 0.0;
        double step = 0.0;
        if (!io::detail::parse_double(parts[0], start) || !io::detail::parse_double(parts[1], end) ||
            !io::detail::parse_double(parts[2], step))
            return bad();
        if (!(step > 0.0) || end < start - 1e-9) return bad();
        for (int i = 0;; ++i) {
            const double v = start + i * step;
            if (v > end + 1e-9) break;
            out.push_back(v);
        }
    } else {
        for (const auto& part : split(text, ',')) {
            double v = 0.0;
            if (!io::detail::parse_double(part, v)) return bad();
            out.push_back(v);
        }
    }
    if (out.empty()) return bad();
    return out;
}

std::vector<std::int32_t> parse_int_list(const std::string& flag, const std::string& text) {
    std::vector<std::int32_t> out;
    for (const auto& part : split(text, ',')) {
        std::int32_t v = 0;
        if (!io::detail::parse_i32(part, v))
            throw std::invalid_argument(flag + ": malformed integer list '" + text + "'");
        out.push_back(v);
    }
    return out;
}

MapMode parse_mode(const std::string& text) {
    if (text == "full") return MapMode::full();
    if (text.rfind("trunc:", 0) == 0) {
        std::int32_t s = 0;
        if (io::detail::parse_i32(text.substr(6), s)) return MapMode::truncated(s);
    }
    throw std::invalid_argument("--mode: expected 'full' or 'trunc:<s>', got '" + text + "'");
}

io::LabelColumn parse_labeled(const std::string& text) {
    if (text == "auto") return io::LabelColumn::auto_detect;
    if (text == "yes") return io::LabelColumn::yes;
    if (text == "no") return io::LabelColumn::no;
    throw std::invalid_argument("--labeled: expected auto|yes|no, got '" + text + "'");
}

io::MetaList base_meta(const std::string& command) {
    return {{"version", version}, {"command", command}};
}

std::string join_doubles(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out.push_back(',');
        out += io::format_double(values[i]);
    }
    return out;
}

// Each command's work is a free function so pipeline can reuse it and write
// byte-identical intermediate files.

struct GenNrlParams {
    std::int32_t n = 0;
    std::int32_t dg = 0;
    std::int32_t dng = 0;
    std::uint64_t seed = 12345;
    std::string out;
};

void run_generate_nrl(const GenNrlParams& p) {
    const Network net = noisy_ring_lattice(p.n, p.dg, p.dng, p.seed);
    auto meta = base_meta("generate nrl");
    meta.push_back({"n", std::to_string(p.n)});
    meta.push_back({"d_g", std::to_string(p.dg)});
    meta.push_back({"d_ng", std::to_string(p.dng)});
    meta.push_back({"seed", std::to_string(p.seed)});
    io::save_network(net, p.out, meta);
    std::cout << "nrl n=" << p.n << " d_g=" << p.dg << " d_ng=" << p.dng
              << " alpha=" << io::format_double(noisiness(net)) << " edges=" << net.edges().size()
              << " seed=" << p.seed << " out=" << p.out << "\n";
}

struct GenKnnParams {
    std::string input;
    std::int32_t k = 0;
    std::string labeled = "auto";
    std::string out;
};

void run_generate_knn(const GenKnnParams& p) {
    const FeatureMatrix features = io::load_feature_matrix(p.input, parse_labeled(p.labeled));
    const Network net = knn_graph(features, p.k);
    auto meta = base_meta("generate knn");
    meta.push_back({"input", p.input});
    meta.push_back({"k", std::to_string(p.k)});
    meta.push_back({"labeled", p.labeled});
    io::save_network(net, p.out, meta);
    std::cout << "knn n=" << net.node_count() << " k=" << p.k << " edges=" << net.edges().size()
              << " out=" << p.out << "\n";
}

struct MapParams {
    std::string net;
    double threshold = 0.0;
    std::optional<std::int32_t> truncate;
    int workers = 1;
    std::string out;
};

void run_map(const MapParams& p) {
    const Network net = io::load_network(p.net);
    const MapMode mode = p.truncate ? MapMode::truncated(*p.truncate) : MapMode::full();
    const ContagionMap cm = contagion_map(net, p.threshold, mode, p.workers);
    auto meta = base_meta("map");
    meta.push_back({"net", p.net});
    meta.push_back({"T", io::format_double(p.threshold)});
    meta.push_back({"mode", mode.is_truncated() ? "truncated" : "full"});
    if (mode.is_truncated()) meta.push_back({"s", std::to_string(mode.s)});
    meta.push_back({"workers", std::to_string(p.workers)});
    io::save_map(cm, p.out, meta);
    std::cout << "map n=" << cm.node_count() << " T=" << io::format_double(p.threshold)
              << " mode=" << (mode.is_truncated() ? "truncated" : "full");
    if (mode.is_truncated()) std::cout << " s=" << mode.s;
    std::cout << " placeholder=" << cm.placeholder() << " workers=" << p.workers
              << " out=" << p.out << "\n";
}

struct PersistParams {
    std::string map;
    std::int32_t subsample = 600;
    std::uint64_t seed = 12345;
    std::string out;
};

double run_persist(const PersistParams& p) {
    const io::MapFile mf = io::load_map(p.map);
    const Barcode bc = rips_of_rows(mf.sym.data(), mf.n, p.subsample, p.seed);
    // delta in placeholder units, matching ring_stability_of_map
    const double delta = ring_stability(bc) / static_cast<double>(mf.placeholder);
    auto meta = base_meta("persist");
    meta.push_back({"map", p.map});
    meta.push_back({"subsample", std::to_string(p.subsample)});
    meta.push_back({"seed", std::to_string(p.seed)});
    meta.push_back({"delta", io::format_double(delta)});
    io::save_barcode(bc, p.out, meta);
    std::cout << "persist n=" << mf.n << " subsample=" << p.subsample << " seed=" << p.seed
              << " h0=" << bc.h0.size() << " h1=" << bc.h1.size()
              << " delta=" << io::format_double(delta) << " out=" << p.out << "\n";
    return delta;
}

struct EmbedParams {
    std::string map;
    std::int32_t k = 2;
    std::string labels;
    std::string labeled = "auto";
    bool score = false;
    std::string net;
    std::optional<std::int32_t> times_node;
    std::string out;
};

Projection run_embed(const EmbedParams& p) {
    const io::MapFile mf = io::load_map(p.map);
    if (p.k < 1) throw std::invalid_argument("embed: --k must be positive");
    const Projection proj = pca_project(mf.to_matrix(), static_cast<std::size_t>(p.k));

    std::vector<std::string> labels;
    if (!p.labels.empty()) {
        const FeatureMatrix fm = io::load_feature_matrix(p.labels, parse_labeled(p.labeled));
        if (!fm.labeled()) throw std::invalid_argument("embed: label file has no label column");
        if (static_cast<std::int32_t>(fm.labels.size()) != mf.n)
            throw std::invalid_argument("embed: label count does not match map size");
        labels = fm.labels;
    }

    std::vector<std::int32_t> times;
    if (p.times_node) {
        if (p.net.empty()) throw std::invalid_argument("embed: --times-node requires --net");
        const Network net = io::load_network(p.net);
        if (net.node_count() != mf.n)
            throw std::invalid_argument("embed: network size does not match map size");
        times = wtm_run(net, cluster_seed(net, *p.times_node), mf.threshold).times;
    }

    auto meta = base_meta("embed");
    meta.push_back({"map", p.map});
    meta.push_back({"k", std::to_string(p.k)});
    if (!p.labels.empty()) {
        meta.push_back({"labels", p.labels});
        meta.push_back({"labeled", p.labeled});
    }
    if (p.times_node) {
        meta.push_back({"net", p.net});
        meta.push_back({"times_node", std::to_string(*p.times_node)});
    }
    meta.push_back({"explained", join_doubles(proj.explained)});
    io::save_projection(proj, p.out, meta, labels, times);
    std::cout << "embed n=" << mf.n << " k=" << p.k
              << " explained=" << join_doubles(proj.explained) << " out=" << p.out << "\n";
    if (p.score) {
        if (labels.empty()) throw std::invalid_argument("embed: --score requires --labels");
        const double c = cell_group_separation(proj.points, labels);
        std::cout << "C=" << io::format_double(c) << "\n";
    }
    return proj;
}

struct BifurcationParams {
    std::int32_t n = 0;
    std::int32_t dg = 0;
    std::int32_t s = 0;
    std::string alphas;
    std::string thresholds;
    std::uint64_t seed = 12345;
    std::int32_t subsample = 600;
    int workers = 1;
    std::string out;
};

void run_bifurcation(const BifurcationParams& p) {
    const auto alphas = parse_double_sweep("--alphas", p.alphas);
    const auto ts = parse_double_sweep("--Ts", p.thresholds);
    const BifurcationGrid grid =
        bifurcation_sweep(p.n, p.dg, ts, alphas, p.s, p.seed, p.workers, p.subsample);
    auto meta = base_meta("bifurcation");
    meta.push_back({"n", std::to_string(p.n)});
    meta.push_back({"d_g", std::to_string(p.dg)});
    meta.push_back({"s", std::to_string(p.s)});
    meta.push_back({"alphas", p.alphas});
    meta.push_back({"Ts", p.thresholds});
    meta.push_back({"seed", std::to_string(p.seed)});
    meta.push_back({"subsample", std::to_string(p.subsample)});
    meta.push_back({"workers", std::to_string(p.workers)});
    io::save_bifurcation(grid, p.out, meta);
    std::cout << "bifurcation n=" << p.n << " d_g=" << p.dg << " s=" << p.s
              << " cells=" << alphas.size() * ts.size() << " seed=" << p.seed << " out=" << p.out
              << "\n";
}

struct BenchSizeParams {
    std::string sizes;
    std::vector<std::string> modes;
    double threshold = 0.3;
    std::int32_t dg = 6;
    std::int32_t dng = 2;
    int repeats = 3;
    std::uint64_t seed = 12345;
    int workers = 1;
    std::string out;
};

void run_bench_size(const BenchSizeParams& p) {
    const auto sizes = parse_int_list("--sizes", p.sizes);
    const std::vector<std::string> modes = p.modes.empty() ? std::vector<std::string>{"full"} : p.modes;
    nlohmann::json config;
    config["command"] = "bench size";
    config["sizes"] = sizes;
    config["modes"] = modes;
    config["T"] = p.threshold;
    config["d_g"] = p.dg;
    config["d_ng"] = p.dng;
    config["repeats"] = p.repeats;
    config["seed"] = p.seed;
    config["workers"] = p.workers;

    nlohmann::json fits = nlohmann::json::array();
    for (const auto& mode_text : modes) {
        const ScalingFit fit = scaling_experiment(sizes, parse_mode(mode_text), p.threshold,
                                                  NrlConfig{p.dg, p.dng}, p.repeats, p.seed, p.workers);
        nlohmann::json samples = nlohmann::json::array();
        for (const auto& [x, seconds] : fit.samples)
            samples.push_back(nlohmann::json::array({x, seconds}));
        fits.push_back({{"mode", mode_text},
                        {"zeta", fit.zeta},
                        {"gamma", fit.gamma},
                        {"r_squared", fit.r_squared},
                        {"samples", samples}});
        std::cout << "fit mode=" << mode_text << " gamma=" << io::format_double(fit.gamma)
                  << " zeta=" << io::format_double(fit.zeta)
                  << " r2=" << io::format_double(fit.r_squared) << "\n";
    }

    const HostInfo host = host_info();
    nlohmann::json report;
    report["version"] = version;
    report["config"] = config;
    report["host"] = {{"hostname", host.hostname},
                      {"compiler", host.compiler},
                      {"hardware_threads", host.hardware_threads}};
    report["fits"] = fits;
    io::write_text_file(p.out, report.dump(2) + "\n");
    std::cout << "bench out=" << p.out << "\n";
}

struct BenchStepsParams {
    std::int32_t n = 0;
    std::string steps;
    double threshold = 0.3;
    std::int32_t dg = 6;
    std::int32_t dng = 2;
    int repeats = 3;
    std::uint64_t seed = 12345;
    int workers = 1;
    std::string out;
};

void run_bench_steps(const BenchStepsParams& p) {
    const auto steps = parse_int_list("--steps", p.steps);
    const ScalingFit fit = step_scaling_experiment(p.n, steps, p.threshold, NrlConfig{p.dg, p.dng},
                                                   p.repeats, p.seed, p.workers);
    nlohmann::json config;
    config["command"] = "bench steps";
    config["n"] = p.n;
    config["steps"] = steps;
    config["T"] = p.threshold;
    config["d_g"] = p.dg;
    config["d_ng"] = p.dng;
    config["repeats"] = p.repeats;
    config["seed"] = p.seed;
    config["workers"] = p.workers;
    const nlohmann::json report =
        io::scaling_report_json(fit, config, host_info(), {{"version", version}});
    io::write_text_file(p.out, report.dump(2) + "\n");
    std::cout << "fit gamma=" << io::format_double(fit.gamma)
              << " zeta=" << io::format_double(fit.zeta)
              << " r2=" << io::format_double(fit.r_squared) << "\n"
              << "bench out=" << p.out << "\n";
}

struct PipelineParams {
    std::int32_t n = 0;
    std::int32_t dg = 0;
    std::int32_t dng = 0;
    double threshold = 0.0;
    std::optional<std::int32_t> truncate;
    std::int32_t k = 2;
    std::int32_t subsample = 600;
    std::uint64_t seed = 12345;
    int workers = 1;
    std::string outdir;
};

void run_pipeline(const PipelineParams& p) {
    std::filesystem::create_directories(p.outdir);
    const std::string net_path = p.outdir + "/network.edges";
    const std::string map_path = p.outdir + "/map.csv";
    const std::string barcode_path = p.outdir + "/barcode.csv";
    const std::string proj_path = p.outdir + "/projection.csv";
    const std::string report_path = p.outdir + "/report.json";

    run_generate_nrl({p.n, p.dg, p.dng, p.seed, net_path});
    run_map({net_path, p.threshold, p.truncate, p.workers, map_path});
    const double delta = run_persist({map_path, p.subsample, p.seed, barcode_path});
    EmbedParams ep;
    ep.map = map_path;
    ep.k = p.k;
    ep.out = proj_path;
    const Projection proj = run_embed(ep);

    nlohmann::json config;
    config["command"] = "pipeline";
    config["n"] = p.n;
    config["d_g"] = p.dg;
    config["d_ng"] = p.dng;
    config["T"] = p.threshold;
    if (p.truncate)
        config["s"] = *p.truncate;
    else
        config["s"] = nullptr;
    config["k"] = p.k;
    config["subsample"] = p.subsample;
    config["seed"] = p.seed;
    config["workers"] = p.workers;

    nlohmann::json report;
    report["version"] = version;
    report["config"] = config;
    report["files"] = {{"network", net_path},
                       {"map", map_path},
                       {"barcode", barcode_path},
                       {"projection", proj_path}};
    report["delta"] = delta;
    report["explained"] = proj.explained;
    io::write_text_file(report_path, report.dump(2) + "\n");
    std::cout << "pipeline delta=" << io::format_double(delta) << " out=" << report_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contagion maps: generate, map, persist, embed, bifurcation, bench, pipeline"};
    app.set_version_flag("--version", conmap::version);
    app.require_subcommand(1);
    const int default_workers = env_workers();

    auto* gen = app.add_subcommand("generate", "write a network file");
    gen->require_subcommand(1);

    GenNrlParams gn;
    auto* nrl = gen->add_subcommand("nrl", "noisy ring lattice");
    nrl->add_option("--n", gn.n, "node count")->required();
    nrl->add_option("--dg", gn.dg, "geometric degree (even)")->required();
    nrl->add_option("--dng", gn.dng, "non-geometric degree")->required();
    nrl->add_option("--seed", gn.seed, "rng seed")->capture_default_str();
    nrl->add_option("--out", gn.out, "output network path")->required();
    nrl->callback([&] { run_generate_nrl(gn); });

    GenKnnParams gk;
    auto* knn = gen->add_subcommand("knn", "k-nearest-neighbour graph from a feature CSV");
    knn->add_option("--input", gk.input, "feature CSV")->required();
    knn->add_option("--k", gk.k, "neighbour count")->required();
    knn->add_option("--labeled", gk.labeled, "label column: auto|yes|no")->capture_default_str();
    knn->add_option("--out", gk.out, "output network path")->required();
    knn->callback([&] { run_generate_knn(gk); });

    MapParams mp;
    mp.workers = default_workers;
    auto* map_cmd = app.add_subcommand("map", "build a contagion map");
    map_cmd->add_option("--net", mp.net, "network file")->required();
    map_cmd->add_option("--T", mp.threshold, "activation threshold")->required();
    map_cmd->add_option("--truncate", mp.truncate, "sweep budget s (omit for a full map)");
    map_cmd->add_option("--workers", mp.workers, "contagion parallelism")->capture_default_str();
    map_cmd->add_option("--out", mp.out, "output CSV path (sidecar: <out>.json)")->required();
    map_cmd->callback([&] { run_map(mp); });

    PersistParams pp;
    auto* persist = app.add_subcommand("persist", "Rips barcode and ring stability of a map");
    persist->add_option("--map", pp.map, "map CSV (with .json sidecar)")->required();
    persist->add_option("--subsample", pp.subsample, "row subsample bound (<=0 disables)")
        ->capture_default_str();
    persist->add_option("--seed", pp.seed, "subsample rng seed")->capture_default_str();
    persist->add_option("--out", pp.out, "output barcode CSV")->required();
    persist->callback([&] { run_persist(pp); });

    EmbedParams ep;
    auto* embed = app.add_subcommand("embed", "PCA projection of a map");
    embed->add_option("--map", ep.map, "map CSV (with .json sidecar)")->required();
    embed->add_option("--k", ep.k, "component count")->capture_default_str();
    embed->add_option("--labels", ep.labels, "feature CSV supplying row labels");
    embed->add_option("--labeled", ep.labeled, "label column: auto|yes|no")->capture_default_str();
    embed->add_flag("--score", ep.score, "print the cell-group separation C");
    embed->add_option("--net", ep.net, "network file for --times-node");
    embed->add_option("--times-node", ep.times_node,
                      "attach activation times of the contagion seeded at this node's cluster");
    embed->add_option("--out", ep.out, "output projection CSV")->required();
    embed->callback([&] { run_embed(ep); });

    BifurcationParams bp;
    bp.workers = default_workers;
    auto* bif = app.add_subcommand("bifurcation", "ring stability over an (alpha, T) grid");
    bif->add_option("--n", bp.n, "node count")->required();
    bif->add_option("--dg", bp.dg, "geometric degree")->required();
    bif->add_option("--alphas", bp.alphas, "alpha sweep (start:end:step or comma list)")->required();
    bif->add_option("--Ts", bp.thresholds, "threshold sweep (start:end:step or comma list)")
        ->required();
    bif->add_option("--s", bp.s, "sweep budget")->required();
    bif->add_option("--seed", bp.seed, "rng seed")->capture_default_str();
    bif->add_option("--subsample", bp.subsample, "row subsample bound (<=0 disables)")
        ->capture_default_str();
    bif->add_option("--workers", bp.workers, "contagion parallelism")->capture_default_str();
    bif->add_option("--out", bp.out, "output grid CSV")->required();
    bif->callback([&] { run_bifurcation(bp); });

    auto* bench = app.add_subcommand("bench", "timing experiments");
    bench->require_subcommand(1);

    BenchSizeParams bsz;
    bsz.workers = default_workers;
    auto* bench_size = bench->add_subcommand("size", "map-assembly time versus network size");
    bench_size->add_option("--sizes", bsz.sizes, "comma list of sizes")->required();
    bench_size->add_option("--mode", bsz.modes, "map mode: full or trunc:<s> (repeatable)");
    bench_size->add_option("--T", bsz.threshold, "activation threshold")->capture_default_str();
    bench_size->add_option("--dg", bsz.dg, "geometric degree")->capture_default_str();
    bench_size->add_option("--dng", bsz.dng, "non-geometric degree")->capture_default_str();
    bench_size->add_option("--repeats", bsz.repeats, "timing repeats (minimum kept)")
        ->capture_default_str();
    bench_size->add_option("--seed", bsz.seed, "rng seed")->capture_default_str();
    bench_size->add_option("--workers", bsz.workers, "contagion parallelism")->capture_default_str();
    bench_size->add_option("--out", bsz.out, "output JSON report")->required();
    bench_size->callback([&] { run_bench_size(bsz); });

    BenchStepsParams bst;
    bst.workers = default_workers;
    auto* bench_steps = bench->add_subcommand("steps", "map-assembly time versus sweep budget");
    bench_steps->add_option("--n", bst.n, "node count")->required();
    bench_steps->add_option("--steps", bst.steps, "comma list of sweep budgets")->required();
    bench_steps->add_option("--T", bst.threshold, "activation threshold")->capture_default_str();
    bench_steps->add_option("--dg", bst.dg, "geometric degree")->capture_default_str();
    bench_steps->add_option("--dng", bst.dng, "non-geometric degree")->capture_default_str();
    bench_steps->add_option("--repeats", bst.repeats, "timing repeats (minimum kept)")
        ->capture_default_str();
    bench_steps->add_option("--seed", bst.seed, "rng seed")->capture_default_str();
    bench_steps->add_option("--workers", bst.workers, "contagion parallelism")
        ->capture_default_str();
    bench_steps->add_option("--out", bst.out, "output JSON report")->required();
    bench_steps->callback([&] { run_bench_steps(bst); });

    PipelineParams pl;
    pl.workers = default_workers;
    auto* pipeline = app.add_subcommand("pipeline", "generate -> map -> persist -> embed");
    pipeline->add_option("--n", pl.n, "node count")->required();
    pipeline->add_option("--dg", pl.dg, "geometric degree")->required();
    pipeline->add_option("--dng", pl.dng, "non-geometric degree")->required();
    pipeline->add_option("--T", pl.threshold, "activation threshold")->required();
    pipeline->add_option("--truncate", pl.truncate, "sweep budget s (omit for a full map)");
    pipeline->add_option("--k", pl.k, "embedding components")->capture_default_str();
    pipeline->add_option("--subsample", pl.subsample, "row subsample bound (<=0 disables)")
        ->capture_default_str();
    pipeline->add_option("--seed", pl.seed, "rng seed")->capture_default_str();
    pipeline->add_option("--workers", pl.workers, "contagion parallelism")->capture_default_str();
    pipeline->add_option("--outdir", pl.outdir, "output directory")->required();
    pipeline->callback([&] { run_pipeline(pl); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
