#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "conmap/graph.hpp"

namespace conmap {

/// Activation time marker for nodes a contagion never reaches.
inline constexpr std::int32_t kUnactivated = -1;

/// Per-step counts of activating edges (edges joining an already-active node
/// to a node activating this step), split by edge class.
struct EdgeTally {
    std::int64_t geometric = 0;
    std::int64_t non_geometric = 0;
    std::int64_t unlabeled = 0;

    std::int64_t total() const { return geometric + non_geometric + unlabeled; }
};

/// Result of one contagion realization. times[v] is the sweep at which v
/// activated (seeds are 0) or kUnactivated. q_series[t] is the active
/// fraction after sweep t (index 0 is the seed state), so it has
/// steps_run + 1 entries; edge_series has one entry per counted sweep.
struct ActivationRecord {
    std::vector<std::int32_t> times;
    std::vector<double> q_series;
    std::vector<EdgeTally> edge_series;
    std::int32_t steps_run = 0;
};

/// Seed set used by contagion maps: node j together with its neighborhood.
inline std::vector<std::int32_t> cluster_seed(const Network& net, std::int32_t j) {
    if (j < 0 || j >= net.node_count()) throw std::invalid_argument("cluster_seed: node out of range");
    const auto nb = net.neighbors(j);
    std::vector<std::int32_t> seeds;
    seeds.reserve(nb.size() + 1);
    const auto split = std::lower_bound(nb.begin(), nb.end(), j);
    seeds.insert(seeds.end(), nb.begin(), split);
    seeds.push_back(j);
    seeds.insert(seeds.end(), split, nb.end());
    return seeds;
}

namespace detail {

/// Working buffers for the sweep engine. Neighbor counts are epoch-stamped,
/// so starting the next contagion costs O(1) instead of an O(n) clear.
struct WtmScratch {
    std::vector<std::int32_t> need;         // active-neighbor count required to activate
    std::vector<std::int32_t> count;        // valid only where count_epoch matches
    std::vector<std::int32_t> count_epoch;
    std::vector<std::int32_t> cur;
    std::vector<std::int32_t> next;
    std::vector<std::int32_t> seed_buf;
    std::int32_t epoch = 0;

    void init(std::size_t n) {
        count.assign(n, 0);
        count_epoch.assign(n, 0);
        epoch = 0;
        cur.clear();
        next.clear();
    }

    /// A node with degree d activates iff count/d > T, i.e. count >= floor(T*d)+1.
    void compute_need(const Network& net, double threshold) {
        const auto n = static_cast<std::size_t>(net.node_count());
        need.resize(n);
        for (std::size_t v = 0; v < n; ++v) {
            const auto d = net.degree(static_cast<std::int32_t>(v));
            need[v] = d == 0 ? std::numeric_limits<std::int32_t>::max()
                             : static_cast<std::int32_t>(std::floor(threshold * d)) + 1;
        }
    }
};

/// Synchronous Watts-threshold dynamics, event-driven: a node is scheduled
/// for the next sweep at the moment its active-neighbor count crosses its
/// requirement, so each sweep costs O(newly active nodes and their edges)
/// rather than a rescan. Activation times are written through `times`
/// (seeds get 0, sweep k writes k); a node is treated as inactive while its
/// entry still equals `sentinel`, which the caller must prefill. Runs until
/// no activation is pending or max_steps sweeps executed (negative =
/// unbounded); returns the number of sweeps that activated nodes.
template <bool Telemetry>
inline std::int32_t wtm_sweeps(const Network& net, std::span<const std::int32_t> seeds,
                               std::int32_t max_steps, std::int32_t sentinel, std::int32_t* times,
                               WtmScratch& sc, std::vector<double>* q_series,
                               std::vector<EdgeTally>* edge_series) {
    const auto n = net.node_count();
    ++sc.epoch;
    const std::int32_t ep = sc.epoch;
    sc.cur.clear();

    auto bump = [&](std::int32_t u) {
        const auto ui = static_cast<std::size_t>(u);
        if (sc.count_epoch[ui] != ep) {
            sc.count_epoch[ui] = ep;
            sc.count[ui] = 0;
        }
        if (++sc.count[ui] == sc.need[ui]) sc.cur.push_back(u);
    };

    for (const auto s : seeds) times[s] = 0;
    for (const auto s : seeds)
        for (const auto u : net.neighbors(s))
            if (times[u] == sentinel) bump(u);

    std::int64_t active_total = static_cast<std::int64_t>(seeds.size());
    if constexpr (Telemetry) q_series->push_back(static_cast<double>(active_total) / n);

    std::int32_t step = 0;
    while (!sc.cur.empty() && (max_steps < 0 || step < max_steps)) {
        ++step;
        for (const auto w : sc.cur) times[w] = step;
        if constexpr (Telemetry) {
            EdgeTally tally;
            for (const auto w : sc.cur) {
                const auto nbrs = net.neighbors(w);
                const auto cls = net.neighbor_classes(w);
                for (std::size_t t = 0; t < nbrs.size(); ++t) {
                    const auto tu = times[nbrs[t]];
                    if (tu == sentinel || tu >= step) continue;  // inactive, or same sweep
                    switch (cls[t]) {
                        case EdgeClass::Geometric: ++tally.geometric; break;
                        case EdgeClass::NonGeometric: ++tally.non_geometric; break;
                        default: ++tally.unlabeled; break;
                    }
                }
            }
            edge_series->push_back(tally);
        }
        sc.next.clear();
        std::swap(sc.cur, sc.next);  // sc.next now holds this sweep's batch
        for (const auto w : sc.next)
            for (const auto u : net.neighbors(w))
                if (times[u] == sentinel) bump(u);
        active_total += static_cast<std::int64_t>(sc.next.size());
        if constexpr (Telemetry) q_series->push_back(static_cast<double>(active_total) / n);
    }
    return step;
}

inline void check_threshold(double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw std::invalid_argument("threshold must lie in [0, 1]");
}

}  // namespace detail

/// One synchronous Watts-threshold contagion from an explicit seed set.
/// A node with degree d > 0 activates once strictly more than a fraction
/// `threshold` of its neighbors are active; equality does not activate, and
/// active nodes never deactivate. Runs to a fixed point, or for at most
/// max_steps sweeps when given.
inline ActivationRecord wtm_run(const Network& net, std::vector<std::int32_t> seeds, double threshold,
                                std::optional<std::int32_t> max_steps = std::nullopt) {
    detail::check_threshold(threshold);
    if (seeds.empty()) throw std::invalid_argument("wtm_run: seed set must be non-empty");
    for (const auto s : seeds)
        if (s < 0 || s >= net.node_count()) throw std::invalid_argument("wtm_run: seed node out of range");
    if (max_steps && *max_steps < 1) throw std::invalid_argument("wtm_run: max_steps must be positive");
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

    const auto n = static_cast<std::size_t>(net.node_count());
    ActivationRecord rec;
    rec.times.assign(n, kUnactivated);
    detail::WtmScratch sc;
    sc.init(n);
    sc.compute_need(net, threshold);
    rec.steps_run = detail::wtm_sweeps<true>(net, seeds, max_steps ? *max_steps : -1, kUnactivated,
                                             rec.times.data(), sc, &rec.q_series, &rec.edge_series);
    return rec;
}

/// Map assembly mode: full contagions, or contagions truncated after s sweeps.
struct MapMode {
    enum class Kind : std::uint8_t { Full, Truncated };

    Kind kind = Kind::Full;
    std::int32_t s = 0;  // sweep budget, meaningful only when truncated

    static MapMode full() { return {Kind::Full, 0}; }
    static MapMode truncated(std::int32_t s) {
        if (s < 1) throw std::invalid_argument("MapMode::truncated: s must be >= 1");
        return {Kind::Truncated, s};
    }
    bool is_truncated() const { return kind == Kind::Truncated; }
    friend bool operator==(const MapMode& a, const MapMode& b) {
        return a.kind == b.kind && (a.kind == Kind::Full || a.s == b.s);
    }
};

/// All-pairs activation times. raw(i, j) is the time at which node i
/// activates under the contagion seeded at cluster_seed(j); nodes the
/// contagion never reaches within budget hold the placeholder (2n for full
/// maps, 2s for truncated ones). symmetric(i, j) = raw(i, j) + raw(j, i).
class ContagionMap {
public:
    ContagionMap(std::int32_t n, double threshold, MapMode mode, std::vector<std::int32_t> raw_cols,
                 std::vector<std::int32_t> symmetric)
        : n_(n),
          threshold_(threshold),
          mode_(mode),
          raw_cols_(std::move(raw_cols)),
          symmetric_(std::move(symmetric)) {}

    std::int32_t node_count() const { return n_; }
    double threshold() const { return threshold_; }
    MapMode mode() const { return mode_; }
    std::int32_t placeholder() const { return 2 * (mode_.is_truncated() ? mode_.s : n_); }

    std::int32_t raw(std::int32_t i, std::int32_t j) const {
        return raw_cols_[static_cast<std::size_t>(j) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i)];
    }
    std::int32_t sym(std::int32_t i, std::int32_t j) const {
        return symmetric_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)];
    }

    /// Row i of the symmetric matrix: node i's feature vector.
    std::span<const std::int32_t> sym_row(std::int32_t i) const {
        return {symmetric_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(n_),
                static_cast<std::size_t>(n_)};
    }
    const std::vector<std::int32_t>& sym_data() const { return symmetric_; }
    const std::vector<std::int32_t>& raw_data() const { return raw_cols_; }

private:
    std::int32_t n_;
    double threshold_;
    MapMode mode_;
    std::vector<std::int32_t> raw_cols_;   // column-major: one contagion per column
    std::vector<std::int32_t> symmetric_;  // row-major
};

/// Runs one cluster-seeded contagion per node and assembles the activation
/// times into a ContagionMap. Contagions are independent, so `workers`
/// threads may split the seeds; output is identical for any worker count.
inline ContagionMap contagion_map(const Network& net, double threshold, MapMode mode, int workers = 1) {
    detail::check_threshold(threshold);
    if (workers < 1) throw std::invalid_argument("contagion_map: workers must be >= 1");
    const auto n = net.node_count();
    const auto nu = static_cast<std::size_t>(n);
    const std::int32_t budget = mode.is_truncated() ? mode.s : -1;
    const std::int32_t placeholder = 2 * (mode.is_truncated() ? mode.s : n);

    std::vector<std::int32_t> raw_cols(nu * nu, placeholder);

    auto run_seeds = [&](std::atomic<std::int32_t>& pending) {
        detail::WtmScratch sc;
        sc.init(nu);
        sc.compute_need(net, threshold);
        for (;;) {
            const std::int32_t j = pending.fetch_add(1, std::memory_order_relaxed);
            if (j >= n) break;
            const auto nb = net.neighbors(j);
            sc.seed_buf.clear();
            sc.seed_buf.push_back(j);
            sc.seed_buf.insert(sc.seed_buf.end(), nb.begin(), nb.end());
            detail::wtm_sweeps<false>(net, sc.seed_buf, budget, placeholder,
                                      raw_cols.data() + static_cast<std::size_t>(j) * nu, sc, nullptr,
                                      nullptr);
        }
    };

    std::atomic<std::int32_t> pending{0};
    const int nthreads = std::min<int>(workers, n);
    if (nthreads <= 1) {
        run_seeds(pending);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nthreads));
        for (int t = 0; t < nthreads; ++t) pool.emplace_back([&] { run_seeds(pending); });
        for (auto& th : pool) th.join();
    }

    // Blocked transpose-add keeps the strided reads cache-resident.
    std::vector<std::int32_t> symmetric(nu * nu);
    constexpr std::int32_t kBlock = 64;
    for (std::int32_t ib = 0; ib < n; ib += kBlock)
        for (std::int32_t jb = 0; jb < n; jb += kBlock) {
            const std::int32_t ie = std::min(n, ib + kBlock);
            const std::int32_t je = std::min(n, jb + kBlock);
            for (std::int32_t i = ib; i < ie; ++i)
                for (std::int32_t j = jb; j < je; ++j)
                    symmetric[static_cast<std::size_t>(i) * nu + static_cast<std::size_t>(j)] =
                        raw_cols[static_cast<std::size_t>(j) * nu + static_cast<std::size_t>(i)] +
                        raw_cols[static_cast<std::size_t>(i) * nu + static_cast<std::size_t>(j)];
        }

    return ContagionMap(n, threshold, mode, std::move(raw_cols), std::move(symmetric));
}

/// Critical thresholds for wavefront propagation and for the appearance of
/// new clusters, as functions of the noisiness alpha.
inline std::pair<double, double> critical_thresholds(double alpha) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("critical_thresholds: alpha must be non-negative");
    return {1.0 / (2.0 + 2.0 * alpha), alpha / (1.0 + alpha)};
}

enum class Regime : std::uint8_t { WfpAndAnc, WfpOnly, AncOnly, Neither };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::WfpAndAnc: return "wfp_and_anc";
        case Regime::WfpOnly: return "wfp_only";
        case Regime::AncOnly: return "anc_only";
        default: return "neither";
    }
}

/// Classifies (alpha, T): each spreading mechanism occurs iff T lies
/// strictly below its critical threshold.
inline Regime regime(double alpha, double threshold) {
    detail::check_threshold(threshold);
    const auto [t_wfp, t_anc] = critical_thresholds(alpha);
    const bool wfp = threshold < t_wfp;
    const bool anc = threshold < t_anc;
    if (wfp && anc) return Regime::WfpAndAnc;
    if (wfp) return Regime::WfpOnly;
    if (anc) return Regime::AncOnly;
    return Regime::Neither;
}

}  // namespace conmap
