#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#if defined(__unix__) || defined(__APPLE__)
#include <unistd.h>
#endif

#include "conmap/contagion.hpp"
#include "conmap/graph.hpp"
#include "conmap/matrix.hpp"
#include "conmap/rng.hpp"
#include "conmap/tda.hpp"

namespace conmap {

/// Power-law fit y = zeta * x^gamma obtained by least squares on logs.
struct ScalingFit {
    double zeta = 0.0;
    double gamma = 0.0;
    double r_squared = 0.0;
    std::vector<std::pair<double, double>> samples;  // (x, seconds) as measured
};

/// Ring-lattice degree configuration; noisiness alpha = d_ng / d_g.
struct NrlConfig {
    std::int32_t d_g = 6;
    std::int32_t d_ng = 2;

    double alpha() const { return static_cast<double>(d_ng) / static_cast<double>(d_g); }
};

struct BifurcationGrid {
    std::vector<double> alphas;
    std::vector<double> thresholds;
    Matrix delta;                 // alphas.size() x thresholds.size()
    std::vector<Regime> regimes;  // row-major, same shape as delta

    Regime regime_at(std::size_t a, std::size_t t) const { return regimes[a * thresholds.size() + t]; }
};

struct TruncationChoice {
    std::int32_t s_star = 0;
    double delta = 0.0;
};

struct HostInfo {
    std::string hostname;
    std::string compiler;
    unsigned hardware_threads = 0;
};

inline HostInfo host_info() {
    HostInfo h;
#if defined(__unix__) || defined(__APPLE__)
    char buf[256] = {};
    if (::gethostname(buf, sizeof(buf) - 1) == 0) h.hostname = buf;
#endif
    if (h.hostname.empty()) h.hostname = "unknown";
#if defined(__VERSION__)
    h.compiler = __VERSION__;
#else
    h.compiler = "unknown";
#endif
    h.hardware_threads = std::thread::hardware_concurrency();
    return h;
}

/// Ordinary least squares on (log x, log y). Needs at least three strictly
/// positive samples. A constant y (zero log-variance) is reported as a
/// perfect fit with gamma = 0.
inline ScalingFit loglog_fit(std::vector<std::pair<double, double>> samples) {
    if (samples.size() < 3) throw std::invalid_argument("loglog_fit: need at least three samples");
    const auto n = static_cast<double>(samples.size());
    double mx = 0.0;
    double my = 0.0;
    for (const auto& [x, y] : samples) {
        if (!(x > 0.0) || !(y > 0.0)) throw std::invalid_argument("loglog_fit: samples must be positive");
        mx += std::log(x);
        my += std::log(y);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [x, y] : samples) {
        const double dx = std::log(x) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y) - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("loglog_fit: need at least two distinct x values");

    ScalingFit fit;
    fit.gamma = sxy / sxx;
    fit.zeta = std::exp(my - fit.gamma * mx);
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (const auto& [x, y] : samples) {
        const double ly = std::log(y);
        const double pred = (my - fit.gamma * mx) + fit.gamma * std::log(x);
        ss_res += (ly - pred) * (ly - pred);
        ss_tot += (ly - my) * (ly - my);
    }
    fit.r_squared = ss_tot <= 1e-24 ? 1.0 : std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
    fit.samples = std::move(samples);
    return fit;
}

namespace detail {

inline std::atomic<std::int64_t> timing_sink{0};

}  // namespace detail

/// Wall-clock seconds for one contagion-map assembly, minimum over repeats.
/// Times only contagion_map (network generation and any downstream TDA are
/// excluded by construction).
inline double time_contagion_map(const Network& net, double threshold, MapMode mode, int repeats = 3,
                                 int workers = 1) {
    if (repeats < 1) throw std::invalid_argument("time_contagion_map: repeats must be positive");
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        const ContagionMap cm = contagion_map(net, threshold, mode, workers);
        const auto t1 = std::chrono::steady_clock::now();
        detail::timing_sink.fetch_add(cm.sym(0, net.node_count() - 1), std::memory_order_relaxed);
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

/// Times contagion-map assembly across network sizes (one noisy ring
/// lattice per size, seeded from rng_seed) and fits delta_t ~ n^gamma.
inline ScalingFit scaling_experiment(const std::vector<std::int32_t>& sizes, MapMode mode, double threshold,
                                     NrlConfig cfg, int repeats, std::uint64_t rng_seed, int workers = 1) {
    if (sizes.size() < 2) throw std::invalid_argument("scaling_experiment: need at least two sizes");
    std::vector<std::pair<double, double>> samples;
    samples.reserve(sizes.size());
    for (const auto n : sizes) {
        const Network net = noisy_ring_lattice(n, cfg.d_g, cfg.d_ng,
                                               rng::derive_seed(rng_seed, static_cast<std::uint64_t>(n)));
        samples.emplace_back(static_cast<double>(n), time_contagion_map(net, threshold, mode, repeats, workers));
    }
    return loglog_fit(std::move(samples));
}

/// Times truncated maps on one fixed network while the sweep budget s
/// varies, and fits delta_t ~ s^gamma. Meaningful when n is large enough
/// that the budget binds for every s in the list.
inline ScalingFit step_scaling_experiment(std::int32_t n, const std::vector<std::int32_t>& steps,
                                          double threshold, NrlConfig cfg, int repeats,
                                          std::uint64_t rng_seed, int workers = 1) {
    if (steps.empty()) throw std::invalid_argument("step_scaling_experiment: need step values");
    const Network net =
        noisy_ring_lattice(n, cfg.d_g, cfg.d_ng, rng::derive_seed(rng_seed, static_cast<std::uint64_t>(n)));
    std::vector<std::pair<double, double>> samples;
    samples.reserve(steps.size());
    for (const auto s : steps)
        samples.emplace_back(static_cast<double>(s),
                             time_contagion_map(net, threshold, MapMode::truncated(s), repeats, workers));
    return loglog_fit(std::move(samples));
}

/// Ring stability of truncated maps over an (alpha, T) grid. One network
/// per alpha (d_ng = round(alpha * d_g)), reused across thresholds; each
/// cell also records the analytic regime. The stored alphas are the
/// effective d_ng / d_g ratios.
inline BifurcationGrid bifurcation_sweep(std::int32_t n, std::int32_t d_g,
                                         const std::vector<double>& thresholds,
                                         const std::vector<double>& alphas, std::int32_t s,
                                         std::uint64_t rng_seed, int workers = 1,
                                         std::int32_t max_points = 600) {
    if (thresholds.empty() || alphas.empty())
        throw std::invalid_argument("bifurcation_sweep: grid must be non-empty");
    BifurcationGrid grid;
    grid.thresholds = thresholds;
    grid.delta = Matrix(alphas.size(), thresholds.size());
    grid.regimes.resize(alphas.size() * thresholds.size());
    grid.alphas.reserve(alphas.size());
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        const auto d_ng = static_cast<std::int32_t>(std::llround(alphas[a] * d_g));
        const Network net =
            noisy_ring_lattice(n, d_g, d_ng, rng::derive_seed(rng_seed, static_cast<std::uint64_t>(a)));
        const double alpha_eff = static_cast<double>(d_ng) / static_cast<double>(d_g);
        grid.alphas.push_back(alpha_eff);
        for (std::size_t t = 0; t < thresholds.size(); ++t) {
            const ContagionMap cm = contagion_map(net, thresholds[t], MapMode::truncated(s), workers);
            grid.delta.at(a, t) = ring_stability_of_map(cm, max_points, rng::derive_seed(rng_seed, 5));
            grid.regimes[a * thresholds.size() + t] = regime(alpha_eff, thresholds[t]);
        }
    }
    return grid;
}

/// Sweep-budget search: evaluates the ring stability of Truncated(s) maps
/// for every candidate s and returns the argmax (ties toward the smallest
/// s). With realizations > 1, each candidate is scored by the median over
/// independently generated networks, which tames single-network noise.
inline TruncationChoice optimal_truncation(std::int32_t n, double threshold, NrlConfig cfg,
                                           std::vector<std::int32_t> s_candidates, std::uint64_t rng_seed,
                                           int realizations = 1, int workers = 1,
                                           std::int32_t max_points = 600) {
    if (s_candidates.empty()) throw std::invalid_argument("optimal_truncation: need candidate s values");
    if (realizations < 1) throw std::invalid_argument("optimal_truncation: realizations must be positive");
    std::sort(s_candidates.begin(), s_candidates.end());
    s_candidates.erase(std::unique(s_candidates.begin(), s_candidates.end()), s_candidates.end());

    std::vector<std::vector<double>> scores(s_candidates.size());
    for (int r = 0; r < realizations; ++r) {
        const Network net = noisy_ring_lattice(n, cfg.d_g, cfg.d_ng,
                                               rng::derive_seed(rng_seed, static_cast<std::uint64_t>(r)));
        for (std::size_t i = 0; i < s_candidates.size(); ++i) {
            const ContagionMap cm = contagion_map(net, threshold, MapMode::truncated(s_candidates[i]), workers);
            scores[i].push_back(ring_stability_of_map(cm, max_points, rng::derive_seed(rng_seed, 5)));
        }
    }

    TruncationChoice best{s_candidates.front(), median_of(scores.front())};
    for (std::size_t i = 1; i < s_candidates.size(); ++i) {
        const double d = median_of(scores[i]);
        if (d > best.delta) best = {s_candidates[i], d};
    }
    return best;
}

}  // namespace conmap
