#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "conmap/error.hpp"
#include "conmap/matrix.hpp"
#include "conmap/rng.hpp"

namespace conmap {

enum class EdgeClass : std::uint8_t { Geometric, NonGeometric, Unlabeled };

inline const char* to_tag(EdgeClass c) {
    switch (c) {
        case EdgeClass::Geometric: return "G";
        case EdgeClass::NonGeometric: return "NG";
        default: return "U";
    }
}

struct Edge {
    std::int32_t u;
    std::int32_t v;
    EdgeClass cls;

    friend bool operator==(const Edge& a, const Edge& b) {
        return a.u == b.u && a.v == b.v && a.cls == b.cls;
    }
};

struct Vec2 {
    double x;
    double y;
};

/// Undirected simple graph with class-labelled edges and optional node
/// coordinates. Immutable after construction; adjacency is CSR with
/// neighbors sorted ascending, so lookups are deterministic.
class Network {
public:
    Network(std::int32_t n, std::vector<Edge> edges, std::vector<Vec2> positions = {})
        : n_(n), edges_(std::move(edges)), positions_(std::move(positions)) {
        if (n_ <= 0) throw std::invalid_argument("Network: node count must be positive");
        if (!positions_.empty() && static_cast<std::int32_t>(positions_.size()) != n_)
            throw std::invalid_argument("Network: positions must cover every node");
        for (auto& e : edges_) {
            if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_)
                throw std::invalid_argument("Network: edge endpoint out of range");
            if (e.u == e.v) throw std::invalid_argument("Network: self-loops are not allowed");
            if (e.u > e.v) std::swap(e.u, e.v);
        }
        std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
            return a.u != b.u ? a.u < b.u : a.v < b.v;
        });
        for (std::size_t i = 1; i < edges_.size(); ++i)
            if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v)
                throw std::invalid_argument("Network: parallel edges are not allowed");
        build_adjacency();
    }

    std::int32_t node_count() const { return n_; }
    const std::vector<Edge>& edges() const { return edges_; }
    bool has_positions() const { return !positions_.empty(); }
    const std::vector<Vec2>& positions() const { return positions_; }

    std::int32_t degree(std::int32_t v) const { return offsets_[v + 1] - offsets_[v]; }

    std::span<const std::int32_t> neighbors(std::int32_t v) const {
        return {adjacency_.data() + offsets_[v], static_cast<std::size_t>(degree(v))};
    }

    std::span<const EdgeClass> neighbor_classes(std::int32_t v) const {
        return {arc_classes_.data() + offsets_[v], static_cast<std::size_t>(degree(v))};
    }

    bool has_edge(std::int32_t u, std::int32_t v) const {
        const auto nb = neighbors(u);
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    std::size_t edge_count() const { return edges_.size(); }

    std::size_t edge_count(EdgeClass c) const {
        return static_cast<std::size_t>(
            std::count_if(edges_.begin(), edges_.end(), [c](const Edge& e) { return e.cls == c; }));
    }

private:
    void build_adjacency() {
        offsets_.assign(static_cast<std::size_t>(n_) + 1, 0);
        for (const auto& e : edges_) {
            ++offsets_[e.u + 1];
            ++offsets_[e.v + 1];
        }
        std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
        adjacency_.resize(edges_.size() * 2);
        arc_classes_.resize(edges_.size() * 2);
        std::vector<std::int32_t> cursor(offsets_.begin(), offsets_.end() - 1);
        for (const auto& e : edges_) {
            adjacency_[cursor[e.u]] = e.v;
            arc_classes_[cursor[e.u]++] = e.cls;
            adjacency_[cursor[e.v]] = e.u;
            arc_classes_[cursor[e.v]++] = e.cls;
        }
        // Edges are sorted by (u, v), which leaves each u-row sorted already;
        // rows written through the v endpoint are sorted by u for the same reason.
    }

    std::int32_t n_;
    std::vector<Edge> edges_;
    std::vector<Vec2> positions_;
    std::vector<std::int32_t> offsets_;
    std::vector<std::int32_t> adjacency_;
    std::vector<EdgeClass> arc_classes_;
};

namespace detail {

/// Random d-regular pairing on n nodes by stub matching. `forbidden(u, v)`
/// marks pairs that may never become edges (on top of self-loops and pairs
/// already matched). Each attempt draws stub pairs uniformly at random and
/// rejects invalid ones; a stuck attempt is restarted with a fresh stub list,
/// up to `max_restarts` attempts in total.
inline std::vector<Edge> stub_match(std::int32_t n, std::int32_t degree,
                                    const std::function<bool(std::int32_t, std::int32_t)>& forbidden,
                                    rng::Engine& eng, int max_restarts = 1000) {
    std::vector<Edge> result;
    if (degree == 0) return result;
    const std::size_t stub_total = static_cast<std::size_t>(n) * static_cast<std::size_t>(degree);
    const std::uint64_t reject_limit = 1000 + 50 * static_cast<std::uint64_t>(stub_total);

    std::vector<std::int32_t> stubs;
    std::unordered_set<std::int64_t> used;
    for (int attempt = 0; attempt < max_restarts; ++attempt) {
        stubs.clear();
        used.clear();
        result.clear();
        for (std::int32_t v = 0; v < n; ++v)
            stubs.insert(stubs.end(), static_cast<std::size_t>(degree), v);

        std::uint64_t rejects = 0;
        bool stuck = false;
        while (stubs.size() >= 2) {
            const std::size_t ai = static_cast<std::size_t>(rng::uniform_below(eng, stubs.size()));
            std::swap(stubs[ai], stubs.back());
            const std::size_t bi = static_cast<std::size_t>(rng::uniform_below(eng, stubs.size() - 1));
            const std::int32_t a = stubs.back();
            const std::int32_t b = stubs[bi];
            const std::int32_t u = std::min(a, b);
            const std::int32_t v = std::max(a, b);
            const std::int64_t key = static_cast<std::int64_t>(u) * n + v;
            if (u != v && !forbidden(u, v) && used.find(key) == used.end()) {
                used.insert(key);
                result.push_back({u, v, EdgeClass::NonGeometric});
                std::swap(stubs[bi], stubs[stubs.size() - 2]);
                stubs.pop_back();
                stubs.pop_back();
            } else if (++rejects > reject_limit) {
                stuck = true;
                break;
            }
        }
        if (!stuck) return result;
    }
    throw GenerationError("stub matching failed after " + std::to_string(max_restarts) + " restarts");
}

inline std::int32_t ring_distance(std::int32_t i, std::int32_t j, std::int32_t n) {
    const std::int32_t d = std::abs(i - j);
    return std::min(d, n - d);
}

}  // namespace detail

/// Noisy ring lattice NRL(n, d_g, d_ng): n nodes on the unit circle, each
/// joined to its d_g nearest ring neighbors by geometric edges, plus exactly
/// d_ng non-geometric edges per node from stub matching. Deterministic for a
/// given seed (mt19937_64 stream, see rng.hpp).
inline Network noisy_ring_lattice(std::int32_t n, std::int32_t d_g, std::int32_t d_ng,
                                  std::uint64_t rng_seed) {
    if (n <= 0) throw std::invalid_argument("noisy_ring_lattice: n must be positive");
    if (d_g <= 0 || d_g % 2 != 0) throw std::invalid_argument("noisy_ring_lattice: d_g must be even and positive");
    if (d_g >= n) throw std::invalid_argument("noisy_ring_lattice: d_g must be smaller than n");
    if (d_ng < 0) throw std::invalid_argument("noisy_ring_lattice: d_ng must be non-negative");
    if ((static_cast<std::int64_t>(d_ng) * n) % 2 != 0)
        throw std::invalid_argument("noisy_ring_lattice: d_ng * n must be even");
    if (d_g + d_ng >= n) throw std::invalid_argument("noisy_ring_lattice: d_g + d_ng must be smaller than n");

    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(d_g + d_ng) / 2);
    const std::int32_t reach = d_g / 2;
    for (std::int32_t i = 0; i < n; ++i)
        for (std::int32_t r = 1; r <= reach; ++r) {
            const std::int32_t j = (i + r) % n;
            edges.push_back({std::min(i, j), std::max(i, j), EdgeClass::Geometric});
        }

    rng::Engine eng(rng_seed);
    auto forbidden = [n, reach](std::int32_t u, std::int32_t v) {
        return detail::ring_distance(u, v, n) <= reach;  // would duplicate a geometric edge
    };
    auto noise = detail::stub_match(n, d_ng, forbidden, eng);
    edges.insert(edges.end(), noise.begin(), noise.end());

    std::vector<Vec2> positions(static_cast<std::size_t>(n));
    const double two_pi = 2.0 * 3.141592653589793238462643;
    for (std::int32_t i = 0; i < n; ++i)
        positions[static_cast<std::size_t>(i)] = {std::cos(two_pi * i / n), std::sin(two_pi * i / n)};

    return Network(n, std::move(edges), std::move(positions));
}

/// Noisiness alpha: mean non-geometric degree over mean geometric degree.
inline double noisiness(const Network& net) {
    const auto geometric = net.edge_count(EdgeClass::Geometric);
    if (geometric == 0) throw std::domain_error("noisiness: network has no geometric edges");
    return static_cast<double>(net.edge_count(EdgeClass::NonGeometric)) / static_cast<double>(geometric);
}

/// Sample-by-feature matrix with optional per-row category labels.
struct FeatureMatrix {
    Matrix values;
    std::vector<std::string> labels;  // empty, or one label per row

    std::size_t rows() const { return values.rows; }
    std::size_t cols() const { return values.cols; }
    bool labeled() const { return !labels.empty(); }
};

/// k-nearest-neighbour graph on feature rows under Euclidean distance.
/// Edge {i, j} exists iff j is among the k nearest of i or vice versa
/// (union rule); distance ties break toward the lower node index.
inline Network knn_graph(const FeatureMatrix& features, std::int32_t k) {
    const auto n = static_cast<std::int32_t>(features.rows());
    if (k <= 0) throw std::invalid_argument("knn_graph: k must be positive");
    if (k >= n) throw std::invalid_argument("knn_graph: k must be smaller than the number of rows");
    if (!features.values.all_finite()) throw std::invalid_argument("knn_graph: features must be finite");

    const std::size_t dim = features.cols();
    std::vector<std::pair<double, std::int32_t>> order(static_cast<std::size_t>(n) - 1);
    std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
    for (std::int32_t i = 0; i < n; ++i) {
        order.clear();
        const double* pi = features.values.row(static_cast<std::size_t>(i));
        for (std::int32_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double sum = 0.0;
            const double* pj = features.values.row(static_cast<std::size_t>(j));
            for (std::size_t f = 0; f < dim; ++f) {
                const double d = pi[f] - pj[f];
                sum += d * d;
            }
            order.emplace_back(sum, j);
        }
        std::partial_sort(order.begin(), order.begin() + k, order.end());
        for (std::int32_t t = 0; t < k; ++t) {
            const std::int32_t j = order[static_cast<std::size_t>(t)].second;
            pairs.emplace_back(std::min(i, j), std::max(i, j));
        }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    for (const auto& [u, v] : pairs) edges.push_back({u, v, EdgeClass::Unlabeled});
    return Network(n, std::move(edges));
}

}  // namespace conmap
