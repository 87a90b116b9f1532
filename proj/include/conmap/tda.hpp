#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "conmap/contagion.hpp"
#include "conmap/matrix.hpp"
#include "conmap/rng.hpp"

namespace conmap {

struct Interval {
    double birth;
    double death;  // +infinity when the class survives past max_scale

    bool is_infinite() const { return std::isinf(death); }
    double lifetime() const { return death - birth; }
    friend bool operator==(const Interval& a, const Interval& b) {
        return a.birth == b.birth && a.death == b.death;
    }
};

struct Barcode {
    std::vector<Interval> h0;
    std::vector<Interval> h1;
};

/// Point set under a semimetric: stored as the full pairwise distance
/// matrix, either computed from Euclidean coordinates or supplied directly.
/// The triangle inequality is not assumed.
class PointCloud {
public:
    static PointCloud from_points(const Matrix& points) {
        if (points.rows == 0) throw std::invalid_argument("PointCloud: need at least one point");
        if (!points.all_finite()) throw std::invalid_argument("PointCloud: coordinates must be finite");
        const std::size_t n = points.rows;
        Matrix d(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double v = euclidean_distance(points.row(i), points.row(j), points.cols);
                d.at(i, j) = v;
                d.at(j, i) = v;
            }
        return PointCloud(std::move(d));
    }

    static PointCloud from_distances(Matrix distances) {
        if (distances.rows == 0 || distances.rows != distances.cols)
            throw std::invalid_argument("PointCloud: distance matrix must be square and non-empty");
        if (!distances.all_finite()) throw std::invalid_argument("PointCloud: distances must be finite");
        for (std::size_t i = 0; i < distances.rows; ++i) {
            if (distances.at(i, i) != 0.0)
                throw std::invalid_argument("PointCloud: distance matrix diagonal must be zero");
            for (std::size_t j = i + 1; j < distances.cols; ++j) {
                if (distances.at(i, j) < 0.0)
                    throw std::invalid_argument("PointCloud: distances must be non-negative");
                if (distances.at(i, j) != distances.at(j, i))
                    throw std::invalid_argument("PointCloud: distance matrix must be symmetric");
            }
        }
        return PointCloud(std::move(distances));
    }

    std::size_t size() const { return dist_.rows; }
    double distance(std::size_t i, std::size_t j) const { return dist_.at(i, j); }
    const Matrix& distances() const { return dist_; }

    double max_distance() const {
        double m = 0.0;
        for (const double v : dist_.data) m = std::max(m, v);
        return m;
    }

private:
    explicit PointCloud(Matrix d) : dist_(std::move(d)) {}
    Matrix dist_;
};

/// Simplex of dimension 0..2; vertices ascending, unused slots -1.
struct Simplex {
    double value;
    std::int8_t dim;
    std::array<std::int32_t, 3> v;

    friend bool operator==(const Simplex& a, const Simplex& b) {
        return a.value == b.value && a.dim == b.dim && a.v == b.v;
    }
};

inline bool simplex_before(const Simplex& a, const Simplex& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.dim != b.dim) return a.dim < b.dim;
    return a.v < b.v;
}

struct Filtration {
    std::int32_t vertex_count = 0;
    std::vector<Simplex> simplices;  // sorted by (value, dim, vertex tuple)
};

/// Vietoris-Rips filtration up to dimension 2: a simplex enters at the
/// largest pairwise distance among its vertices, provided that does not
/// exceed max_scale.
inline Filtration rips_filtration(const PointCloud& pc, double max_scale) {
    if (!(max_scale >= 0.0)) throw std::invalid_argument("rips_filtration: max_scale must be non-negative");
    const auto n = static_cast<std::int32_t>(pc.size());
    Filtration f;
    f.vertex_count = n;
    for (std::int32_t i = 0; i < n; ++i) f.simplices.push_back({0.0, 0, {i, -1, -1}});
    for (std::int32_t i = 0; i < n; ++i)
        for (std::int32_t j = i + 1; j < n; ++j) {
            const double d = pc.distance(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            if (d <= max_scale) f.simplices.push_back({d, 1, {i, j, -1}});
        }
    for (std::int32_t i = 0; i < n; ++i)
        for (std::int32_t j = i + 1; j < n; ++j) {
            const double dij = pc.distance(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            if (dij > max_scale) continue;
            for (std::int32_t k = j + 1; k < n; ++k) {
                const double d = std::max({dij, pc.distance(static_cast<std::size_t>(i), static_cast<std::size_t>(k)),
                                           pc.distance(static_cast<std::size_t>(j), static_cast<std::size_t>(k))});
                if (d <= max_scale) f.simplices.push_back({d, 2, {i, j, k}});
            }
        }
    std::sort(f.simplices.begin(), f.simplices.end(), simplex_before);
    return f;
}

namespace detail {

/// Union-find tracking each component's oldest vertex; ties in birth value
/// resolve toward the lower vertex index (the elder rule's tie-break).
struct ElderForest {
    std::vector<std::int32_t> parent;
    std::vector<double> birth_value;
    std::vector<std::int32_t> birth_vertex;

    void init(std::int32_t n) {
        parent.resize(static_cast<std::size_t>(n));
        std::iota(parent.begin(), parent.end(), 0);
        birth_value.assign(static_cast<std::size_t>(n), 0.0);
        birth_vertex.resize(static_cast<std::size_t>(n));
        std::iota(birth_vertex.begin(), birth_vertex.end(), 0);
    }

    std::int32_t find(std::int32_t x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }

    /// Merges the components of u and v at filtration value `value`.
    /// Returns false when they were already connected (a cycle-creating
    /// edge); otherwise appends the younger component's interval to h0
    /// (unless zero-length) and keeps the elder as representative.
    bool merge(std::int32_t u, std::int32_t v, double value, std::vector<Interval>& h0) {
        std::int32_t ru = find(u);
        std::int32_t rv = find(v);
        if (ru == rv) return false;
        const bool u_elder = birth_value[static_cast<std::size_t>(ru)] != birth_value[static_cast<std::size_t>(rv)]
                                 ? birth_value[static_cast<std::size_t>(ru)] < birth_value[static_cast<std::size_t>(rv)]
                                 : birth_vertex[static_cast<std::size_t>(ru)] < birth_vertex[static_cast<std::size_t>(rv)];
        if (!u_elder) std::swap(ru, rv);
        if (value > birth_value[static_cast<std::size_t>(rv)])
            h0.push_back({birth_value[static_cast<std::size_t>(rv)], value});
        parent[static_cast<std::size_t>(rv)] = ru;
        return true;
    }
};

/// Column reduction over Z/2 for the edge-triangle boundary block. Columns
/// arrive in filtration order as sorted lists of edge ranks; the pivot is
/// the largest rank. A column that reduces to empty creates nothing; one
/// that survives pairs its pivot edge with the triangle's value. Reduction
/// chains accumulate into a dense bitset over edge ranks, so each collision
/// costs the stored column's length instead of a merge of both operands.
struct H1Reducer {
    std::vector<std::int32_t> owner;  // edge rank -> index into stored, or -1
    std::vector<std::vector<std::int32_t>> stored;
    std::vector<std::pair<std::int32_t, double>> pairs;  // (pivot edge rank, death value)
    std::vector<std::uint64_t> scratch;  // dense accumulator; all zero between calls

    void init(std::size_t edge_count) {
        owner.assign(edge_count, -1);
        stored.clear();
        pairs.clear();
        scratch.assign(edge_count / 64 + 1, 0);
    }

    void flip(std::int32_t bit) {
        scratch[static_cast<std::size_t>(bit) >> 6] ^= std::uint64_t{1} << (bit & 63);
    }

    void add_triangle(std::vector<std::int32_t>& col, double value) {
        if (col.empty()) return;
        std::int32_t piv = col.back();
        std::int32_t ow = owner[static_cast<std::size_t>(piv)];
        if (ow >= 0) {
            std::int32_t lo = col.front();
            for (const std::int32_t r : col) flip(r);
            while (true) {
                const std::vector<std::int32_t>& other = stored[static_cast<std::size_t>(ow)];
                lo = std::min(lo, other.front());
                for (const std::int32_t r : other) flip(r);
                // the shared pivot cancelled; rescan downward for the new one
                std::int32_t w = piv >> 6;
                while (w >= 0 && scratch[static_cast<std::size_t>(w)] == 0) --w;
                if (w < 0) return;  // column vanished; the accumulator is zero again
                piv = w * 64 + 63 - std::countl_zero(scratch[static_cast<std::size_t>(w)]);
                ow = owner[static_cast<std::size_t>(piv)];
                if (ow < 0) break;
            }
            col.clear();
            for (std::int32_t w = lo >> 6; w <= piv >> 6; ++w) {
                std::uint64_t bits = scratch[static_cast<std::size_t>(w)];
                scratch[static_cast<std::size_t>(w)] = 0;
                while (bits != 0) {
                    col.push_back(w * 64 + std::countr_zero(bits));
                    bits &= bits - 1;
                }
            }
        }
        owner[static_cast<std::size_t>(piv)] = static_cast<std::int32_t>(stored.size());
        pairs.emplace_back(piv, value);
        stored.push_back(col);
    }
};

inline void finish_barcode(Barcode& bc) {
    auto by_birth = [](const Interval& a, const Interval& b) {
        return a.birth != b.birth ? a.birth < b.birth : a.death < b.death;
    };
    std::sort(bc.h0.begin(), bc.h0.end(), by_birth);
    std::sort(bc.h1.begin(), bc.h1.end(), by_birth);
}

/// Persistence of the Rips filtration of a distance matrix, fused with the
/// filtration construction: triangles are enumerated grouped by their
/// maximal-rank edge and reduced immediately, so no global simplex list is
/// materialized. The barcode matches persistence(rips_filtration(...)).
inline Barcode rips_persistence(const Matrix& dist, double max_scale) {
    const auto n = static_cast<std::int32_t>(dist.rows);
    struct REdge {
        double d;
        std::int32_t i, j;
    };
    std::vector<REdge> edges;
    for (std::int32_t i = 0; i < n; ++i)
        for (std::int32_t j = i + 1; j < n; ++j) {
            const double d = dist.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            if (d <= max_scale) edges.push_back({d, i, j});
        }
    std::sort(edges.begin(), edges.end(), [](const REdge& a, const REdge& b) {
        if (a.d != b.d) return a.d < b.d;
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    const auto edge_count = static_cast<std::int32_t>(edges.size());

    std::vector<std::int32_t> rank(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), -1);
    for (std::int32_t r = 0; r < edge_count; ++r) {
        rank[static_cast<std::size_t>(edges[static_cast<std::size_t>(r)].i) * n + edges[static_cast<std::size_t>(r)].j] = r;
        rank[static_cast<std::size_t>(edges[static_cast<std::size_t>(r)].j) * n + edges[static_cast<std::size_t>(r)].i] = r;
    }

    Barcode bc;
    ElderForest forest;
    forest.init(n);
    std::vector<std::uint8_t> positive(static_cast<std::size_t>(edge_count), 0);
    for (std::int32_t r = 0; r < edge_count; ++r) {
        const auto& e = edges[static_cast<std::size_t>(r)];
        if (!forest.merge(e.i, e.j, e.d, bc.h0)) positive[static_cast<std::size_t>(r)] = 1;
    }
    for (std::int32_t v = 0; v < n; ++v)
        if (forest.find(v) == v) bc.h0.push_back({0.0, std::numeric_limits<double>::infinity()});

    H1Reducer reducer;
    reducer.init(static_cast<std::size_t>(edge_count));
    std::vector<std::int32_t> col;
    for (std::int32_t rp = 0; rp < edge_count; ++rp) {
        const auto& e = edges[static_cast<std::size_t>(rp)];
        const std::int32_t* row_i = rank.data() + static_cast<std::size_t>(e.i) * n;
        const std::int32_t* row_j = rank.data() + static_cast<std::size_t>(e.j) * n;
        for (std::int32_t k = 0; k < n; ++k) {
            const std::int32_t r1 = row_i[k];
            const std::int32_t r2 = row_j[k];
            if (r1 < 0 || r2 < 0 || r1 >= rp || r2 >= rp) continue;  // k == i or j lands here (rank -1)
            col.resize(3);
            col[0] = std::min(r1, r2);
            col[1] = std::max(r1, r2);
            col[2] = rp;
            reducer.add_triangle(col, e.d);
        }
    }
    for (const auto& [piv, death] : reducer.pairs) {
        const double birth = edges[static_cast<std::size_t>(piv)].d;
        if (death > birth) bc.h1.push_back({birth, death});
    }
    for (std::int32_t r = 0; r < edge_count; ++r)
        if (positive[static_cast<std::size_t>(r)] && reducer.owner[static_cast<std::size_t>(r)] < 0)
            bc.h1.push_back({edges[static_cast<std::size_t>(r)].d, std::numeric_limits<double>::infinity()});

    finish_barcode(bc);
    return bc;
}

}  // namespace detail

/// Persistent homology (dimensions 0 and 1) of an explicit filtration.
/// H0 via union-find with the elder rule, H1 via boundary reduction over
/// Z/2; zero-length intervals are dropped; classes alive at the end of the
/// filtration get death = infinity.
inline Barcode persistence(const Filtration& f) {
    const std::int32_t n = f.vertex_count;
    if (n <= 0) throw std::invalid_argument("persistence: filtration must declare its vertices");

    std::vector<std::uint8_t> vertex_seen(static_cast<std::size_t>(n), 0);
    std::unordered_map<std::int64_t, std::int32_t> edge_rank;
    std::vector<double> edge_value;
    std::vector<std::array<std::int32_t, 3>> triangle_edges;
    std::vector<double> triangle_value;
    auto edge_key = [n](std::int32_t u, std::int32_t v) {
        return static_cast<std::int64_t>(u) * n + v;
    };

    for (std::size_t p = 0; p < f.simplices.size(); ++p) {
        const Simplex& s = f.simplices[p];
        if (!std::isfinite(s.value)) throw std::invalid_argument("persistence: non-finite filtration value");
        if (p > 0 && !simplex_before(f.simplices[p - 1], s))
            throw std::invalid_argument("persistence: filtration is not sorted by (value, dim, vertices)");
        const int expected = s.dim + 1;
        for (int t = 0; t < 3; ++t) {
            if (t < expected) {
                if (s.v[static_cast<std::size_t>(t)] < 0 || s.v[static_cast<std::size_t>(t)] >= n)
                    throw std::invalid_argument("persistence: vertex index out of range");
                if (t > 0 && s.v[static_cast<std::size_t>(t)] <= s.v[static_cast<std::size_t>(t - 1)])
                    throw std::invalid_argument("persistence: simplex vertices must be strictly ascending");
            } else if (s.v[static_cast<std::size_t>(t)] != -1) {
                throw std::invalid_argument("persistence: unused vertex slots must be -1");
            }
        }
        switch (s.dim) {
            case 0:
                vertex_seen[static_cast<std::size_t>(s.v[0])] = 1;
                break;
            case 1: {
                if (!vertex_seen[static_cast<std::size_t>(s.v[0])] || !vertex_seen[static_cast<std::size_t>(s.v[1])])
                    throw std::invalid_argument("persistence: edge appears before one of its vertices");
                edge_rank.emplace(edge_key(s.v[0], s.v[1]), static_cast<std::int32_t>(edge_value.size()));
                edge_value.push_back(s.value);
                break;
            }
            case 2: {
                std::array<std::int32_t, 3> ranks{};
                const std::array<std::pair<std::int32_t, std::int32_t>, 3> faces{
                    {{s.v[0], s.v[1]}, {s.v[0], s.v[2]}, {s.v[1], s.v[2]}}};
                for (std::size_t t = 0; t < 3; ++t) {
                    const auto it = edge_rank.find(edge_key(faces[t].first, faces[t].second));
                    if (it == edge_rank.end())
                        throw std::invalid_argument("persistence: triangle appears before one of its edges");
                    ranks[t] = it->second;
                }
                std::sort(ranks.begin(), ranks.end());
                triangle_edges.push_back(ranks);
                triangle_value.push_back(s.value);
                break;
            }
            default:
                throw std::invalid_argument("persistence: simplex dimension must be 0, 1, or 2");
        }
    }
    for (std::int32_t v = 0; v < n; ++v)
        if (!vertex_seen[static_cast<std::size_t>(v)])
            throw std::invalid_argument("persistence: filtration is missing a vertex simplex");

    // Vertex birth values: rescan dimension-0 simplices in order.
    Barcode bc;
    detail::ElderForest forest;
    forest.init(n);
    for (const Simplex& s : f.simplices)
        if (s.dim == 0) forest.birth_value[static_cast<std::size_t>(s.v[0])] = s.value;

    std::vector<std::uint8_t> positive(edge_value.size(), 0);
    {
        std::int32_t r = 0;
        for (const Simplex& s : f.simplices)
            if (s.dim == 1) {
                if (!forest.merge(s.v[0], s.v[1], s.value, bc.h0)) positive[static_cast<std::size_t>(r)] = 1;
                ++r;
            }
    }
    for (std::int32_t v = 0; v < n; ++v)
        if (forest.find(v) == v)
            bc.h0.push_back({forest.birth_value[static_cast<std::size_t>(v)], std::numeric_limits<double>::infinity()});

    detail::H1Reducer reducer;
    reducer.init(edge_value.size());
    std::vector<std::int32_t> col;
    for (std::size_t t = 0; t < triangle_edges.size(); ++t) {
        col.assign(triangle_edges[t].begin(), triangle_edges[t].end());
        reducer.add_triangle(col, triangle_value[t]);
    }
    for (const auto& [piv, death] : reducer.pairs) {
        const double birth = edge_value[static_cast<std::size_t>(piv)];
        if (death > birth) bc.h1.push_back({birth, death});
    }
    for (std::size_t r = 0; r < edge_value.size(); ++r)
        if (positive[r] && reducer.owner[r] < 0)
            bc.h1.push_back({edge_value[r], std::numeric_limits<double>::infinity()});

    detail::finish_barcode(bc);
    return bc;
}

/// Difference between the two longest 1-dimensional lifetimes. One interval
/// counts the missing second lifetime as 0; no intervals give 0. Infinite
/// intervals are an error: recompute the barcode with a larger max_scale.
inline double ring_stability(const Barcode& bc) {
    double l1 = 0.0;
    double l2 = 0.0;
    for (const Interval& iv : bc.h1) {
        if (iv.is_infinite())
            throw std::invalid_argument(
                "ring_stability: barcode has an infinite 1-dimensional interval; recompute with a larger max_scale");
        const double life = iv.lifetime();
        if (life > l1) {
            l2 = l1;
            l1 = life;
        } else if (life > l2) {
            l2 = life;
        }
    }
    return l1 - l2;
}

/// Rips barcode over rows of a row-major n-by-n symmetric activation-time
/// matrix: rows are points in n-dimensional Euclidean space, and max_scale
/// is their maximum pairwise distance (so every 1-cycle dies). More than
/// max_points rows are subsampled uniformly without replacement (seeded);
/// pass max_points <= 0 to disable subsampling.
inline Barcode rips_of_rows(const std::int32_t* sym, std::int32_t n, std::int32_t max_points = 600,
                            std::uint64_t rng_seed = 0) {
    if (n <= 0) throw std::invalid_argument("rips_of_rows: n must be positive");
    std::vector<std::int32_t> rows;
    if (max_points > 0 && n > max_points) {
        rng::Engine eng(rng_seed);
        rows = rng::sample_indices(n, max_points, eng);
    } else {
        rows.resize(static_cast<std::size_t>(n));
        std::iota(rows.begin(), rows.end(), 0);
    }
    const std::size_t m = rows.size();
    const std::size_t nn = static_cast<std::size_t>(n);

    Matrix d(m, m);
    double max_d = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
        const std::int32_t* ra = sym + static_cast<std::size_t>(rows[a]) * nn;
        for (std::size_t b = a + 1; b < m; ++b) {
            const std::int32_t* rb = sym + static_cast<std::size_t>(rows[b]) * nn;
            std::int64_t acc = 0;
            for (std::size_t k = 0; k < nn; ++k) {
                const std::int64_t diff = static_cast<std::int64_t>(ra[k]) - rb[k];
                acc += diff * diff;
            }
            const double v = std::sqrt(static_cast<double>(acc));
            d.at(a, b) = v;
            d.at(b, a) = v;
            max_d = std::max(max_d, v);
        }
    }
    return detail::rips_persistence(d, max_d);
}

inline double ring_stability_of_rows(const std::int32_t* sym, std::int32_t n,
                                     std::int32_t max_points = 600, std::uint64_t rng_seed = 0) {
    return ring_stability(rips_of_rows(sym, n, max_points, rng_seed));
}

/// Delta in units of the map's placeholder value. Raw lifetimes scale with
/// the activation-time ceiling (2s truncated, 2n full), so dividing by it is
/// what makes stability comparable across truncation depths.
inline double ring_stability_of_map(const ContagionMap& cm, std::int32_t max_points = 600,
                                    std::uint64_t rng_seed = 0) {
    return ring_stability_of_rows(cm.sym_data().data(), cm.node_count(), max_points, rng_seed) /
           static_cast<double>(cm.placeholder());
}

}  // namespace conmap
