#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "conmap/contagion.hpp"
#include "conmap/error.hpp"
#include "conmap/matrix.hpp"
#include "conmap/rng.hpp"

namespace conmap {

struct Projection {
    Matrix points;                  // n x k, column means zero
    std::vector<double> explained;  // leading covariance eigenvalues, descending
};

/// Symmetric contagion-map entries as a dense real matrix, for projection
/// and scoring.
inline Matrix to_matrix(const ContagionMap& cm) {
    const auto n = static_cast<std::size_t>(cm.node_count());
    Matrix m(n, n);
    const auto& sym = cm.sym_data();
    for (std::size_t i = 0; i < sym.size(); ++i) m.data[i] = static_cast<double>(sym[i]);
    return m;
}

namespace detail {

/// One power-iteration eigenpair of the covariance, restricted to the
/// orthogonal complement of the already-found components.
inline double power_component(const Matrix& cov, const std::vector<std::vector<double>>& found,
                              std::size_t index, std::vector<double>& out) {
    const std::size_t m = cov.rows;
    constexpr int kMaxIterations = 20000;
    // converge on eigenvector movement, not eigenvalue stall: the eigenvalue
    // settles while the vector still carries sqrt(tol)-sized mixtures
    constexpr double kMoveTol = 1e-12;

    std::vector<double> v(m);
    rng::Engine eng(rng::derive_seed(0x70c4'11e5'd00d'feedULL, index));
    for (auto& x : v) x = rng::uniform01(eng) - 0.5;

    auto orthogonalize = [&](std::vector<double>& w) {
        for (const auto& u : found) {
            double dot = 0.0;
            for (std::size_t i = 0; i < m; ++i) dot += w[i] * u[i];
            for (std::size_t i = 0; i < m; ++i) w[i] -= dot * u[i];
        }
    };
    auto norm = [&](const std::vector<double>& w) {
        double s = 0.0;
        for (const double x : w) s += x * x;
        return std::sqrt(s);
    };

    orthogonalize(v);
    double nrm = norm(v);
    if (nrm == 0.0) throw ConvergenceError("pca_project: degenerate start vector");
    for (auto& x : v) x /= nrm;

    std::vector<double> w(m);
    for (int it = 0; it < kMaxIterations; ++it) {
        for (std::size_t r = 0; r < m; ++r) {
            const double* row = cov.row(r);
            double acc = 0.0;
            for (std::size_t c = 0; c < m; ++c) acc += row[c] * v[c];
            w[r] = acc;
        }
        orthogonalize(w);
        double lambda = 0.0;
        for (std::size_t i = 0; i < m; ++i) lambda += v[i] * w[i];
        nrm = norm(w);
        if (nrm <= 1e-300) {
            // Remaining spectrum is numerically zero; keep the current
            // direction as an arbitrary unit vector of the complement.
            out = v;
            return 0.0;
        }
        double moved = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double next = w[i] / nrm;
            moved = std::max(moved, std::abs(next - v[i]));
            v[i] = next;
        }
        if (it > 0 && moved <= kMoveTol) {
            orthogonalize(v);
            const double vn = norm(v);
            if (vn > 0.0)
                for (auto& x : v) x /= vn;
            out = v;
            return std::max(0.0, lambda);
        }
    }
    throw ConvergenceError("pca_project: power iteration hit the iteration cap");
}

}  // namespace detail

/// PCA projection onto the top k principal components of the sample
/// covariance. Deterministic: fixed seeded start vectors, fixed tolerance,
/// and a sign convention making each component's largest-magnitude entry
/// positive (ties toward the lower index).
inline Projection pca_project(const Matrix& input, std::size_t k) {
    if (input.rows < 2) throw std::invalid_argument("pca_project: need at least two rows");
    if (k < 1 || k > std::min(input.rows, input.cols))
        throw std::invalid_argument("pca_project: k must satisfy 1 <= k <= min(rows, cols)");
    if (!input.all_finite()) throw std::invalid_argument("pca_project: input must be finite");

    const std::size_t n = input.rows;
    const std::size_t m = input.cols;
    Matrix centered(n, m);
    for (std::size_t c = 0; c < m; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += input.at(r, c);
        mean /= static_cast<double>(n);
        for (std::size_t r = 0; r < n; ++r) centered.at(r, c) = input.at(r, c) - mean;
    }

    Matrix cov(m, m);
    for (std::size_t r = 0; r < n; ++r) {
        const double* row = centered.row(r);
        for (std::size_t a = 0; a < m; ++a) {
            const double ra = row[a];
            if (ra == 0.0) continue;
            double* out = cov.row(a);
            for (std::size_t b = a; b < m; ++b) out[b] += ra * row[b];
        }
    }
    const double scale = 1.0 / static_cast<double>(n - 1);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b) {
            cov.at(a, b) *= scale;
            cov.at(b, a) = cov.at(a, b);
        }

    std::vector<std::vector<double>> components;
    std::vector<double> eigenvalues;
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<double> u;
        eigenvalues.push_back(detail::power_component(cov, components, c, u));
        components.push_back(std::move(u));
    }

    // Near-degenerate pairs can converge out of order; enforce descending.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return eigenvalues[a] > eigenvalues[b]; });

    Projection proj;
    proj.points = Matrix(n, k);
    proj.explained.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        auto& u = components[order[c]];
        std::size_t arg = 0;
        for (std::size_t i = 1; i < m; ++i)
            if (std::abs(u[i]) > std::abs(u[arg])) arg = i;
        if (u[arg] < 0.0)
            for (auto& x : u) x = -x;
        proj.explained[c] = eigenvalues[order[c]];
        for (std::size_t r = 0; r < n; ++r) {
            const double* row = centered.row(r);
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) acc += row[i] * u[i];
            proj.points.at(r, c) = acc;
        }
    }
    return proj;
}

/// Ratio of the median distance between rows with different labels to the
/// median distance between rows sharing a label. Requires at least two
/// distinct labels, each with at least two members.
inline double cell_group_separation(const Matrix& rows, const std::vector<std::string>& labels) {
    const std::size_t n = rows.rows;
    if (labels.size() != n)
        throw std::invalid_argument("cell_group_separation: one label per row required");
    if (!rows.all_finite()) throw std::invalid_argument("cell_group_separation: rows must be finite");

    std::vector<std::string> classes(labels);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    if (classes.size() < 2)
        throw std::invalid_argument("cell_group_separation: need at least two distinct labels");
    for (const auto& cls : classes)
        if (std::count(labels.begin(), labels.end(), cls) < 2)
            throw std::invalid_argument("cell_group_separation: every label class needs at least two members");

    std::vector<double> intra;
    std::vector<double> inter;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = euclidean_distance(rows.row(i), rows.row(j), rows.cols);
            (labels[i] == labels[j] ? intra : inter).push_back(d);
        }
    const double intra_median = median_of(intra);
    const double inter_median = median_of(inter);
    if (intra_median == 0.0)
        throw std::domain_error("cell_group_separation: intra-class median distance is zero");
    return inter_median / intra_median;
}

/// Suggested truncation budget: n/10, rounded, with a floor of one sweep.
inline std::int32_t heuristic_truncation(std::int32_t n) {
    if (n < 1) throw std::invalid_argument("heuristic_truncation: n must be positive");
    return std::max<std::int32_t>(1, static_cast<std::int32_t>(std::llround(n / 10.0)));
}

}  // namespace conmap
