#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace conmap {

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // rows * cols, row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }
    double* row(std::size_t r) { return data.data() + r * cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline double euclidean_distance(const double* a, const double* b, std::size_t dim) {
    double sum = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        sum += d * d;
    }
    return std::sqrt(sum);
}

/// Median, with the even-size convention of averaging the two central
/// values. Sorts the pool in place.
inline double median_of(std::vector<double>& pool) {
    if (pool.empty()) throw std::invalid_argument("median_of: empty pool");
    std::sort(pool.begin(), pool.end());
    const std::size_t h = pool.size() / 2;
    return pool.size() % 2 == 1 ? pool[h] : 0.5 * (pool[h - 1] + pool[h]);
}

}  // namespace conmap
