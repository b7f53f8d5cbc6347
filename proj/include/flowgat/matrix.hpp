#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "flowgat/errors.hpp"

namespace flowgat {

// Dense row-major matrix of f64. Rows are flow instances, columns features.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

    bool empty() const { return rows == 0 || cols == 0; }
};

// Copies the given rows (in order) into a new matrix.
template <typename IdxContainer>
FeatureMatrix gather_rows(const FeatureMatrix& m, const IdxContainer& ids) {
    FeatureMatrix out(ids.size(), m.cols);
    std::size_t r = 0;
    for (const auto id : ids) {
        if (static_cast<std::size_t>(id) >= m.rows) {
            throw ConfigError("gather_rows: row index out of range");
        }
        const auto src = m.row(static_cast<std::size_t>(id));
        std::copy(src.begin(), src.end(), out.row(r).begin());
        ++r;
    }
    return out;
}

}  // namespace flowgat
