#pragma once

#include <cstddef>
#include <vector>

namespace kdlab {

// Row-major dense matrix of doubles. Used for input batches, logit batches
// and weight blocks.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& m);

}  // namespace kdlab
