#include "kdlab/matrix.hpp"

#include <cmath>

#include "kdlab/errors.hpp"

namespace kdlab {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw ShapeError("matmul: inner dimensions differ");
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) throw ShapeError("matmul_at_b: row counts differ");
    Matrix c(a.cols, b.cols);
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double* arow = a.row(k);
        const double* brow = b.row(k);
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double aki = arow[i];
            double* crow = c.row(i);
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
        }
    }
    return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) throw ShapeError("matmul_a_bt: column counts differ");
    Matrix c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* brow = b.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
            c(i, j) = s;
        }
    }
    return c;
}

bool all_finite(const Matrix& m) {
    for (double v : m.data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace kdlab
