#include "svqvae/kernels.hpp"

#include <stdexcept>

namespace svqvae::kernels {

namespace {

void check_matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw std::invalid_argument("matmul: inner dimensions differ: lhs is " + shape_str(a) +
                                    ", rhs is " + shape_str(b));
    }
}

void check_at_b(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) {
        throw std::invalid_argument("matmul_at_b: row counts differ: lhs is " + shape_str(a) +
                                    ", rhs is " + shape_str(b));
    }
}

void check_a_bt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) {
        throw std::invalid_argument("matmul_a_bt: column counts differ: lhs is " + shape_str(a) +
                                    ", rhs is " + shape_str(b));
    }
}

// i-k-j order: row-major friendly, and every c(i,j) accumulates over k in a
// fixed order, so the parallel version reproduces these bits exactly.
void matmul_rows(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
    const double* arow = a.row_ptr(i);
    double* crow = c.row_ptr(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
        const double aik = arow[k];
        const double* brow = b.row_ptr(k);
        for (std::size_t j = 0; j < b.cols; ++j) {
            crow[j] += aik * brow[j];
        }
    }
}

void at_b_rows(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
    double* crow = c.row_ptr(i);
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double aki = a(k, i);
        const double* brow = b.row_ptr(k);
        for (std::size_t j = 0; j < b.cols; ++j) {
            crow[j] += aki * brow[j];
        }
    }
}

void a_bt_rows(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
    const double* arow = a.row_ptr(i);
    double* crow = c.row_ptr(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
        const double* brow = b.row_ptr(j);
        double acc = 0.0;
        for (std::size_t k = 0; k < a.cols; ++k) {
            acc += arow[k] * brow[k];
        }
        crow[j] = acc;
    }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_matmul(a, b);
    Matrix c(a.rows, b.cols);
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        matmul_rows(a, b, c, static_cast<std::size_t>(i));
    }
    return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    check_at_b(a, b);
    Matrix c(a.cols, b.cols);
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(a.cols);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        at_b_rows(a, b, c, static_cast<std::size_t>(i));
    }
    return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    check_a_bt(a, b);
    Matrix c(a.rows, b.rows);
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        a_bt_rows(a, b, c, static_cast<std::size_t>(i));
    }
    return c;
}

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_matmul(a, b);
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) matmul_rows(a, b, c, i);
    return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    check_at_b(a, b);
    Matrix c(a.cols, b.cols);
    for (std::size_t i = 0; i < a.cols; ++i) at_b_rows(a, b, c, i);
    return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    check_a_bt(a, b);
    Matrix c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) a_bt_rows(a, b, c, i);
    return c;
}

}  // namespace serial

}  // namespace svqvae::kernels
