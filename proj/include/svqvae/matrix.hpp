#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace svqvae {

// Dense row-major matrix of 64-bit reals. Shape checks live in the
// operations, not here; finiteness is enforced where model inputs are
// constructed (dataset loaders, checkpoint loading, initialization).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    // for small literal matrices in tests and fixtures
    Matrix(std::initializer_list<std::initializer_list<double>> init);

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row_ptr(std::size_t r) { return data.data() + r * cols; }
    const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }

    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }

    static Matrix identity(std::size_t n);
};

std::string shape_str(const Matrix& m);

// exact element-wise equality, used by determinism tests
bool bitwise_equal(const Matrix& a, const Matrix& b);

// max |a - b| over all elements; throws on shape mismatch
double max_abs_diff(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& m);

}  // namespace svqvae
