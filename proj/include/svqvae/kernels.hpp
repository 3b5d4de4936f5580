#pragma once

#include "svqvae/matrix.hpp"

namespace svqvae::kernels {

// Hot matrix products, parallelized over output rows with OpenMP when the
// build enables it. Each output element accumulates in a fixed serial order,
// so results are bit-identical to the serial reference for any thread count.

// a (m x k) * b (k x n) -> m x n
Matrix matmul(const Matrix& a, const Matrix& b);

// a^T * b where a is (k x m), b is (k x n) -> m x n
Matrix matmul_at_b(const Matrix& a, const Matrix& b);

// a * b^T where a is (m x k), b is (n x k) -> m x n
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

namespace serial {

// Reference implementations with identical loop order, kept for the kernel
// tests and the benchmark target.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

}  // namespace serial

}  // namespace svqvae::kernels
