#pragma once

#include "sleepsynth/matrix.hpp"

namespace sleepsynth::kernels {

// Matrix products used by the dense-network forward and backward passes.
//
// Every kernel exists twice: a plain serial form under kernels::serial
// (the reference the tests compare against) and an OpenMP form under
// kernels::openmp that splits the output rows across threads. Both walk
// the reduction axis in ascending order for each output element, so the
// two variants produce bit-identical results for any thread count. The
// unprefixed entry points dispatch on problem size.

namespace serial {
/// c[m x n] = a[m x k] * b[k x n]
Matrix matmul(const Matrix& a, const Matrix& b);
/// c[m x n] = a^T * b with a stored [k x m], b [k x n]
Matrix matmul_ta(const Matrix& a, const Matrix& b);
/// c[m x n] = a * b^T with a stored [m x k], b [n x k]
Matrix matmul_tb(const Matrix& a, const Matrix& b);
}  // namespace serial

namespace openmp {
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_ta(const Matrix& a, const Matrix& b);
Matrix matmul_tb(const Matrix& a, const Matrix& b);
}  // namespace openmp

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_ta(const Matrix& a, const Matrix& b);
Matrix matmul_tb(const Matrix& a, const Matrix& b);

}  // namespace sleepsynth::kernels
