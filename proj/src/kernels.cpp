#include "sleepsynth/kernels.hpp"

namespace sleepsynth::kernels {

namespace {

void check_nn(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows)
    throw Error(errc::shape_mismatch,
                "matmul: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) + " * " +
                    std::to_string(b.rows) + "x" + std::to_string(b.cols));
}

void check_ta(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows)
    throw Error(errc::shape_mismatch,
                "matmul_ta: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) + "^T * " +
                    std::to_string(b.rows) + "x" + std::to_string(b.cols));
}

void check_tb(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols)
    throw Error(errc::shape_mismatch,
                "matmul_tb: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) + " * " +
                    std::to_string(b.rows) + "x" + std::to_string(b.cols) + "^T");
}

// Row i of the product a*b: c[i,:] += a[i,k] * b[k,:], k ascending.
inline void matmul_row(const Matrix& a, const Matrix& b, Matrix& c, int i) {
  const int k_dim = a.cols;
  const int n = b.cols;
  double* ci = c.row(i);
  const double* ai = a.row(i);
  for (int k = 0; k < k_dim; ++k) {
    const double aik = ai[k];
    const double* bk = b.row(k);
    for (int j = 0; j < n; ++j) ci[j] += aik * bk[j];
  }
}

// Row i of a^T*b: c[i,:] += a[r,i] * b[r,:], r ascending.
inline void matmul_ta_row(const Matrix& a, const Matrix& b, Matrix& c, int i) {
  const int k_dim = a.rows;
  const int n = b.cols;
  double* ci = c.row(i);
  for (int r = 0; r < k_dim; ++r) {
    const double ari = a(r, i);
    const double* br = b.row(r);
    for (int j = 0; j < n; ++j) ci[j] += ari * br[j];
  }
}

// Row i of a*b^T: c[i,j] = dot(a[i,:], b[j,:]).
inline void matmul_tb_row(const Matrix& a, const Matrix& b, Matrix& c, int i) {
  const int k_dim = a.cols;
  const int n = b.rows;
  double* ci = c.row(i);
  const double* ai = a.row(i);
  for (int j = 0; j < n; ++j) {
    const double* bj = b.row(j);
    double acc = 0.0;
    for (int l = 0; l < k_dim; ++l) acc += ai[l] * bj[l];
    ci[j] = acc;
  }
}

// Below this many multiply-adds the parallel region costs more than it saves.
constexpr long long kParallelThreshold = 1 << 15;

inline long long work_nn(const Matrix& a, const Matrix& b) {
  return static_cast<long long>(a.rows) * a.cols * b.cols;
}

}  // namespace

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_nn(a, b);
  Matrix c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) matmul_row(a, b, c, i);
  return c;
}

Matrix matmul_ta(const Matrix& a, const Matrix& b) {
  check_ta(a, b);
  Matrix c(a.cols, b.cols);
  for (int i = 0; i < a.cols; ++i) matmul_ta_row(a, b, c, i);
  return c;
}

Matrix matmul_tb(const Matrix& a, const Matrix& b) {
  check_tb(a, b);
  Matrix c(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i) matmul_tb_row(a, b, c, i);
  return c;
}

}  // namespace serial

namespace openmp {

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_nn(a, b);
  Matrix c(a.rows, b.cols);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows; ++i) matmul_row(a, b, c, i);
  return c;
}

Matrix matmul_ta(const Matrix& a, const Matrix& b) {
  check_ta(a, b);
  Matrix c(a.cols, b.cols);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.cols; ++i) matmul_ta_row(a, b, c, i);
  return c;
}

Matrix matmul_tb(const Matrix& a, const Matrix& b) {
  check_tb(a, b);
  Matrix c(a.rows, b.rows);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows; ++i) matmul_tb_row(a, b, c, i);
  return c;
}

}  // namespace openmp

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_nn(a, b);
  return work_nn(a, b) >= kParallelThreshold ? openmp::matmul(a, b) : serial::matmul(a, b);
}

Matrix matmul_ta(const Matrix& a, const Matrix& b) {
  check_ta(a, b);
  const long long work = static_cast<long long>(a.rows) * a.cols * b.cols;
  return work >= kParallelThreshold ? openmp::matmul_ta(a, b) : serial::matmul_ta(a, b);
}

Matrix matmul_tb(const Matrix& a, const Matrix& b) {
  check_tb(a, b);
  const long long work = static_cast<long long>(a.rows) * a.cols * b.rows;
  return work >= kParallelThreshold ? openmp::matmul_tb(a, b) : serial::matmul_tb(a, b);
}

}  // namespace sleepsynth::kernels
