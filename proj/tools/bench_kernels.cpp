// Times the serial reference kernels against their OpenMP twins and
// checks that both produce bit-identical output. Run with
// OMP_NUM_THREADS=<k> to vary the thread count.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "sleepsynth/kernels.hpp"
#include "sleepsynth/simulate.hpp"
#include "sleepsynth/temporalize.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace sleepsynth;
using Clock = std::chrono::steady_clock;

Matrix random_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
  return m;
}

double time_seconds(const std::function<Matrix()>& fn, Matrix& out, int reps) {
  out = fn();  // warm-up, also keeps the result for the equality check
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) {
    Matrix m = fn();
    if (m.data[0] == 0x1p60) std::puts("");  // keep the optimizer honest
  }
  const auto t1 = Clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

void bench_matmul_family(const char* name, Matrix (*serial_fn)(const Matrix&, const Matrix&),
                         Matrix (*openmp_fn)(const Matrix&, const Matrix&), const Matrix& a,
                         const Matrix& b, double flops, int reps) {
  Matrix serial_out, openmp_out;
  const double ts = time_seconds([&] { return serial_fn(a, b); }, serial_out, reps);
  const double tp = time_seconds([&] { return openmp_fn(a, b); }, openmp_out, reps);
  const bool identical = serial_out == openmp_out;
  std::printf("%-10s %5dx%-5d %8.3f ms %8.3f ms  %5.2fx  %7.2f GF/s  %s\n", name, serial_out.rows,
              serial_out.cols, ts * 1e3, tp * 1e3, ts / tp, flops / tp * 1e-9,
              identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP\n\n");
#endif

  std::printf("%-10s %-11s %11s %11s %7s %13s\n", "kernel", "output", "serial", "openmp",
              "speedup", "openmp rate");

  Rng rng(42);
  struct Case {
    int m, k, n, reps;
  };
  // First row matches the training hot path (batch x width x width).
  const Case cases[] = {{64, 128, 128, 200}, {256, 256, 256, 20}, {512, 512, 512, 5}};
  for (const Case& c : cases) {
    const Matrix a = random_matrix(c.m, c.k, rng);
    const Matrix b = random_matrix(c.k, c.n, rng);
    const Matrix at = random_matrix(c.k, c.m, rng);
    const Matrix bt = random_matrix(c.n, c.k, rng);
    const double flops = 2.0 * c.m * c.k * c.n;
    bench_matmul_family("matmul", kernels::serial::matmul, kernels::openmp::matmul, a, b, flops,
                        c.reps);
    bench_matmul_family("matmul_ta", kernels::serial::matmul_ta, kernels::openmp::matmul_ta, at, b,
                        flops, c.reps);
    bench_matmul_family("matmul_tb", kernels::serial::matmul_tb, kernels::openmp::matmul_tb, a, bt,
                        flops, c.reps);
  }

  PopulationConfig config = default_population();
  config.n_persons = 20000;
  const auto persons = simulate_population(config);
  const auto t0 = Clock::now();
  const FeatureMatrix matrix = build_feature_matrix(persons);
  const auto t1 = Clock::now();
  std::printf("\nbinned %zu persons into %zu rows in %.1f ms\n", persons.size(),
              matrix.rows.size(), std::chrono::duration<double>(t1 - t0).count() * 1e3);
  return 0;
}
