// Timing harness comparing the serial reference kernels against the
// OpenMP variants used in production.
//
//   carsel_kernel_bench [n] [d] [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include <Eigen/Dense>

#include "carsel/kernels.hpp"
#include "carsel/rng.hpp"

namespace {

using carsel::kernels::ColumnStats;
using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto start = Clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto stop = Clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

void report(const char* name, double serial_ms, double omp_ms,
            double max_abs_diff) {
  std::printf("%-22s %10.2f ms %10.2f ms %8.2fx   max|diff| %.3g\n", name,
              serial_ms, omp_ms, serial_ms / omp_ms, max_abs_diff);
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 697;
  const int d = argc > 2 ? std::atoi(argv[2]) : 8020;
  const int reps = argc > 3 ? std::atoi(argv[3]) : 3;

  carsel::Rng rng(20240901);
  Eigen::MatrixXd X(n, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < n; ++i) X(i, j) = rng.normal();
  }
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.normal();

  std::printf("kernel benchmark: n=%d d=%d threads=%d reps=%d\n", n, d,
              carsel::thread_count(), reps);
  std::printf("%-22s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

  {
    ColumnStats s1, s2;
    const double t1 = time_ms([&] { s1 = carsel::kernels::column_stats_serial(X); }, reps);
    const double t2 = time_ms([&] { s2 = carsel::kernels::column_stats_omp(X); }, reps);
    report("column_stats", t1, t2, (s1.sd - s2.sd).cwiseAbs().maxCoeff());
  }
  {
    Eigen::VectorXd r1, r2;
    const double t1 = time_ms(
        [&] { r1 = carsel::kernels::crossprod_serial(X, y, n - 1.0); }, reps);
    const double t2 =
        time_ms([&] { r2 = carsel::kernels::crossprod_omp(X, y, n - 1.0); }, reps);
    report("crossprod", t1, t2, (r1 - r2).cwiseAbs().maxCoeff());
  }
  {
    Eigen::MatrixXd g1, g2;
    const double t1 =
        time_ms([&] { g1 = carsel::kernels::gram_serial(X, n - 1.0); }, 1);
    const double t2 =
        time_ms([&] { g2 = carsel::kernels::gram_omp(X, n - 1.0); }, reps);
    report("gram", t1, t2, (g1 - g2).cwiseAbs().maxCoeff());
  }
  {
    const int m = std::min(n, 64);
    const Eigen::MatrixXd W = X.leftCols(m);

    Eigen::MatrixXd u1, u2;
    const double t1 = time_ms([&] { u1 = carsel::kernels::xtw_serial(X, W); }, 1);
    const double t2 = time_ms([&] { u2 = carsel::kernels::xtw_omp(X, W); }, reps);
    report("xtw", t1, t2, (u1 - u2).cwiseAbs().maxCoeff());
  }
  {
    const int m = std::min(n - 1, 256);
    Eigen::MatrixXd U(d, m);
    Eigen::VectorXd coef(m), v(d);
    for (int k = 0; k < m; ++k) coef[k] = rng.uniform();
    for (int j = 0; j < d; ++j) v[j] = rng.normal();
    for (int k = 0; k < m; ++k) {
      for (int j = 0; j < d; ++j) U(j, k) = rng.normal();
    }
    Eigen::VectorXd a1, a2;
    const double t1 = time_ms(
        [&] { a1 = carsel::kernels::lowrank_apply_serial(U, coef, v, 2.0); }, reps);
    const double t2 = time_ms(
        [&] { a2 = carsel::kernels::lowrank_apply_omp(U, coef, v, 2.0); }, reps);
    report("lowrank_apply", t1, t2, (a1 - a2).cwiseAbs().maxCoeff());
  }
  {
    // Pairwise sums scale as d^2; trim the width to keep the serial side fast.
    const Eigen::MatrixXd Xs = X.leftCols(std::min(d, 1500));
    carsel::kernels::PairSums p1, p2;
    const double t1 = time_ms(
        [&] { p1 = carsel::kernels::correlation_pair_sums_serial(Xs); }, 1);
    const double t2 = time_ms(
        [&] { p2 = carsel::kernels::correlation_pair_sums_omp(Xs); }, reps);
    report("pair_sums", t1, t2, std::abs(p1.sum_sq - p2.sum_sq));
  }
  return 0;
}
