#pragma once

#include <Eigen/Dense>

namespace carsel {

// Global worker count used by the OpenMP kernels. 0 = library default
// (CARSEL_THREADS env var if set, otherwise the OpenMP maximum).
void set_thread_count(int threads);
int thread_count();

namespace kernels {

// Each kernel comes in two variants. The *_serial form is the plain-loop
// reference used by the tests and the benchmark; the *_omp form partitions
// output columns (or column blocks) across threads so every output element
// is produced by exactly one thread with a fixed accumulation order. The
// omp results are therefore bit-identical for any thread count, and the
// product code always routes through them.

struct ColumnStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;  // sample sd, n-1 denominator
};

ColumnStats column_stats_serial(const Eigen::MatrixXd& X);
ColumnStats column_stats_omp(const Eigen::MatrixXd& X);

void standardize_columns_serial(Eigen::MatrixXd& X, const ColumnStats& stats);
void standardize_columns_omp(Eigen::MatrixXd& X, const ColumnStats& stats);

// t(X) * y / denom
Eigen::VectorXd crossprod_serial(const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& y, double denom);
Eigen::VectorXd crossprod_omp(const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y, double denom);

// A * t(A) / denom (the small Gram matrix of a short-and-wide A)
Eigen::MatrixXd gram_serial(const Eigen::MatrixXd& A, double denom);
Eigen::MatrixXd gram_omp(const Eigen::MatrixXd& A, double denom);

// t(X) * W
Eigen::MatrixXd xtw_serial(const Eigen::MatrixXd& X, const Eigen::MatrixXd& W);
Eigen::MatrixXd xtw_omp(const Eigen::MatrixXd& X, const Eigen::MatrixXd& W);

// out = scale * (v - U * (coef ∘ (t(U) * v))); the low-rank correction step
Eigen::VectorXd lowrank_apply_serial(const Eigen::MatrixXd& U,
                                     const Eigen::VectorXd& coef,
                                     const Eigen::VectorXd& v, double scale);
Eigen::VectorXd lowrank_apply_omp(const Eigen::MatrixXd& U,
                                  const Eigen::VectorXd& coef,
                                  const Eigen::VectorXd& v, double scale);

// Off-diagonal sums over the empirical correlation matrix of standardized X:
//   sum_sq  = sum_{i<j} r_ij^2
//   sum_var = sum_{i<j} (1 - r_ij^2)^2 / (n - 1)
// Computed in d x block strips; no d x d buffer is formed.
struct PairSums {
  double sum_sq = 0.0;
  double sum_var = 0.0;
};

PairSums correlation_pair_sums_serial(const Eigen::MatrixXd& Xstd);
PairSums correlation_pair_sums_omp(const Eigen::MatrixXd& Xstd);

}  // namespace kernels
}  // namespace carsel
