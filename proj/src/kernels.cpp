#include "carsel/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace carsel {

namespace {

int g_threads = 0;

int default_threads() {
  if (const char* env = std::getenv("CARSEL_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace

void set_thread_count(int threads) { g_threads = threads > 0 ? threads : 0; }

int thread_count() { return g_threads > 0 ? g_threads : default_threads(); }

namespace kernels {

namespace {

// Strip width for the pairwise correlation sums; keeps the working set at
// d x kStrip doubles.
constexpr Eigen::Index kStrip = 128;

}  // namespace

ColumnStats column_stats_serial(const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows(), d = X.cols();
  ColumnStats stats;
  stats.mean.resize(d);
  stats.sd.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) sum += X(i, j);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = X(i, j) - mean;
      ss += c * c;
    }
    stats.mean[j] = mean;
    stats.sd[j] = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return stats;
}

ColumnStats column_stats_omp(const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows(), d = X.cols();
  ColumnStats stats;
  stats.mean.resize(d);
  stats.sd.resize(d);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Eigen::Index j = 0; j < d; ++j) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) sum += X(i, j);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = X(i, j) - mean;
      ss += c * c;
    }
    stats.mean[j] = mean;
    stats.sd[j] = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return stats;
}

void standardize_columns_serial(Eigen::MatrixXd& X, const ColumnStats& stats) {
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    X.col(j) = (X.col(j).array() - stats.mean[j]) / stats.sd[j];
  }
}

void standardize_columns_omp(Eigen::MatrixXd& X, const ColumnStats& stats) {
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    X.col(j) = (X.col(j).array() - stats.mean[j]) / stats.sd[j];
  }
}

Eigen::VectorXd crossprod_serial(const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& y, double denom) {
  const Eigen::Index n = X.rows(), d = X.cols();
  Eigen::VectorXd out(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) acc += X(i, j) * y[i];
    out[j] = acc / denom;
  }
  return out;
}

Eigen::VectorXd crossprod_omp(const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y, double denom) {
  const Eigen::Index d = X.cols();
  Eigen::VectorXd out(d);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Eigen::Index j = 0; j < d; ++j) {
    out[j] = X.col(j).dot(y) / denom;
  }
  return out;
}

Eigen::MatrixXd gram_serial(const Eigen::MatrixXd& A, double denom) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < A.cols(); ++k) acc += A(i, k) * A(j, k);
      G(i, j) = acc / denom;
    }
  }
  return G;
}

Eigen::MatrixXd gram_omp(const Eigen::MatrixXd& A, double denom) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd G(n, n);
  // One output column block per task; Eigen's serial GEMM inside.
  const Eigen::Index block = 32;
  const Eigen::Index nblocks = (n + block - 1) / block;
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Eigen::Index b = 0; b < nblocks; ++b) {
    const Eigen::Index j0 = b * block;
    const Eigen::Index w = std::min(block, n - j0);
    G.middleCols(j0, w).noalias() = A * A.middleRows(j0, w).transpose() / denom;
  }
  return G;
}

Eigen::MatrixXd xtw_serial(const Eigen::MatrixXd& X, const Eigen::MatrixXd& W) {
  const Eigen::Index d = X.cols(), m = W.cols(), n = X.rows();
  Eigen::MatrixXd out(d, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    for (Eigen::Index j = 0; j < d; ++j) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) acc += X(i, j) * W(i, c);
      out(j, c) = acc;
    }
  }
  return out;
}

Eigen::MatrixXd xtw_omp(const Eigen::MatrixXd& X, const Eigen::MatrixXd& W) {
  const Eigen::Index m = W.cols();
  Eigen::MatrixXd out(X.cols(), m);
  const Eigen::Index block = 16;
  const Eigen::Index nblocks = (m + block - 1) / block;
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Eigen::Index b = 0; b < nblocks; ++b) {
    const Eigen::Index c0 = b * block;
    const Eigen::Index w = std::min(block, m - c0);
    out.middleCols(c0, w).noalias() = X.transpose() * W.middleCols(c0, w);
  }
  return out;
}

Eigen::VectorXd lowrank_apply_serial(const Eigen::MatrixXd& U,
                                     const Eigen::VectorXd& coef,
                                     const Eigen::VectorXd& v, double scale) {
  const Eigen::Index d = v.size(), m = U.cols();
  Eigen::VectorXd w(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) acc += U(j, k) * v[j];
    w[k] = acc * coef[k];
  }
  Eigen::VectorXd out(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double corr = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) corr += U(j, k) * w[k];
    out[j] = scale * (v[j] - corr);
  }
  return out;
}

Eigen::VectorXd lowrank_apply_omp(const Eigen::MatrixXd& U,
                                  const Eigen::VectorXd& coef,
                                  const Eigen::VectorXd& v, double scale) {
  const Eigen::Index d = v.size(), m = U.cols();
  if (m == 0) return scale * v;
  Eigen::VectorXd w(m);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Eigen::Index k = 0; k < m; ++k) {
    w[k] = U.col(k).dot(v) * coef[k];
  }
  Eigen::VectorXd out(d);
  const Eigen::Index block = 512;
  const Eigen::Index nblocks = (d + block - 1) / block;
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Eigen::Index b = 0; b < nblocks; ++b) {
    const Eigen::Index j0 = b * block;
    const Eigen::Index h = std::min(block, d - j0);
    out.segment(j0, h).noalias() =
        scale * (v.segment(j0, h) - U.middleRows(j0, h) * w);
  }
  return out;
}

PairSums correlation_pair_sums_serial(const Eigen::MatrixXd& Xstd) {
  const Eigen::Index n = Xstd.rows(), d = Xstd.cols();
  const double denom = static_cast<double>(n - 1);
  PairSums sums;
  for (Eigen::Index j = 1; j < d; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) acc += Xstd(k, i) * Xstd(k, j);
      const double r = acc / denom;
      const double r2 = r * r;
      sums.sum_sq += r2;
      sums.sum_var += (1.0 - r2) * (1.0 - r2) / denom;
    }
  }
  return sums;
}

PairSums correlation_pair_sums_omp(const Eigen::MatrixXd& Xstd) {
  const Eigen::Index n = Xstd.rows(), d = Xstd.cols();
  const double denom = static_cast<double>(n - 1);
  const Eigen::Index nblocks = (d + kStrip - 1) / kStrip;
  std::vector<PairSums> partial(static_cast<std::size_t>(nblocks));
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (Eigen::Index b = 0; b < nblocks; ++b) {
    const Eigen::Index j0 = b * kStrip;
    const Eigen::Index w = std::min(kStrip, d - j0);
    // Strip of correlations r(0..j0+w, j0..j0+w); entries above the diagonal.
    Eigen::MatrixXd strip =
        Xstd.leftCols(j0 + w).transpose() * Xstd.middleCols(j0, w) / denom;
    PairSums local;
    for (Eigen::Index c = 0; c < w; ++c) {
      const Eigen::Index j = j0 + c;
      for (Eigen::Index i = 0; i < j; ++i) {
        const double r2 = strip(i, c) * strip(i, c);
        local.sum_sq += r2;
        local.sum_var += (1.0 - r2) * (1.0 - r2) / denom;
      }
    }
    partial[static_cast<std::size_t>(b)] = local;
  }
  PairSums sums;
  for (const PairSums& p : partial) {  // fixed combine order
    sums.sum_sq += p.sum_sq;
    sums.sum_var += p.sum_var;
  }
  return sums;
}

}  // namespace kernels
}  // namespace carsel
