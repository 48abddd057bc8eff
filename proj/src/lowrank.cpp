#include "carsel/lowrank.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

#include "carsel/errors.hpp"
#include "carsel/kernels.hpp"

static_assert(std::endian::native == std::endian::little,
              "LRC1 cache assumes a little-endian host");

namespace carsel {

namespace {

constexpr char kMagic[4] = {'L', 'R', 'C', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_f64(std::ostream& out, const double* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw DataError("truncated low-rank cache");
  return v;
}

void read_f64(std::istream& in, double* data, std::size_t count) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw DataError("truncated low-rank cache");
}

}  // namespace

ShrinkageEstimate fixed_lambda(double value) {
  if (!(value > 0.0) || value > kLambdaMax) {
    throw DataError("shrinkage intensity must be in (0, 1], got " +
                    std::to_string(value));
  }
  ShrinkageEstimate est;
  est.lambda = std::max(value, kLambdaMin);
  est.source = ShrinkageEstimate::Source::Fixed;
  return est;
}

ShrinkageEstimate estimate_lambda_analytic(const GenotypeMatrix& X) {
  if (X.n() < 3) throw DataError("analytic shrinkage needs at least 3 samples");
  if (X.d() < 2) throw DataError("analytic shrinkage needs at least 2 markers");
  const kernels::PairSums sums = kernels::correlation_pair_sums_omp(X.X);
  ShrinkageEstimate est;
  est.source = ShrinkageEstimate::Source::Analytic;
  est.lambda = sums.sum_sq > 0.0
                   ? std::clamp(sums.sum_var / sums.sum_sq, kLambdaMin, kLambdaMax)
                   : kLambdaMax;
  return est;
}

LowRankCorrelation LowRankCorrelation::build(const Eigen::MatrixXd& Xstd,
                                             double lambda, int ddof) {
  if (!(lambda >= kLambdaMin) || lambda > kLambdaMax) {
    throw DataError("shrinkage intensity out of range in low-rank build");
  }
  const Eigen::Index n = Xstd.rows(), d = Xstd.cols();
  if (n < ddof + 1) throw DataError("too few samples for correlation estimate");
  const double denom = static_cast<double>(n - ddof);

  LowRankCorrelation fac;
  fac.lambda_ = lambda;
  fac.d_ = d;
  if (lambda >= kLambdaMax) {  // pure shrinkage target, R = I_d
    fac.basis_.resize(d, 0);
    fac.diag_.resize(0);
    return fac;
  }

  Eigen::VectorXd eigenvalues;  // of R_empirical, descending after filter
  Eigen::MatrixXd eigenvectors; // d x m
  if (n <= d) {
    // Gram route: eigenvectors w of X X^T / denom map to eigenvectors
    // X^T w / sqrt(denom * s) of X^T X / denom with the same eigenvalues.
    const Eigen::MatrixXd gram = kernels::gram_omp(Xstd, denom);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) {
      throw NumericError("Gram eigendecomposition failed");
    }
    const Eigen::VectorXd& s = eig.eigenvalues();  // ascending
    const double smax = std::max(s[n - 1], 0.0);
    const double tol = static_cast<double>(std::max(n, d)) *
                       std::numeric_limits<double>::epsilon() * smax;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      if (s[i] > tol) kept.push_back(i);
    }
    const Eigen::Index m = static_cast<Eigen::Index>(kept.size());
    eigenvalues.resize(m);
    Eigen::MatrixXd w(n, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      eigenvalues[k] = s[kept[static_cast<std::size_t>(k)]];
      w.col(k) = eig.eigenvectors().col(kept[static_cast<std::size_t>(k)]);
    }
    eigenvectors = kernels::xtw_omp(Xstd, w);
    for (Eigen::Index k = 0; k < m; ++k) {
      eigenvectors.col(k) /= std::sqrt(denom * eigenvalues[k]);
    }
  } else {
    // d < n: the d x d correlation matrix is the small side.
    const Eigen::MatrixXd corr =
        kernels::gram_omp(Eigen::MatrixXd(Xstd.transpose()), denom);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
    if (eig.info() != Eigen::Success) {
      throw NumericError("correlation eigendecomposition failed");
    }
    const Eigen::VectorXd& s = eig.eigenvalues();
    const double smax = std::max(s[d - 1], 0.0);
    const double tol = static_cast<double>(std::max(n, d)) *
                       std::numeric_limits<double>::epsilon() * smax;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = d - 1; i >= 0; --i) {
      if (s[i] > tol) kept.push_back(i);
    }
    const Eigen::Index m = static_cast<Eigen::Index>(kept.size());
    eigenvalues.resize(m);
    eigenvectors.resize(d, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      eigenvalues[k] = s[kept[static_cast<std::size_t>(k)]];
      eigenvectors.col(k) = eig.eigenvectors().col(kept[static_cast<std::size_t>(k)]);
    }
  }

  fac.basis_ = std::move(eigenvectors);
  fac.diag_ = (1.0 - lambda) / lambda * eigenvalues;
  return fac;
}

Eigen::VectorXd LowRankCorrelation::power_apply(double alpha,
                                                const Eigen::VectorXd& v) const {
  if (v.size() != d_) throw DataError("vector length does not match factor dim");
  const double scale = std::pow(lambda_, alpha);
  if (rank() == 0) return scale * v;
  Eigen::VectorXd coef(rank());
  for (Eigen::Index k = 0; k < rank(); ++k) {
    coef[k] = 1.0 - std::pow(1.0 + diag_[k], alpha);
  }
  return kernels::lowrank_apply_omp(basis_, coef, v, scale);
}

Eigen::VectorXd LowRankCorrelation::adjusted_scores(
    const Eigen::VectorXd& r_xy) const {
  if (!(lambda_ > 0.0)) throw NumericError("non-positive shrinkage intensity");
  if (r_xy.size() != d_) throw DataError("score length does not match factor dim");
  if (!r_xy.allFinite()) throw NumericError("non-finite marginal correlations");
  const double scale = 1.0 / std::sqrt(lambda_);
  if (rank() == 0) return scale * r_xy;
  Eigen::VectorXd coef(rank());
  for (Eigen::Index k = 0; k < rank(); ++k) {
    coef[k] = 1.0 - 1.0 / std::sqrt(1.0 + diag_[k]);
  }
  return kernels::lowrank_apply_omp(basis_, coef, r_xy, scale);
}

Eigen::MatrixXd LowRankCorrelation::dense() const {
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(d_, d_);
  if (rank() > 0) r += basis_ * diag_.asDiagonal() * basis_.transpose();
  return lambda_ * r;
}

void LowRankCorrelation::save(std::ostream& out) const {
  out.write(kMagic, sizeof kMagic);
  write_u64(out, static_cast<std::uint64_t>(d_));
  write_u64(out, static_cast<std::uint64_t>(rank()));
  const double lam = lambda_;
  write_f64(out, &lam, 1);
  write_f64(out, diag_.data(), static_cast<std::size_t>(diag_.size()));
  write_f64(out, basis_.data(), static_cast<std::size_t>(basis_.size()));
  if (!out) throw DataError("failed to write low-rank cache");
}

void LowRankCorrelation::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  save(out);
}

LowRankCorrelation LowRankCorrelation::load(std::istream& in) {
  char magic[4] = {};
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw DataError("not a low-rank cache (bad magic)");
  }
  const std::uint64_t d = read_u64(in);
  const std::uint64_t m = read_u64(in);
  if (m > d || d > (1ULL << 32)) throw DataError("corrupt low-rank cache header");
  LowRankCorrelation fac;
  read_f64(in, &fac.lambda_, 1);
  if (!(fac.lambda_ >= kLambdaMin) || fac.lambda_ > kLambdaMax) {
    throw DataError("corrupt low-rank cache: bad lambda");
  }
  fac.d_ = static_cast<Eigen::Index>(d);
  fac.diag_.resize(static_cast<Eigen::Index>(m));
  read_f64(in, fac.diag_.data(), m);
  if ((fac.diag_.array() <= 0.0).any()) {
    throw DataError("corrupt low-rank cache: non-positive factor diagonal");
  }
  fac.basis_.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m));
  read_f64(in, fac.basis_.data(), d * m);
  return fac;
}

LowRankCorrelation LowRankCorrelation::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return load(in);
}

}  // namespace carsel
