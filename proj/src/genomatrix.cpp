#include "carsel/genomatrix.hpp"

#include <cmath>
#include <unordered_map>

#include "carsel/errors.hpp"
#include "carsel/kernels.hpp"

namespace carsel {

namespace {

constexpr double kSdTolerance = 1e-12;

std::uint64_t hash_column(const Eigen::Matrix<std::int8_t, Eigen::Dynamic,
                                              Eigen::Dynamic>& calls,
                          Eigen::Index j) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (Eigen::Index i = 0; i < calls.rows(); ++i) {
    h ^= static_cast<std::uint8_t>(calls(i, j));
    h *= 1099511628211ULL;
  }
  return h;
}

bool columns_equal(const Eigen::Matrix<std::int8_t, Eigen::Dynamic,
                                       Eigen::Dynamic>& calls,
                   Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index i = 0; i < calls.rows(); ++i) {
    if (calls(i, a) != calls(i, b)) return false;
  }
  return true;
}

}  // namespace

Eigen::MatrixXd encode_additive(const RawGenotypes& raw) {
  const Eigen::Index n = raw.n(), d = raw.d();
  Eigen::MatrixXd codes(n, d);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Eigen::Index j = 0; j < d; ++j) {
    double sum = 0.0;
    Eigen::Index observed = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::int8_t c = raw.calls(i, j);
      if (c != RawGenotypes::kMissing) {
        sum += static_cast<double>(c);
        ++observed;
      }
    }
    if (observed == 0) continue;  // reported below, outside the parallel loop
    const double fill = sum / static_cast<double>(observed);
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::int8_t c = raw.calls(i, j);
      codes(i, j) = (c == RawGenotypes::kMissing) ? fill
                                                  : static_cast<double>(c);
    }
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    if ((raw.calls.col(j).array() == RawGenotypes::kMissing).all()) {
      throw DataError("marker '" + raw.markers[static_cast<std::size_t>(j)].id +
                      "' has no observed calls");
    }
  }
  return codes;
}

FilterResult deduplicate_and_filter(const RawGenotypes& raw,
                                    bool drop_synonymous) {
  const Eigen::Index d = raw.d();
  FilterResult result;
  result.old_to_new.assign(static_cast<std::size_t>(d), -1);

  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(d));
  std::unordered_multimap<std::uint64_t, Eigen::Index> seen;
  seen.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    const std::uint64_t h = hash_column(raw.calls, j);
    bool duplicate = false;
    auto [lo, hi] = seen.equal_range(h);
    for (auto it = lo; it != hi; ++it) {
      if (columns_equal(raw.calls, it->second, j)) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) {
      ++result.duplicates_removed;
      continue;
    }
    seen.emplace(h, j);
    if (drop_synonymous && raw.markers[static_cast<std::size_t>(j)].synonymous) {
      ++result.synonymous_removed;
      continue;
    }
    keep.push_back(j);
  }

  result.kept.samples = raw.samples;
  result.kept.markers.reserve(keep.size());
  result.kept.calls.resize(raw.n(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t newj = 0; newj < keep.size(); ++newj) {
    const Eigen::Index oldj = keep[newj];
    result.kept.markers.push_back(raw.markers[static_cast<std::size_t>(oldj)]);
    result.kept.calls.col(static_cast<Eigen::Index>(newj)) = raw.calls.col(oldj);
    result.old_to_new[static_cast<std::size_t>(oldj)] = static_cast<int>(newj);
  }
  return result;
}

std::vector<double> minor_allele_frequencies(const Eigen::MatrixXd& codes) {
  const double two_n = 2.0 * static_cast<double>(codes.rows());
  std::vector<double> mafs(static_cast<std::size_t>(codes.cols()));
  for (Eigen::Index j = 0; j < codes.cols(); ++j) {
    const double p = codes.col(j).sum() / two_n;
    mafs[static_cast<std::size_t>(j)] = std::min(p, 1.0 - p);
  }
  return mafs;
}

GenotypeMatrix standardize_columns(const Eigen::MatrixXd& codes,
                                   std::vector<MarkerRecord> markers,
                                   std::vector<std::string> samples) {
  if (codes.rows() < 2) throw DataError("need at least 2 samples to standardize");
  if (!markers.empty() &&
      static_cast<Eigen::Index>(markers.size()) != codes.cols()) {
    throw DataError("marker metadata size does not match column count");
  }

  GenotypeMatrix out;
  out.X = codes;
  const kernels::ColumnStats stats = kernels::column_stats_omp(out.X);
  for (Eigen::Index j = 0; j < codes.cols(); ++j) {
    if (!(stats.sd[j] > kSdTolerance)) {
      const std::string id =
          markers.empty() ? "column " + std::to_string(j + 1)
                          : "marker '" + markers[static_cast<std::size_t>(j)].id + "'";
      throw NumericError("constant column: " + id + " has zero variance");
    }
  }
  kernels::standardize_columns_omp(out.X, stats);

  const std::vector<double> mafs = minor_allele_frequencies(codes);
  out.markers.resize(static_cast<std::size_t>(codes.cols()));
  for (Eigen::Index j = 0; j < codes.cols(); ++j) {
    MarkerMeta& meta = out.markers[static_cast<std::size_t>(j)];
    if (markers.empty()) {
      meta.id = "m" + std::to_string(j + 1);
    } else {
      meta.id = std::move(markers[static_cast<std::size_t>(j)].id);
      meta.gene = std::move(markers[static_cast<std::size_t>(j)].gene);
    }
    meta.maf = mafs[static_cast<std::size_t>(j)];
  }
  if (samples.empty()) {
    out.samples.reserve(static_cast<std::size_t>(codes.rows()));
    for (Eigen::Index i = 0; i < codes.rows(); ++i) {
      out.samples.push_back("s" + std::to_string(i + 1));
    }
  } else {
    out.samples = std::move(samples);
  }
  return out;
}

GenotypeMatrix standardize_columns(const Eigen::MatrixXd& codes) {
  return standardize_columns(codes, {}, {});
}

Eigen::VectorXd standardize_vector(const Eigen::VectorXd& y) {
  if (y.size() < 2) throw DataError("need at least 2 values to standardize");
  const double mean = y.mean();
  const double sd = std::sqrt((y.array() - mean).square().sum() /
                              static_cast<double>(y.size() - 1));
  if (!(sd > kSdTolerance)) throw NumericError("zero variance vector");
  return (y.array() - mean) / sd;
}

PhenotypeVector residualize_phenotype(const Eigen::VectorXd& y,
                                      const CovariateMatrix& covariates,
                                      int replicate) {
  const Eigen::MatrixXd& Z = covariates.Z;
  if (Z.rows() != y.size()) {
    throw DataError("covariate rows do not match phenotype length");
  }
  if (Z.cols() >= Z.rows()) {
    throw DataError("more covariates than samples");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
  if (qr.rank() < Z.cols()) {
    throw NumericError("rank-deficient covariate matrix");
  }
  const Eigen::VectorXd residuals = y - Z * qr.solve(y);
  const double sd = std::sqrt(residuals.squaredNorm() /
                              static_cast<double>(y.size() - 1));
  if (!(sd > kSdTolerance)) {
    throw NumericError("zero residual variance: phenotype is linear in covariates");
  }
  PhenotypeVector pheno;
  // Residuals are already orthogonal to the intercept, so mean is ~0;
  // recenter anyway to pin the invariant exactly.
  pheno.y = standardize_vector(residuals);
  pheno.replicate = replicate;
  return pheno;
}

}  // namespace carsel
