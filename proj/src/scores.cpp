#include "carsel/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "carsel/errors.hpp"
#include "carsel/genomatrix.hpp"
#include "carsel/kernels.hpp"
#include "carsel/rng.hpp"

namespace carsel {

namespace {

std::vector<std::string> ids_of(const GenotypeMatrix& X) {
  std::vector<std::string> ids;
  ids.reserve(X.markers.size());
  for (const MarkerMeta& m : X.markers) ids.push_back(m.id);
  return ids;
}

void check_dims(const GenotypeMatrix& X, Eigen::Index len, const char* what) {
  if (X.n() != len) {
    throw DataError(std::string(what) + " length does not match sample count");
  }
}

struct ClassIndex {
  std::vector<Eigen::Index> class0;
  std::vector<Eigen::Index> class1;
};

ClassIndex split_labels(const std::vector<int>& labels, Eigen::Index n) {
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw DataError("label length does not match sample count");
  }
  ClassIndex idx;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int lab = labels[static_cast<std::size_t>(i)];
    if (lab == 0) {
      idx.class0.push_back(i);
    } else if (lab == 1) {
      idx.class1.push_back(i);
    } else {
      throw DataError("labels must be 0 or 1");
    }
  }
  if (idx.class0.size() < 2 || idx.class1.size() < 2) {
    throw DataError("both classes need at least 2 samples");
  }
  return idx;
}

}  // namespace

const char* score_kind_name(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::COR: return "COR";
    case ScoreKind::TSCORE: return "TSCORE";
    case ScoreKind::CAR: return "CAR";
    case ScoreKind::CAT: return "CAT";
    case ScoreKind::RND: return "RND";
  }
  return "?";
}

ScoreKind score_kind_from_name(const std::string& name) {
  if (name == "COR" || name == "cor") return ScoreKind::COR;
  if (name == "TSCORE" || name == "tscore") return ScoreKind::TSCORE;
  if (name == "CAR" || name == "car") return ScoreKind::CAR;
  if (name == "CAT" || name == "cat") return ScoreKind::CAT;
  if (name == "RND" || name == "rnd") return ScoreKind::RND;
  throw DataError("unknown score kind '" + name + "'");
}

ScoreVector marginal_correlations(const GenotypeMatrix& X,
                                  const PhenotypeVector& y) {
  check_dims(X, y.y.size(), "phenotype");
  ScoreVector s;
  s.values = kernels::crossprod_omp(X.X, y.y, static_cast<double>(X.n() - 1));
  s.kind = ScoreKind::COR;
  s.marker_ids = ids_of(X);
  return s;
}

ScoreVector t_scores(const GenotypeMatrix& X, const std::vector<int>& labels) {
  const ClassIndex idx = split_labels(labels, X.n());
  const double n0 = static_cast<double>(idx.class0.size());
  const double n1 = static_cast<double>(idx.class1.size());
  const double inv = std::sqrt(1.0 / n0 + 1.0 / n1);
  const double df = n0 + n1 - 2.0;

  ScoreVector s;
  s.values.resize(X.d());
  s.kind = ScoreKind::TSCORE;
  s.marker_ids = ids_of(X);
  std::vector<char> degenerate(static_cast<std::size_t>(X.d()), 0);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Eigen::Index j = 0; j < X.d(); ++j) {
    double sum0 = 0.0, sum1 = 0.0;
    for (const Eigen::Index i : idx.class0) sum0 += X.X(i, j);
    for (const Eigen::Index i : idx.class1) sum1 += X.X(i, j);
    const double mean0 = sum0 / n0, mean1 = sum1 / n1;
    double ss = 0.0;
    for (const Eigen::Index i : idx.class0) {
      const double c = X.X(i, j) - mean0;
      ss += c * c;
    }
    for (const Eigen::Index i : idx.class1) {
      const double c = X.X(i, j) - mean1;
      ss += c * c;
    }
    const double pooled_var = ss / df;
    const double diff = mean1 - mean0;
    if (pooled_var < 1e-24) {
      // A t of ±inf; identical classes get 0, anything else is an error.
      s.values[j] = 0.0;
      if (std::abs(diff) >= 1e-12) degenerate[static_cast<std::size_t>(j)] = 1;
    } else {
      s.values[j] = diff / (std::sqrt(pooled_var) * inv);
    }
  }
  for (Eigen::Index j = 0; j < X.d(); ++j) {
    if (degenerate[static_cast<std::size_t>(j)]) {
      throw NumericError("zero pooled variance in marker '" +
                         s.marker_ids[static_cast<std::size_t>(j)] +
                         "' with nonzero class mean difference");
    }
  }
  return s;
}

ScoreVector car_scores(const LowRankCorrelation& factor,
                       const ScoreVector& marginal) {
  if (marginal.kind != ScoreKind::COR) {
    throw DataError("CAR scores adjust marginal correlations");
  }
  ScoreVector s;
  s.values = factor.adjusted_scores(marginal.values);
  s.kind = ScoreKind::CAR;
  s.lambda_used = factor.lambda();
  s.marker_ids = marginal.marker_ids;
  return s;
}

ScoreVector car_scores(const GenotypeMatrix& X, const PhenotypeVector& y,
                       const ShrinkageEstimate& lambda) {
  const LowRankCorrelation factor = LowRankCorrelation::build(X.X, lambda.lambda);
  return car_scores(factor, marginal_correlations(X, y));
}

Eigen::MatrixXd pooled_class_standardized(const Eigen::MatrixXd& X,
                                          const std::vector<int>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != X.rows()) {
    throw DataError("label length does not match sample count");
  }
  Eigen::MatrixXd pooled(X.rows(), X.cols());
  Eigen::Index row = 0;
  for (const int cls : {0, 1}) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      if (labels[static_cast<std::size_t>(i)] == cls) members.push_back(i);
    }
    if (members.size() < 2) throw DataError("both classes need at least 2 samples");
    Eigen::MatrixXd block(static_cast<Eigen::Index>(members.size()), X.cols());
    for (std::size_t r = 0; r < members.size(); ++r) {
      block.row(static_cast<Eigen::Index>(r)) = X.row(members[r]);
    }
    const kernels::ColumnStats stats = kernels::column_stats_omp(block);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (!(stats.sd[j] > 1e-12)) {
        throw NumericError("column " + std::to_string(j + 1) +
                           " is constant within class " + std::to_string(cls));
      }
    }
    kernels::standardize_columns_omp(block, stats);
    pooled.middleRows(row, block.rows()) = block;
    row += block.rows();
  }
  return pooled;
}

ScoreVector cat_scores(const GenotypeMatrix& X, const std::vector<int>& labels,
                       const ShrinkageEstimate& lambda) {
  ScoreVector tau = t_scores(X, labels);
  ScoreVector s;
  if (lambda.lambda >= kLambdaMax) {
    s.values = tau.values;  // R = I, CAT == TSCORE
  } else {
    const Eigen::MatrixXd pooled = pooled_class_standardized(X.X, labels);
    const LowRankCorrelation factor =
        LowRankCorrelation::build(pooled, lambda.lambda, /*ddof=*/2);
    s.values = factor.adjusted_scores(tau.values);
  }
  s.kind = ScoreKind::CAT;
  s.lambda_used = lambda.lambda;
  s.marker_ids = std::move(tau.marker_ids);
  return s;
}

DecompositionSummary decompose(const ScoreVector& scores,
                               const std::vector<std::string>& gene_labels) {
  if (scores.kind != ScoreKind::CAR && scores.kind != ScoreKind::CAT) {
    throw DataError(
        "decomposition requires adjusted scores (CAR or CAT); squared "
        "marginal statistics do not sum to the explained variance under "
        "correlation");
  }
  if (!gene_labels.empty() &&
      static_cast<Eigen::Index>(gene_labels.size()) != scores.d()) {
    throw DataError("gene label length does not match score length");
  }
  DecompositionSummary out;
  out.kind = scores.kind;
  for (Eigen::Index j = 0; j < scores.d(); ++j) {
    const double sq = scores.values[j] * scores.values[j];
    out.total += sq;
    const std::string gene =
        gene_labels.empty() ? std::string() : gene_labels[static_cast<std::size_t>(j)];
    out.per_group[gene] += sq;
  }
  return out;
}

ScoreVector random_scores(Eigen::Index d, std::uint64_t seed,
                          std::vector<std::string> marker_ids) {
  if (d < 1) throw DataError("need at least one marker");
  if (!marker_ids.empty() && static_cast<Eigen::Index>(marker_ids.size()) != d) {
    throw DataError("marker id length does not match d");
  }
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::stream(seed, 0x52414e44ULL);  // "RAND"
  rng.shuffle(order);

  ScoreVector s;
  s.values.resize(d);
  // order[k] = marker ranked k-th; encode rank k as score (d - k) / d.
  for (Eigen::Index k = 0; k < d; ++k) {
    s.values[order[static_cast<std::size_t>(k)]] =
        static_cast<double>(d - k) / static_cast<double>(d);
  }
  s.kind = ScoreKind::RND;
  if (marker_ids.empty()) {
    for (Eigen::Index j = 0; j < d; ++j) {
      marker_ids.push_back("m" + std::to_string(j + 1));
    }
  }
  s.marker_ids = std::move(marker_ids);
  return s;
}

std::vector<int> rank_order(const ScoreVector& scores) {
  std::vector<int> order(static_cast<std::size_t>(scores.d()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(scores.values[a]) > std::abs(scores.values[b]);
  });
  return order;
}

}  // namespace carsel
