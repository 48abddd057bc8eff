#pragma once

#include <map>
#include <string>
#include <vector>

#include "carsel/lowrank.hpp"
#include "carsel/types.hpp"

namespace carsel {

// Pearson correlations between each standardized column and the
// standardized phenotype: value_j = t(X_j) y / (n - 1).
ScoreVector marginal_correlations(const GenotypeMatrix& X,
                                  const PhenotypeVector& y);

// Two-sample pooled-variance t statistic per column; labels are 0/1 and
// both classes need at least 2 samples.
ScoreVector t_scores(const GenotypeMatrix& X, const std::vector<int>& labels);

// Correlation-adjusted marginal correlations: the marginal correlations
// decorrelated by the inverse square root of the shrinkage correlation
// matrix, computed entirely through the low-rank factor.
ScoreVector car_scores(const GenotypeMatrix& X, const PhenotypeVector& y,
                       const ShrinkageEstimate& lambda);

// Same, reusing a prebuilt factor (the replicate driver path).
ScoreVector car_scores(const LowRankCorrelation& factor,
                       const ScoreVector& marginal);

// Correlation-adjusted t scores. The correlation factor is built from data
// standardized within each class and pooled, so the same low-rank
// machinery serves both score families.
ScoreVector cat_scores(const GenotypeMatrix& X, const std::vector<int>& labels,
                       const ShrinkageEstimate& lambda);

// Rows of X standardized within each label class, stacked in input order.
// Shared between cat_scores and its dense test oracles.
Eigen::MatrixXd pooled_class_standardized(const Eigen::MatrixXd& X,
                                          const std::vector<int>& labels);

struct DecompositionSummary {
  double total = 0.0;  // R^2 for CAR, T^2 for CAT
  ScoreKind kind = ScoreKind::CAR;
  std::map<std::string, double> per_group;  // gene -> sum of squared scores
};

// Sum of squared adjusted scores, total and per gene. Only CAR and CAT
// decompose this way; other kinds are rejected.
DecompositionSummary decompose(const ScoreVector& scores,
                               const std::vector<std::string>& gene_labels);

// Random permutation ranks encoded as scores in (0, 1]; the RND baseline.
ScoreVector random_scores(Eigen::Index d, std::uint64_t seed,
                          std::vector<std::string> marker_ids = {});

// Ranking key used across the library: descending |value|, ties broken by
// ascending marker index.
std::vector<int> rank_order(const ScoreVector& scores);

}  // namespace carsel
