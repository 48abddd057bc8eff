#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace carsel {

// ---------------------------------------------------------------------------
// Raw genotype data as read from disk: additive allele-count codes per
// sample x marker, -1 marking a missing call.

struct MarkerRecord {
  std::string id;
  std::string gene;
  bool synonymous = false;
};

struct RawGenotypes {
  static constexpr std::int8_t kMissing = -1;

  std::vector<std::string> samples;               // n
  std::vector<MarkerRecord> markers;              // d
  Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> calls;  // n x d

  Eigen::Index n() const { return calls.rows(); }
  Eigen::Index d() const { return calls.cols(); }
};

// ---------------------------------------------------------------------------
// Column-standardized predictor matrix plus per-marker metadata.

struct MarkerMeta {
  std::string id;
  std::string gene;
  double maf = 0.0;  // min(p, 1-p), p from pre-standardization codes
};

struct GenotypeMatrix {
  Eigen::MatrixXd X;  // n x d, each column mean 0 / variance 1 (n-1 denom)
  std::vector<MarkerMeta> markers;   // d
  std::vector<std::string> samples;  // n

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index d() const { return X.cols(); }
};

struct PhenotypeVector {
  Eigen::VectorXd y;
  int replicate = 1;  // b in 1..B
};

// Non-genetic covariates; first column is the intercept.
struct CovariateMatrix {
  Eigen::MatrixXd Z;  // n x c

  static CovariateMatrix intercept_only(Eigen::Index n) {
    CovariateMatrix cov;
    cov.Z = Eigen::MatrixXd::Ones(n, 1);
    return cov;
  }
};

// ---------------------------------------------------------------------------
// Scores and selections.

enum class ScoreKind { COR, TSCORE, CAR, CAT, RND };

const char* score_kind_name(ScoreKind kind);
ScoreKind score_kind_from_name(const std::string& name);

struct ScoreVector {
  Eigen::VectorXd values;               // d
  ScoreKind kind = ScoreKind::COR;
  std::optional<double> lambda_used;    // set for CAR/CAT
  std::vector<std::string> marker_ids;  // d

  Eigen::Index d() const { return values.size(); }
};

struct SelectionResult {
  std::vector<int> ranked_index;        // into the score vector, by |score| desc
  std::vector<std::string> ranked_ids;  // same order
  std::vector<double> local_fdr;        // parallel to ranked_ids, non-decreasing
  std::vector<std::string> selected;    // ids with fdr < cutoff (ranked order)
  double cutoff = 0.5;
  double eta0 = 1.0;        // estimated null proportion
  double null_scale = 1.0;  // fitted half-normal scale

  std::size_t model_size() const { return selected.size(); }
};

}  // namespace carsel
