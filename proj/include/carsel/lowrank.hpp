#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>

#include "carsel/types.hpp"

namespace carsel {

struct ShrinkageEstimate {
  enum class Source { Fixed, Analytic };

  double lambda = 0.1;
  Source source = Source::Fixed;
};

// Clamp range for the shrinkage intensity; lambda = 0 would leave the
// d >> n correlation matrix singular.
inline constexpr double kLambdaMin = 1e-6;
inline constexpr double kLambdaMax = 1.0;

ShrinkageEstimate fixed_lambda(double value);

// Analytic intensity: sum over off-diagonal pairs of Var(r_ij), with the
// large-sample approximation Var(r) = (1 - r^2)^2 / (n - 1), divided by the
// sum of squared off-diagonal correlations, clipped into [1e-6, 1].
ShrinkageEstimate estimate_lambda_analytic(const GenotypeMatrix& X);

// Shrinkage correlation matrix R = lambda * (I_d + U M U^T) held in factored
// form: U carries the m eigenvectors of the empirical correlation matrix
// with eigenvalues above the rank tolerance, and M_kk = ((1-lambda)/lambda)
// times the k-th eigenvalue. Built from the n x n Gram matrix when n < d,
// so no d x d buffer ever exists; total cost O(n^2 d).
class LowRankCorrelation {
public:
  // Xstd must be column-standardized; ddof is the denominator offset of the
  // correlation estimate (1 for plain data, number of classes for pooled
  // within-class data). lambda = 1 yields the empty factor (R = lambda I).
  static LowRankCorrelation build(const Eigen::MatrixXd& Xstd, double lambda,
                                  int ddof = 1);

  double lambda() const { return lambda_; }
  Eigen::Index dim() const { return d_; }
  Eigen::Index rank() const { return basis_.cols(); }
  const Eigen::MatrixXd& basis() const { return basis_; }        // d x m
  const Eigen::VectorXd& factor_diag() const { return diag_; }   // m

  // R^alpha v via the identity
  //   R^alpha = lambda^alpha (I - U (I_m - (I_m + M)^alpha) U^T).
  // alpha = 0 returns v exactly.
  Eigen::VectorXd power_apply(double alpha, const Eigen::VectorXd& v) const;

  // R^(-1/2) r_xy, the adjusted-score product, laid out exactly as the
  // d x m / m x 1 chain so nothing larger than U is touched.
  Eigen::VectorXd adjusted_scores(const Eigen::VectorXd& r_xy) const;

  // Dense reconstruction for small-d oracles and debugging only.
  Eigen::MatrixXd dense() const;

  // Binary cache ("LRC1", little-endian f64) so one factorization serves
  // many replicate phenotypes.
  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  static LowRankCorrelation load(std::istream& in);
  static LowRankCorrelation load_file(const std::string& path);

private:
  LowRankCorrelation() = default;

  double lambda_ = 1.0;
  Eigen::Index d_ = 0;
  Eigen::MatrixXd basis_;  // U
  Eigen::VectorXd diag_;   // M
};

}  // namespace carsel
