#pragma once

#include <string>
#include <vector>

#include "carsel/types.hpp"

namespace carsel {

// Additive 0/1/2 coding as reals; missing calls are imputed to the mean of
// the observed calls in their column. A column with no observed calls is a
// DataError naming the marker.
Eigen::MatrixXd encode_additive(const RawGenotypes& raw);

struct FilterResult {
  RawGenotypes kept;
  std::vector<int> old_to_new;  // -1 for dropped markers
  int duplicates_removed = 0;
  int synonymous_removed = 0;
};

// Among any group of markers with identical raw code columns only the
// first occurrence survives; then synonymous-flagged markers are removed
// when requested. Detection is exact equality on the integer codes
// (missing sentinel included), so the result is order-stable.
FilterResult deduplicate_and_filter(const RawGenotypes& raw,
                                    bool drop_synonymous);

// Minor allele frequency per column of a code matrix: min(p, 1-p) with
// p = colsum / (2n), taken on pre-standardization codes.
std::vector<double> minor_allele_frequencies(const Eigen::MatrixXd& codes);

// Scale every column to mean 0 / sample variance 1 (n-1 denominator).
// Constant columns are a NumericError naming the column. The metadata
// overload fills in MAF from the code matrix; the bare overload fabricates
// marker ids m1..md.
GenotypeMatrix standardize_columns(const Eigen::MatrixXd& codes,
                                   std::vector<MarkerRecord> markers,
                                   std::vector<std::string> samples);
GenotypeMatrix standardize_columns(const Eigen::MatrixXd& codes);

// (y - mean) / sd; degenerate sd is a NumericError.
Eigen::VectorXd standardize_vector(const Eigen::VectorXd& y);

// Residuals of the least-squares regression of y on Z (Z carries its own
// intercept), standardized to mean 0 / variance 1.
PhenotypeVector residualize_phenotype(const Eigen::VectorXd& y,
                                      const CovariateMatrix& covariates,
                                      int replicate = 1);

}  // namespace carsel
