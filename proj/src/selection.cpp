#include "carsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "carsel/errors.hpp"
#include "carsel/scores.hpp"
#include "carsel/stats.hpp"

namespace carsel {

namespace {

constexpr int kMinMarkersForFdr = 50;
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kHalfNormalNorm = 0.7978845608028654;  // sqrt(2/pi)

double half_normal_pdf(double z, double sigma) {
  const double t = z / sigma;
  return kHalfNormalNorm / sigma * std::exp(-0.5 * t * t);
}

double half_normal_cdf(double z, double sigma) {
  return std::erf(z / (sigma * kSqrt2));
}

// Truncated half-normal log-likelihood (constants dropped) for the z values
// at or below the truncation point q.
double truncated_loglik(double sigma, double sum_sq, double count, double q) {
  return -sum_sq / (2.0 * sigma * sigma) -
         count * (std::log(sigma) + std::log(half_normal_cdf(q, sigma)));
}

// Golden-section maximizer over log sigma; the likelihood is unimodal in
// the scale parameter.
double fit_null_scale(const std::vector<double>& z_below, double q) {
  double sum_sq = 0.0;
  for (const double z : z_below) sum_sq += z * z;
  const double count = static_cast<double>(z_below.size());
  const double sigma0 = std::sqrt(std::max(sum_sq / count, 1e-300));

  const double golden = 0.6180339887498949;
  double lo = std::log(sigma0) - std::log(64.0);
  double hi = std::log(sigma0) + std::log(64.0);
  double x1 = hi - golden * (hi - lo);
  double x2 = lo + golden * (hi - lo);
  double f1 = truncated_loglik(std::exp(x1), sum_sq, count, q);
  double f2 = truncated_loglik(std::exp(x2), sum_sq, count, q);
  for (int iter = 0; iter < 200; ++iter) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = truncated_loglik(std::exp(x2), sum_sq, count, q);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = truncated_loglik(std::exp(x1), sum_sq, count, q);
    }
  }
  return std::exp(0.5 * (lo + hi));
}

struct UniqueZ {
  std::vector<double> value;   // ascending, strictly increasing
  std::vector<double> cumfrac; // ECDF at each value
};

UniqueZ unique_ecdf(std::vector<double> z) {
  std::sort(z.begin(), z.end());
  UniqueZ u;
  const double d = static_cast<double>(z.size());
  std::size_t i = 0;
  while (i < z.size()) {
    std::size_t j = i;
    while (j < z.size() && z[j] == z[i]) ++j;
    u.value.push_back(z[i]);
    u.cumfrac.push_back(static_cast<double>(j) / d);
    i = j;
  }
  return u;
}

// Grenander estimate: the density of the least concave majorant of the
// ECDF on [0, max z]. Returns the slope covering each unique z value.
std::vector<double> grenander_density(const UniqueZ& u) {
  // Hull points (x, F). Start at x=0 carrying any point mass at zero; a
  // zero score is handled by the caller (fdr forced to 1 there).
  std::vector<double> xs, fs;
  std::size_t start = 0;
  if (!u.value.empty() && u.value.front() == 0.0) {
    xs.push_back(0.0);
    fs.push_back(u.cumfrac.front());
    start = 1;
  } else {
    xs.push_back(0.0);
    fs.push_back(0.0);
  }
  std::vector<std::size_t> hull;  // indices into xs/fs
  hull.push_back(0);
  auto slope = [&](std::size_t a, std::size_t b) {
    return (fs[b] - fs[a]) / (xs[b] - xs[a]);
  };
  for (std::size_t i = start; i < u.value.size(); ++i) {
    xs.push_back(u.value[i]);
    fs.push_back(u.cumfrac[i]);
    const std::size_t p = xs.size() - 1;
    while (hull.size() >= 2 &&
           slope(hull[hull.size() - 2], hull.back()) <= slope(hull.back(), p)) {
      hull.pop_back();
    }
    hull.push_back(p);
  }

  // Slope of the covering hull segment for each unique value.
  std::vector<double> density(u.value.size(), 0.0);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < u.value.size(); ++i) {
    if (u.value[i] == 0.0) {
      density[i] = std::numeric_limits<double>::infinity();
      continue;
    }
    while (seg + 1 < hull.size() && xs[hull[seg + 1]] < u.value[i]) ++seg;
    density[i] = slope(hull[seg], hull[seg + 1]);
  }
  return density;
}

SelectionResult fdr_core(const ScoreVector& scores) {
  const Eigen::Index d = scores.d();
  if (d < kMinMarkersForFdr) {
    throw DataError("local fdr estimation needs at least " +
                    std::to_string(kMinMarkersForFdr) +
                    " markers; use fixed-size selection instead");
  }
  if (!scores.values.allFinite()) throw NumericError("non-finite scores");

  std::vector<double> z(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) z[static_cast<std::size_t>(j)] = std::abs(scores.values[j]);
  const auto [zmin, zmax] = std::minmax_element(z.begin(), z.end());
  if (*zmax - *zmin < 1e-14 * std::max(1.0, *zmax)) {
    throw NumericError("degenerate scores: all |score| equal");
  }

  // Truncation point and null fit on the central 75%.
  const double q = quantile(z, 0.75);
  if (!(q > 0.0)) {
    throw NumericError("cannot fit null model: 75% of scores are zero");
  }
  std::vector<double> z_below;
  for (const double v : z) {
    if (v <= q) z_below.push_back(v);
  }
  const double sigma = fit_null_scale(z_below, q);
  const double eta0 =
      std::min(1.0, static_cast<double>(z_below.size()) /
                        static_cast<double>(d) / half_normal_cdf(q, sigma));

  // Mixture density and raw fdr per unique z.
  const UniqueZ u = unique_ecdf(z);
  const std::vector<double> density = grenander_density(u);
  std::vector<double> fdr_at(u.value.size());
  for (std::size_t i = 0; i < u.value.size(); ++i) {
    if (std::isinf(density[i]) || u.value[i] == 0.0) {
      fdr_at[i] = 1.0;
    } else {
      fdr_at[i] =
          std::min(1.0, eta0 * half_normal_pdf(u.value[i], sigma) / density[i]);
    }
  }
  // Enforce monotone non-increasing in z.
  double running = 0.0;
  for (std::size_t i = u.value.size(); i-- > 0;) {
    running = std::max(running, fdr_at[i]);
    fdr_at[i] = running;
  }

  SelectionResult result;
  result.eta0 = eta0;
  result.null_scale = sigma;
  result.cutoff = std::numeric_limits<double>::quiet_NaN();

  const std::vector<int> order = rank_order(scores);
  result.ranked_index = order;
  result.ranked_ids.reserve(order.size());
  result.local_fdr.reserve(order.size());
  for (const int j : order) {
    result.ranked_ids.push_back(scores.marker_ids[static_cast<std::size_t>(j)]);
    const double zj = std::abs(scores.values[j]);
    const std::size_t pos = static_cast<std::size_t>(
        std::lower_bound(u.value.begin(), u.value.end(), zj) - u.value.begin());
    result.local_fdr.push_back(fdr_at[pos]);
  }
  return result;
}

}  // namespace

SelectionResult local_fdr(const ScoreVector& scores) { return fdr_core(scores); }

SelectionResult select(const ScoreVector& scores, double cutoff) {
  if (!(cutoff > 0.0) || !(cutoff < 1.0)) {
    throw DataError("fdr cutoff must be in (0, 1)");
  }
  SelectionResult result = fdr_core(scores);
  result.cutoff = cutoff;
  for (std::size_t r = 0; r < result.ranked_ids.size(); ++r) {
    if (result.local_fdr[r] < cutoff) {
      result.selected.push_back(result.ranked_ids[r]);
    }
  }
  return result;
}

SelectionResult select_top_k(const ScoreVector& scores, int k) {
  if (k < 1 || static_cast<Eigen::Index>(k) > scores.d()) {
    throw DataError("k out of range: " + std::to_string(k));
  }
  SelectionResult result;
  result.cutoff = std::numeric_limits<double>::quiet_NaN();
  result.eta0 = std::numeric_limits<double>::quiet_NaN();
  result.null_scale = std::numeric_limits<double>::quiet_NaN();
  const std::vector<int> order = rank_order(scores);
  result.ranked_index = order;
  for (const int j : order) {
    result.ranked_ids.push_back(scores.marker_ids[static_cast<std::size_t>(j)]);
  }
  result.selected.assign(result.ranked_ids.begin(),
                         result.ranked_ids.begin() + k);
  return result;
}

}  // namespace carsel
