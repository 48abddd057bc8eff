#include <doctest.h>

#include <algorithm>
#include <set>

#include "carsel/errors.hpp"
#include "carsel/genomatrix.hpp"
#include "carsel/rng.hpp"
#include "carsel/scores.hpp"
#include "reference.hpp"

using namespace carsel;

namespace {

GenotypeMatrix random_geno(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd M(n, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < n; ++i) M(i, j) = rng.normal();
  }
  return standardize_columns(M);
}

PhenotypeVector standardized_pheno(const Eigen::VectorXd& y) {
  PhenotypeVector p;
  p.y = standardize_vector(y);
  return p;
}

}  // namespace

TEST_CASE("marginal correlation of a column with itself is 1") {
  const GenotypeMatrix g = random_geno(30, 5, 71);
  PhenotypeVector y;
  y.y = g.X.col(2);
  const ScoreVector s = marginal_correlations(g, y);
  CHECK(s.kind == ScoreKind::COR);
  CHECK(std::abs(s.values[2] - 1.0) < 1e-12);
}

TEST_CASE("marginal correlation with an orthogonal phenotype is 0") {
  Eigen::MatrixXd M(4, 1);
  M.col(0) << 1, -1, 1, -1;
  const GenotypeMatrix g = standardize_columns(M);
  Eigen::VectorXd y(4);
  y << 1, 1, -1, -1;
  const ScoreVector s = marginal_correlations(g, standardized_pheno(y));
  CHECK(std::abs(s.values[0]) < 1e-12);
}

TEST_CASE("marginal correlations match the textbook oracle") {
  const GenotypeMatrix g = random_geno(30, 10, 72);
  Rng rng(73);
  Eigen::VectorXd y(30);
  for (int i = 0; i < 30; ++i) y[i] = g.X(i, 0) + 0.5 * rng.normal();
  const PhenotypeVector p = standardized_pheno(y);
  const ScoreVector s = marginal_correlations(g, p);
  for (int j = 0; j < 10; ++j) {
    CHECK(s.values[j] ==
          doctest::Approx(ref::pearson(g.X.col(j), p.y)).epsilon(1e-12));
  }
}

TEST_CASE("t-scores: identical class distributions give 0") {
  Eigen::MatrixXd M(6, 2);
  M.col(0) << 1, 2, 3, 1, 2, 3;  // same values in both classes
  M.col(1) << 1, 2, 3, 4, 5, 6;
  const GenotypeMatrix g = standardize_columns(M);
  const std::vector<int> labels{0, 0, 0, 1, 1, 1};
  const ScoreVector s = t_scores(g, labels);
  CHECK(std::abs(s.values[0]) < 1e-12);
}

TEST_CASE("t-scores: zero pooled variance with separated means is an error") {
  GenotypeMatrix g;
  g.X.resize(6, 1);
  g.X.col(0) << -1, -1, -1, 1, 1, 1;  // constant within class
  g.markers.resize(1);
  g.markers[0].id = "sep";
  g.samples = {"a", "b", "c", "d", "e", "f"};
  const std::vector<int> labels{0, 0, 0, 1, 1, 1};
  CHECK_THROWS_WITH_AS(t_scores(g, labels),
                       doctest::Contains("zero pooled variance"), NumericError);
}

TEST_CASE("t-scores match the direct formula") {
  const GenotypeMatrix g = random_geno(40, 8, 74);
  std::vector<int> labels(40);
  for (int i = 0; i < 40; ++i) labels[i] = i % 2;
  const ScoreVector s = t_scores(g, labels);
  for (int j = 0; j < 8; ++j) {
    std::vector<double> c0, c1;
    for (int i = 0; i < 40; ++i) {
      (labels[i] == 0 ? c0 : c1).push_back(g.X(i, j));
    }
    CHECK(s.values[j] == doctest::Approx(ref::pooled_t(c0, c1)).epsilon(1e-10));
  }
}

TEST_CASE("t-scores reject single-class input") {
  const GenotypeMatrix g = random_geno(8, 2, 75);
  CHECK_THROWS_AS(t_scores(g, std::vector<int>(8, 1)), DataError);
}

TEST_CASE("lambda = 1 reductions: CAR == COR and CAT == TSCORE") {
  const GenotypeMatrix g = random_geno(24, 15, 76);
  Rng rng(77);
  Eigen::VectorXd y(24);
  for (int i = 0; i < 24; ++i) y[i] = g.X(i, 3) + rng.normal();
  const PhenotypeVector p = standardized_pheno(y);

  const ScoreVector cor = marginal_correlations(g, p);
  const ScoreVector car = car_scores(g, p, fixed_lambda(1.0));
  CHECK(car.kind == ScoreKind::CAR);
  CHECK(car.lambda_used == 1.0);
  CHECK((car.values - cor.values).cwiseAbs().maxCoeff() < 1e-12);

  std::vector<int> labels(24);
  for (int i = 0; i < 24; ++i) labels[i] = i < 12 ? 0 : 1;
  const ScoreVector tau = t_scores(g, labels);
  const ScoreVector cat = cat_scores(g, labels, fixed_lambda(1.0));
  CHECK((cat.values - tau.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("duplicated predictors get equal CAR scores") {
  Rng rng(78);
  Eigen::MatrixXd M(30, 6);
  for (int j = 0; j < 6; ++j) {
    for (int i = 0; i < 30; ++i) M(i, j) = rng.normal();
  }
  M.col(4) = M.col(1);  // duplicated pair, both correlated with y below
  const GenotypeMatrix g = standardize_columns(M);
  Eigen::VectorXd y = M.col(1);
  for (int i = 0; i < 30; ++i) y[i] += 0.3 * rng.normal();
  const ScoreVector car = car_scores(g, standardized_pheno(y), fixed_lambda(0.2));
  CHECK(std::abs(car.values[1] - car.values[4]) < 1e-10);
}

TEST_CASE("grouping: swapping duplicated columns leaves the multiset alone") {
  Rng rng(79);
  Eigen::MatrixXd M(25, 5);
  for (int j = 0; j < 5; ++j) {
    for (int i = 0; i < 25; ++i) M(i, j) = rng.normal();
  }
  M.col(3) = M.col(0);
  Eigen::VectorXd y(25);
  for (int i = 0; i < 25; ++i) y[i] = M(i, 0) - M(i, 2) + 0.5 * rng.normal();

  const GenotypeMatrix g1 = standardize_columns(M);
  Eigen::MatrixXd swapped = M;
  swapped.col(0).swap(swapped.col(3));
  const GenotypeMatrix g2 = standardize_columns(swapped);

  const ScoreVector a = car_scores(g1, standardized_pheno(y), fixed_lambda(0.3));
  const ScoreVector b = car_scores(g2, standardized_pheno(y), fixed_lambda(0.3));
  std::vector<double> va(a.values.data(), a.values.data() + a.values.size());
  std::vector<double> vb(b.values.data(), b.values.data() + b.values.size());
  std::sort(va.begin(), va.end());
  std::sort(vb.begin(), vb.end());
  for (std::size_t i = 0; i < va.size(); ++i) {
    CHECK(va[i] == doctest::Approx(vb[i]).epsilon(1e-10));
  }
}

TEST_CASE("CAR matches the dense inverse-square-root oracle") {
  const GenotypeMatrix g = random_geno(50, 100, 80);
  Rng rng(81);
  Eigen::VectorXd y(50);
  for (int i = 0; i < 50; ++i) {
    y[i] = g.X(i, 10) - 0.5 * g.X(i, 20) + rng.normal();
  }
  const PhenotypeVector p = standardized_pheno(y);
  const ScoreVector cor = marginal_correlations(g, p);
  const ScoreVector car = car_scores(g, p, fixed_lambda(0.1));

  const Eigen::MatrixXd dense = ref::dense_shrinkage_correlation(g.X, 0.1);
  const Eigen::VectorXd oracle = ref::dense_matrix_power(dense, -0.5) * cor.values;
  CHECK((car.values - oracle).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("CAT matches the dense oracle on pooled within-class data") {
  const GenotypeMatrix g = random_geno(36, 20, 82);
  std::vector<int> labels(36);
  for (int i = 0; i < 36; ++i) labels[i] = i % 3 == 0 ? 1 : 0;
  const ScoreVector tau = t_scores(g, labels);
  const ScoreVector cat = cat_scores(g, labels, fixed_lambda(0.25));

  const Eigen::MatrixXd pooled = pooled_class_standardized(g.X, labels);
  const Eigen::MatrixXd dense =
      ref::dense_shrinkage_correlation(pooled, 0.25, /*ddof=*/2);
  const Eigen::VectorXd oracle = ref::dense_matrix_power(dense, -0.5) * tau.values;
  CHECK((cat.values - oracle).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((dense.diagonal().array() - 1.0).abs().maxCoeff() < 1e-8);
}

TEST_CASE("antagonistic pair: adjusted scores stay bounded and rank low") {
  // Two near-identical columns whose marginal correlations cancel; a third,
  // independent column carries the real signal. The adjusted scores of the
  // pair may exceed their own tiny marginals (by at most lambda^-1/2) but
  // must stay below the genuine signal in the ranking.
  Rng rng(83);
  const int n = 400;
  Eigen::MatrixXd M(n, 40);
  for (int j = 0; j < 40; ++j) {
    for (int i = 0; i < n; ++i) M(i, j) = rng.normal();
  }
  M.col(1) = M.col(0) + 0.05 * M.col(1);  // emp corr ~ 0.999
  const GenotypeMatrix g = standardize_columns(M);

  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    // strong antagonistic effects on the pair; moderate true effect on col 5
    y[i] = 2.0 * (g.X(i, 0) - g.X(i, 1)) + 0.8 * g.X(i, 5) + rng.normal();
  }
  const PhenotypeVector p = standardized_pheno(y);
  const ScoreVector cor = marginal_correlations(g, p);
  const double lambda = 0.1;
  const ScoreVector car = car_scores(g, p, fixed_lambda(lambda));

  const double bound = 1.0 / std::sqrt(lambda);
  CHECK(std::abs(car.values[0]) <=
        bound * std::max(std::abs(cor.values[0]), std::abs(cor.values[1])) + 1e-9);
  CHECK(std::abs(car.values[1]) <=
        bound * std::max(std::abs(cor.values[0]), std::abs(cor.values[1])) + 1e-9);
  CHECK(std::abs(car.values[0]) < std::abs(car.values[5]));
  CHECK(std::abs(car.values[1]) < std::abs(car.values[5]));

  // Synergistic direction shrinks: same pair, reinforcing effects.
  for (int i = 0; i < n; ++i) y[i] = g.X(i, 0) + g.X(i, 1) + rng.normal();
  const PhenotypeVector p2 = standardized_pheno(y);
  const ScoreVector cor2 = marginal_correlations(g, p2);
  const ScoreVector car2 = car_scores(g, p2, fixed_lambda(lambda));
  CHECK(std::abs(car2.values[0]) < std::abs(cor2.values[0]));
  CHECK(std::abs(car2.values[1]) < std::abs(cor2.values[1]));
}

TEST_CASE("decomposition: sum of squared CAR equals the explained variance") {
  const GenotypeMatrix g = random_geno(45, 60, 84);
  Rng rng(85);
  Eigen::VectorXd y(45);
  for (int i = 0; i < 45; ++i) y[i] = g.X(i, 7) + rng.normal();
  const PhenotypeVector p = standardized_pheno(y);
  const ScoreVector cor = marginal_correlations(g, p);
  const ScoreVector car = car_scores(g, p, fixed_lambda(0.2));

  std::vector<std::string> genes;
  for (int j = 0; j < 60; ++j) genes.push_back(j < 30 ? "geneA" : "geneB");
  const DecompositionSummary summary = decompose(car, genes);

  const Eigen::MatrixXd dense = ref::dense_shrinkage_correlation(g.X, 0.2);
  const double oracle = cor.values.dot(dense.inverse() * cor.values);
  CHECK(summary.total == doctest::Approx(oracle).epsilon(1e-8));
  CHECK(summary.per_group.at("geneA") + summary.per_group.at("geneB") ==
        doctest::Approx(summary.total).epsilon(1e-12));
}

TEST_CASE("decomposition edge cases") {
  ScoreVector zero;
  zero.kind = ScoreKind::CAR;
  zero.values = Eigen::VectorXd::Zero(4);
  zero.marker_ids = {"a", "b", "c", "d"};
  const DecompositionSummary summary =
      decompose(zero, {"g1", "g1", "g1", "g1"});
  CHECK(summary.total == 0.0);
  CHECK(summary.per_group.at("g1") == 0.0);

  ScoreVector cor = zero;
  cor.kind = ScoreKind::COR;
  CHECK_THROWS_AS(decompose(cor, {}), DataError);
  ScoreVector rnd = zero;
  rnd.kind = ScoreKind::RND;
  CHECK_THROWS_AS(decompose(rnd, {}), DataError);
}

TEST_CASE("random scores are reproducible permutations") {
  const ScoreVector a = random_scores(5, 99);
  const ScoreVector b = random_scores(5, 99);
  CHECK(a.values == b.values);
  CHECK(a.kind == ScoreKind::RND);

  std::set<double> distinct(a.values.data(), a.values.data() + 5);
  CHECK(distinct.size() == 5);
  CHECK(random_scores(5, 100).values != a.values);
}

TEST_CASE("random scores rank each marker first uniformly") {
  const int d = 8;
  const int draws = 10000;
  std::vector<int> first_counts(d, 0);
  for (int t = 0; t < draws; ++t) {
    const ScoreVector s = random_scores(d, 1000 + t);
    int argmax = 0;
    for (int j = 1; j < d; ++j) {
      if (s.values[j] > s.values[argmax]) argmax = j;
    }
    ++first_counts[argmax];
  }
  const double expected = draws / static_cast<double>(d);
  const double sigma = std::sqrt(draws * (1.0 / d) * (1.0 - 1.0 / d));
  for (int j = 0; j < d; ++j) {
    CHECK(std::abs(first_counts[j] - expected) <= 3.0 * sigma);
  }
}

TEST_CASE("positive phenotype scaling keeps the CAR ranking") {
  const GenotypeMatrix g = random_geno(35, 25, 86);
  Rng rng(87);
  Eigen::VectorXd y(35);
  for (int i = 0; i < 35; ++i) y[i] = g.X(i, 2) - g.X(i, 9) + rng.normal();

  const ScoreVector car1 =
      car_scores(g, standardized_pheno(y), fixed_lambda(0.15));
  const ScoreVector car2 =
      car_scores(g, standardized_pheno(7.5 * y), fixed_lambda(0.15));
  CHECK(rank_order(car1) == rank_order(car2));
}
