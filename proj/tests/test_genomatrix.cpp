#include <doctest.h>

#include "carsel/errors.hpp"
#include "carsel/genomatrix.hpp"
#include "carsel/rng.hpp"
#include "reference.hpp"

using namespace carsel;

namespace {

RawGenotypes make_raw(int n, int d) {
  RawGenotypes raw;
  raw.calls.setZero(n, d);
  for (int i = 0; i < n; ++i) raw.samples.push_back("s" + std::to_string(i + 1));
  for (int j = 0; j < d; ++j) {
    MarkerRecord rec;
    rec.id = "m" + std::to_string(j + 1);
    raw.markers.push_back(rec);
  }
  return raw;
}

}  // namespace

TEST_CASE("encode_additive maps codes to reals") {
  RawGenotypes raw = make_raw(4, 1);
  raw.calls.col(0) << 0, 1, 2, 1;
  const Eigen::MatrixXd codes = encode_additive(raw);
  CHECK(codes(0, 0) == 0.0);
  CHECK(codes(1, 0) == 1.0);
  CHECK(codes(2, 0) == 2.0);
  CHECK(codes(3, 0) == 1.0);
}

TEST_CASE("encode_additive imputes missing calls to the column mean") {
  RawGenotypes raw = make_raw(3, 1);
  raw.calls.col(0) << 0, RawGenotypes::kMissing, 2;
  const Eigen::MatrixXd codes = encode_additive(raw);
  CHECK(codes(0, 0) == 0.0);
  CHECK(codes(1, 0) == 1.0);  // mean of {0, 2}
  CHECK(codes(2, 0) == 2.0);
}

TEST_CASE("encode_additive on a toy 4x3 file matches the hand transcription") {
  RawGenotypes raw = make_raw(4, 3);
  raw.calls.col(0) << 0, 1, 2, 1;
  raw.calls.col(1) << 2, RawGenotypes::kMissing, 0, 1;
  raw.calls.col(2) << 1, 1, RawGenotypes::kMissing, RawGenotypes::kMissing;
  const Eigen::MatrixXd codes = encode_additive(raw);
  Eigen::MatrixXd expected(4, 3);
  expected << 0, 2, 1,  //
      1, 1.0, 1,        // col 1 missing -> mean(2,0,1) = 1
      2, 0, 1.0,        // col 2 missing -> mean(1,1) = 1
      1, 1, 1.0;
  CHECK((codes - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("encode_additive rejects a fully missing column by id") {
  RawGenotypes raw = make_raw(3, 2);
  raw.calls.col(0) << 0, 1, 2;
  raw.calls.col(1).setConstant(RawGenotypes::kMissing);
  CHECK_THROWS_WITH_AS(encode_additive(raw), doctest::Contains("m2"), DataError);
}

TEST_CASE("deduplicate keeps the first of an identical pair") {
  RawGenotypes raw = make_raw(3, 2);
  raw.calls.col(0) << 0, 1, 2;
  raw.calls.col(1) << 0, 1, 2;
  const FilterResult result = deduplicate_and_filter(raw, false);
  REQUIRE(result.kept.d() == 1);
  CHECK(result.kept.markers[0].id == "m1");
  CHECK(result.duplicates_removed == 1);
  CHECK(result.old_to_new[0] == 0);
  CHECK(result.old_to_new[1] == -1);
}

TEST_CASE("deduplicate + synonymous filter on the 5-marker toy set") {
  // m1, m3 duplicated pair; m4 synonymous; survivors m1, m2, m5.
  RawGenotypes raw = make_raw(3, 5);
  raw.calls.col(0) << 0, 1, 2;
  raw.calls.col(1) << 1, 1, 0;
  raw.calls.col(2) << 0, 1, 2;
  raw.calls.col(3) << 2, 0, 1;
  raw.calls.col(4) << 2, 2, 0;
  raw.markers[3].synonymous = true;
  const FilterResult result = deduplicate_and_filter(raw, true);
  REQUIRE(result.kept.d() == 3);
  CHECK(result.kept.markers[0].id == "m1");
  CHECK(result.kept.markers[1].id == "m2");
  CHECK(result.kept.markers[2].id == "m5");
  CHECK(result.duplicates_removed == 1);
  CHECK(result.synonymous_removed == 1);

  // Synonymous markers stay when the flag is off.
  CHECK(deduplicate_and_filter(raw, false).kept.d() == 4);
}

TEST_CASE("standardize_columns two-point column") {
  Eigen::MatrixXd M(2, 1);
  M << 0, 2;
  const GenotypeMatrix g = standardize_columns(M);
  CHECK(g.X(0, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(g.X(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("standardize_columns is idempotent and matches the dense oracle") {
  Rng rng(31);
  Eigen::MatrixXd M(10, 4);
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 10; ++i) M(i, j) = 3.0 * rng.normal() + j;
  }
  const GenotypeMatrix once = standardize_columns(M);
  CHECK((once.X - ref::standardize(M)).cwiseAbs().maxCoeff() < 1e-12);
  const GenotypeMatrix twice = standardize_columns(once.X);
  CHECK((twice.X - once.X).cwiseAbs().maxCoeff() < 1e-12);

  for (int j = 0; j < 4; ++j) {
    CHECK(std::abs(ref::column_mean(once.X, j)) < 1e-10);
    CHECK(std::abs(ref::column_sd(once.X, j) - 1.0) < 1e-8);
  }
}

TEST_CASE("standardize_columns names the constant column") {
  Eigen::MatrixXd M(4, 2);
  M.col(0) << 1, 2, 3, 4;
  M.col(1).setConstant(1.5);
  std::vector<MarkerRecord> markers(2);
  markers[0].id = "ok";
  markers[1].id = "flat";
  CHECK_THROWS_WITH_AS(standardize_columns(M, markers, {}),
                       doctest::Contains("flat"), NumericError);
}

TEST_CASE("MAF equals min(p, 1-p) on pre-standardization codes") {
  RawGenotypes raw = make_raw(4, 2);
  raw.calls.col(0) << 0, 1, 0, 1;  // p = 2/8
  raw.calls.col(1) << 2, 2, 2, 1;  // p = 7/8 -> maf 1/8
  const Eigen::MatrixXd codes = encode_additive(raw);
  const GenotypeMatrix g = standardize_columns(codes, raw.markers, raw.samples);
  CHECK(g.markers[0].maf == doctest::Approx(0.25));
  CHECK(g.markers[1].maf == doctest::Approx(0.125));
}

TEST_CASE("residualize with intercept only standardizes") {
  Eigen::VectorXd y(5);
  y << 3, 5, 9, 1, 2;
  const PhenotypeVector p =
      residualize_phenotype(y, CovariateMatrix::intercept_only(5));
  const double mean = y.mean();
  const double sd = std::sqrt((y.array() - mean).square().sum() / 4.0);
  for (int i = 0; i < 5; ++i) {
    CHECK(p.y[i] == doctest::Approx((y[i] - mean) / sd).epsilon(1e-12));
  }
}

TEST_CASE("residualize rejects a phenotype that is linear in covariates") {
  CovariateMatrix cov;
  cov.Z.resize(6, 2);
  cov.Z.col(0).setOnes();
  cov.Z.col(1) << 1, 2, 3, 4, 5, 6;
  const Eigen::VectorXd y = 2.0 * cov.Z.col(1) - Eigen::VectorXd::Ones(6);
  CHECK_THROWS_WITH_AS(residualize_phenotype(y, cov),
                       doctest::Contains("zero residual variance"),
                       NumericError);
}

TEST_CASE("residualize rejects rank-deficient covariates") {
  Eigen::VectorXd y(6);
  y << 1, 4, 2, 8, 5, 7;
  CovariateMatrix cov;
  cov.Z.resize(6, 3);
  cov.Z.col(0).setOnes();
  cov.Z.col(1) << 1, 2, 3, 4, 5, 6;
  cov.Z.col(2) = 2.0 * cov.Z.col(1);
  CHECK_THROWS_AS(residualize_phenotype(y, cov), NumericError);
}

TEST_CASE("residualize matches the normal-equations oracle") {
  Rng rng(32);
  const int n = 40;
  Eigen::VectorXd y(n);
  CovariateMatrix cov;
  cov.Z.resize(n, 3);
  cov.Z.col(0).setOnes();
  for (int i = 0; i < n; ++i) {
    cov.Z(i, 1) = rng.normal();
    cov.Z(i, 2) = rng.uniform(20.0, 60.0);
    y[i] = 0.7 * cov.Z(i, 1) - 0.02 * cov.Z(i, 2) + rng.normal();
  }
  const PhenotypeVector p = residualize_phenotype(y, cov);

  const Eigen::VectorXd res = ref::normal_equation_residuals(y, cov.Z);
  const double sd = std::sqrt(res.squaredNorm() / (n - 1));
  CHECK((p.y - res / sd).cwiseAbs().maxCoeff() < 1e-10);

  // Decorrelated from every covariate column.
  for (int c = 1; c < 3; ++c) {
    CHECK(std::abs(ref::pearson(p.y, cov.Z.col(c))) < 1e-8);
  }
}

TEST_CASE("encode -> dedup -> standardize is deterministic") {
  Rng rng(33);
  RawGenotypes raw = make_raw(20, 12);
  for (int j = 0; j < 12; ++j) {
    for (int i = 0; i < 20; ++i) {
      raw.calls(i, j) = static_cast<std::int8_t>(rng.integer(3));
    }
  }
  raw.calls.col(7) = raw.calls.col(2);
  raw.calls(3, 5) = RawGenotypes::kMissing;

  auto run = [&raw]() {
    FilterResult f = deduplicate_and_filter(raw, false);
    const Eigen::MatrixXd codes = encode_additive(f.kept);
    return standardize_columns(codes, f.kept.markers, f.kept.samples);
  };
  const GenotypeMatrix a = run();
  const GenotypeMatrix b = run();
  CHECK(a.X == b.X);  // bit-identical
  REQUIRE(a.markers.size() == b.markers.size());
}
