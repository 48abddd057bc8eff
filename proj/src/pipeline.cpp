#include "carsel/pipeline.hpp"

#include <algorithm>
#include <unordered_set>

#include "carsel/errors.hpp"
#include "carsel/genomatrix.hpp"
#include "carsel/rng.hpp"
#include "carsel/scores.hpp"
#include "carsel/selection.hpp"

namespace carsel {

RawGenotypes remove_constant_markers(const RawGenotypes& raw, int* removed) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < raw.d(); ++j) {
    const std::int8_t first = raw.calls(0, j);
    bool constant = true;
    for (Eigen::Index i = 1; i < raw.n(); ++i) {
      if (raw.calls(i, j) != first) {
        constant = false;
        break;
      }
    }
    if (!constant) keep.push_back(j);
  }
  const int dropped =
      static_cast<int>(raw.d() - static_cast<Eigen::Index>(keep.size()));
  if (removed) *removed = dropped;
  if (dropped == 0) return raw;
  RawGenotypes out;
  out.samples = raw.samples;
  out.calls.resize(raw.n(), static_cast<Eigen::Index>(keep.size()));
  out.markers.reserve(keep.size());
  for (std::size_t newj = 0; newj < keep.size(); ++newj) {
    out.markers.push_back(raw.markers[static_cast<std::size_t>(keep[newj])]);
    out.calls.col(static_cast<Eigen::Index>(newj)) = raw.calls.col(keep[newj]);
  }
  return out;
}

PreparedGenotypes prepare_simulated(const RawGenotypes& raw) {
  PreparedGenotypes prepared;
  const RawGenotypes nonconstant =
      remove_constant_markers(raw, &prepared.constant_dropped);
  if (nonconstant.d() == 0) throw NumericError("all simulated markers constant");
  FilterResult filtered = deduplicate_and_filter(nonconstant, false);
  prepared.duplicates_dropped = filtered.duplicates_removed;
  const Eigen::MatrixXd codes = encode_additive(filtered.kept);
  prepared.X = standardize_columns(codes, std::move(filtered.kept.markers),
                                   std::move(filtered.kept.samples));
  return prepared;
}

std::vector<int> default_k_grid(int d) {
  std::vector<int> grid;
  for (const int k : {1, 5, 10, 25, 50, 75, 100, 150, 200, 300, 400, 500}) {
    if (k <= d) grid.push_back(k);
  }
  if (grid.empty()) grid.push_back(d);
  return grid;
}

BenchResult run_bench(const BenchOptions& options) {
  const SimulationScenario& sc = options.scenario;
  const RawGenotypes raw = simulate_genotypes(sc);
  const std::vector<PhenotypeVector> raw_phenotypes =
      simulate_phenotypes(raw, sc);

  // Causal ids by original index, before any markers are dropped.
  std::vector<std::string> causal_ids;
  for (const CausalMarker& causal : sc.causal) {
    causal_ids.push_back(raw.markers[static_cast<std::size_t>(causal.index)].id);
  }

  BenchResult result;
  PreparedGenotypes prepared = prepare_simulated(raw);
  const GenotypeMatrix& X = prepared.X;
  result.constant_dropped = prepared.constant_dropped;
  result.duplicates_dropped = prepared.duplicates_dropped;
  result.markers_used = static_cast<int>(X.d());

  std::unordered_set<std::string> surviving;
  for (const MarkerMeta& meta : X.markers) surviving.insert(meta.id);
  for (const std::string& id : causal_ids) {
    if (surviving.count(id)) result.causal_ids.push_back(id);
  }

  const ShrinkageEstimate lambda = options.analytic_lambda
                                       ? estimate_lambda_analytic(X)
                                       : fixed_lambda(options.lambda);
  result.lambda_used = lambda.lambda;
  const LowRankCorrelation factor =
      LowRankCorrelation::build(X.X, lambda.lambda);

  std::vector<std::string> marker_ids;
  for (const MarkerMeta& meta : X.markers) marker_ids.push_back(meta.id);

  MethodSeries car_series, cor_series, rnd_series;
  for (const PhenotypeVector& raw_y : raw_phenotypes) {
    PhenotypeVector y;
    y.y = standardize_vector(raw_y.y);
    y.replicate = raw_y.replicate;

    const ScoreVector cor = marginal_correlations(X, y);
    const ScoreVector car = car_scores(factor, cor);
    const ScoreVector rnd = random_scores(
        X.d(),
        splitmix64(sc.seed ^ (0x524e440000000000ULL +
                              static_cast<std::uint64_t>(y.replicate))),
        marker_ids);

    const SelectionResult car_sel = select(car, options.fdr_cutoff);
    const SelectionResult cor_sel = select(cor, options.fdr_cutoff);

    car_series.push_back(MethodReplicate{
        car_sel.ranked_ids, static_cast<int>(car_sel.model_size())});
    cor_series.push_back(MethodReplicate{
        cor_sel.ranked_ids, static_cast<int>(cor_sel.model_size())});
    MethodReplicate rnd_rep;
    rnd_rep.model_size = -1;  // no self-chosen size for the random baseline
    const std::vector<int> rnd_order = rank_order(rnd);
    rnd_rep.ranking.reserve(rnd_order.size());
    for (const int j : rnd_order) {
      rnd_rep.ranking.push_back(marker_ids[static_cast<std::size_t>(j)]);
    }
    rnd_series.push_back(std::move(rnd_rep));
  }

  std::map<std::string, MethodSeries> methods;
  methods["CAR"] = std::move(car_series);
  methods["COR"] = std::move(cor_series);
  methods["RND"] = std::move(rnd_series);

  std::map<std::string, double> mafs;
  for (const MarkerMeta& meta : X.markers) mafs[meta.id] = meta.maf;

  const std::vector<int> grid =
      options.k_grid.empty() ? default_k_grid(result.markers_used)
                             : options.k_grid;
  result.report = evaluate_methods(methods, result.causal_ids, mafs, grid,
                                   options.window);
  return result;
}

}  // namespace carsel
