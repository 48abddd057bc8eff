#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "carsel/errors.hpp"
#include "carsel/genomatrix.hpp"
#include "carsel/io.hpp"
#include "carsel/kernels.hpp"
#include "carsel/lowrank.hpp"
#include "carsel/pipeline.hpp"
#include "carsel/scores.hpp"
#include "carsel/selection.hpp"
#include "carsel/simulate.hpp"
#include "carsel/version.hpp"

namespace {

using namespace carsel;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct LambdaChoice {
  bool analytic = false;
  double value = 0.1;
};

LambdaChoice parse_lambda(const std::string& text) {
  LambdaChoice choice;
  if (text == "analytic") {
    choice.analytic = true;
    return choice;
  }
  try {
    std::size_t used = 0;
    choice.value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw CLI::ValidationError("--lambda expects a number in (0,1] or 'analytic'");
  }
  if (!(choice.value > 0.0) || choice.value > 1.0) {
    throw CLI::ValidationError("--lambda must lie in (0, 1]");
  }
  return choice;
}

std::vector<int> parse_k_grid(const std::string& text) {
  std::vector<int> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    grid.push_back(std::stoi(item));
    if (grid.back() < 1) throw CLI::ValidationError("--k-grid entries must be >= 1");
  }
  if (grid.empty()) throw CLI::ValidationError("--k-grid is empty");
  return grid;
}

Provenance make_provenance(const std::string& canonical_config) {
  Provenance prov;
  prov.version = kVersion;
  prov.config_hash = fnv1a_hash(canonical_config);
  return prov;
}

// Shared ingestion for score/select: genotypes (+ optional metadata),
// dedup/filter, standardize, phenotype residualization.
struct ScoreInputs {
  std::string genotypes;
  std::string metadata;
  std::string phenotype;
  std::string method = "car";
  std::string lambda_text = "0.1";
  std::string factor_cache;  // LRC1 file reused across replicates
  int replicate = 1;
  bool drop_synonymous = false;
  std::uint64_t seed = 1;
};

struct LoadedData {
  GenotypeMatrix X;
  PhenotypeVector y;          // metric phenotype (standardized residuals)
  std::vector<int> labels;    // only filled for CAT
};

LoadedData load_for_scoring(const ScoreInputs& in, bool want_labels) {
  RawGenotypes raw = read_genotypes_tsv(in.genotypes);
  if (!in.metadata.empty()) apply_marker_metadata_tsv(in.metadata, raw);
  FilterResult filtered = deduplicate_and_filter(raw, in.drop_synonymous);
  if (filtered.kept.d() == 0) throw DataError("no markers left after filtering");
  const Eigen::MatrixXd codes = encode_additive(filtered.kept);

  LoadedData data;
  data.X = standardize_columns(codes, std::move(filtered.kept.markers),
                               std::move(filtered.kept.samples));

  const PhenotypeTable table = read_phenotypes_tsv(in.phenotype);
  if (table.samples != data.X.samples) {
    throw DataError("phenotype sample ids do not match the genotype file");
  }
  std::string wanted = table.phenotype_names.size() == 1
                           ? table.phenotype_names.front()
                           : "y" + std::to_string(in.replicate);
  Eigen::Index col = -1;
  for (std::size_t c = 0; c < table.phenotype_names.size(); ++c) {
    if (table.phenotype_names[c] == wanted ||
        (table.phenotype_names[c] == "y" && in.replicate == 1)) {
      col = static_cast<Eigen::Index>(c);
      break;
    }
  }
  if (col < 0) {
    throw DataError("phenotype column '" + wanted + "' not found in " +
                    in.phenotype);
  }
  const Eigen::VectorXd y_raw = table.Y.col(col);

  if (want_labels) {
    data.labels.reserve(static_cast<std::size_t>(y_raw.size()));
    for (Eigen::Index i = 0; i < y_raw.size(); ++i) {
      if (y_raw[i] == 0.0) {
        data.labels.push_back(0);
      } else if (y_raw[i] == 1.0) {
        data.labels.push_back(1);
      } else {
        throw DataError("CAT/TSCORE phenotypes must be 0/1 labels");
      }
    }
    data.y.y = y_raw;
    data.y.replicate = in.replicate;
    return data;
  }

  // Metric response: residualize on any covariate columns plus intercept.
  CovariateMatrix cov;
  cov.Z.resize(y_raw.size(), table.Z.cols() + 1);
  cov.Z.col(0).setOnes();
  if (table.Z.cols() > 0) cov.Z.rightCols(table.Z.cols()) = table.Z;
  data.y = residualize_phenotype(y_raw, cov, in.replicate);
  return data;
}

ScoreVector compute_scores(const ScoreInputs& in, const LoadedData& data) {
  const LambdaChoice lambda = parse_lambda(in.lambda_text);
  if (in.method == "cor") {
    return marginal_correlations(data.X, data.y);
  }
  if (in.method == "car") {
    const ShrinkageEstimate est = lambda.analytic
                                      ? estimate_lambda_analytic(data.X)
                                      : fixed_lambda(lambda.value);
    if (!in.factor_cache.empty()) {
      if (std::filesystem::exists(in.factor_cache)) {
        const LowRankCorrelation cached =
            LowRankCorrelation::load_file(in.factor_cache);
        if (cached.dim() == data.X.d() && cached.lambda() == est.lambda) {
          return car_scores(cached, marginal_correlations(data.X, data.y));
        }
        std::cerr << "carsel: factor cache does not match (lambda or d); "
                     "rebuilding\n";
      }
      const LowRankCorrelation factor =
          LowRankCorrelation::build(data.X.X, est.lambda);
      factor.save_file(in.factor_cache);
      return car_scores(factor, marginal_correlations(data.X, data.y));
    }
    return car_scores(data.X, data.y, est);
  }
  if (in.method == "cat") {
    const ShrinkageEstimate est = lambda.analytic
                                      ? estimate_lambda_analytic(data.X)
                                      : fixed_lambda(lambda.value);
    return cat_scores(data.X, data.labels, est);
  }
  if (in.method == "tscore") {
    return t_scores(data.X, data.labels);
  }
  if (in.method == "rnd") {
    std::vector<std::string> ids;
    for (const MarkerMeta& m : data.X.markers) ids.push_back(m.id);
    return random_scores(data.X.d(), in.seed, std::move(ids));
  }
  throw DataError("unknown method '" + in.method + "'");
}

std::string canonical_score_config(const ScoreInputs& in, const char* verb) {
  std::ostringstream oss;
  oss << verb << ";genotypes=" << in.genotypes << ";meta=" << in.metadata
      << ";phenotype=" << in.phenotype << ";method=" << in.method
      << ";lambda=" << in.lambda_text << ";replicate=" << in.replicate
      << ";drop_synonymous=" << in.drop_synonymous << ";seed=" << in.seed;
  return oss.str();
}

void add_score_options(CLI::App* cmd, ScoreInputs* in) {
  cmd->add_option("--genotypes", in->genotypes, "Genotype TSV")->required();
  cmd->add_option("--phenotype", in->phenotype, "Phenotype TSV")->required();
  cmd->add_option("--meta", in->metadata, "Marker metadata TSV");
  cmd->add_option("--method", in->method, "car | cat | cor | tscore | rnd")
      ->check(CLI::IsMember({"car", "cat", "cor", "tscore", "rnd"}));
  cmd->add_option("--lambda", in->lambda_text,
                  "Shrinkage intensity in (0,1] or 'analytic'");
  cmd->add_option("--replicate", in->replicate,
                  "Phenotype replicate column (y<b>)");
  cmd->add_flag("--drop-synonymous", in->drop_synonymous,
                "Remove synonymous-flagged markers");
  cmd->add_option("--seed", in->seed, "Seed for the rnd method");
  cmd->add_option("--factor-cache", in->factor_cache,
                  "LRC1 factor cache file (car method); built when absent");
}

SimulationScenario resolve_scenario(const std::string& preset_name,
                                    const std::string& scenario_file,
                                    std::optional<int> n, std::optional<int> d,
                                    std::optional<int> replicates,
                                    std::optional<std::uint64_t> seed) {
  if (preset_name.empty() == scenario_file.empty()) {
    throw CLI::ValidationError("give exactly one of --preset or --scenario");
  }
  SimulationScenario sc = preset_name.empty() ? read_scenario(scenario_file)
                                              : preset_scenario(preset_name);
  if (n) sc.n = *n;
  if (replicates) sc.replicates = *replicates;
  if (seed) sc.seed = *seed;
  if (d && *d != sc.d) {
    // Shrinking a preset trims the block layout and any causal markers that
    // no longer fit; growing it adds independent background markers.
    sc.d = *d;
    std::vector<LdBlock> blocks;
    int covered = 0;
    for (const LdBlock& block : sc.blocks) {
      if (covered + block.size > sc.d) break;
      blocks.push_back(block);
      covered += block.size;
    }
    sc.blocks = std::move(blocks);
    std::vector<CausalMarker> causal;
    for (const CausalMarker& marker : sc.causal) {
      if (marker.index < sc.d) causal.push_back(marker);
    }
    sc.causal = std::move(causal);
  }
  validate_scenario(sc);
  return sc;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Shrinkage CAR/CAT score SNP selection"};
  app.set_version_flag("--version", std::string("carsel ") + kVersion);
  app.require_subcommand(1);
  app.fallthrough();  // --threads may follow the subcommand
  int threads = 0;
  app.add_option("--threads", threads,
                 "Worker threads (0 = CARSEL_THREADS env or hardware)");

  // ---- score ----
  auto* score_cmd = app.add_subcommand("score", "Rank markers by one method");
  ScoreInputs score_in;
  std::string score_out;
  add_score_options(score_cmd, &score_in);
  score_cmd->add_option("--out", score_out, "Output score TSV")->required();

  // ---- select ----
  auto* select_cmd =
      app.add_subcommand("select", "Score and threshold by local fdr");
  ScoreInputs select_in;
  std::string select_out, select_scores_file;
  double cutoff = 0.5;
  int top_k = 0;
  bool no_fdr_dump = false;
  add_score_options(select_cmd, &select_in);
  for (const std::string opt : {"--genotypes", "--phenotype"}) {
    select_cmd->get_option(opt)->required(false);
  }
  select_cmd->add_option("--scores", select_scores_file,
                         "Select from an existing score TSV instead of scoring");
  select_cmd->add_option("--cutoff", cutoff, "Local fdr cutoff (default 0.5)");
  select_cmd->add_option("--top-k", top_k, "Fixed-size selection instead of fdr");
  select_cmd->add_flag("--no-fdr", no_fdr_dump, "Omit fdr values from the JSON");
  select_cmd->add_option("--out", select_out, "Output selection JSON")->required();

  // ---- simulate ----
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic study");
  std::string sim_preset, sim_scenario, sim_prefix;
  std::optional<int> sim_n, sim_d, sim_B;
  std::optional<std::uint64_t> sim_seed;
  sim_cmd->add_option("--preset", sim_preset, "q1like | q2like | q4like");
  sim_cmd->add_option("--scenario", sim_scenario, "Scenario file");
  sim_cmd->add_option("--n", sim_n, "Override sample count");
  sim_cmd->add_option("--d", sim_d, "Override marker count");
  sim_cmd->add_option("--replicates", sim_B, "Override replicate count");
  sim_cmd->add_option("--seed", sim_seed, "Override seed");
  sim_cmd->add_option("--out-prefix", sim_prefix, "Output path prefix")->required();

  // ---- evaluate ----
  auto* eval_cmd =
      app.add_subcommand("evaluate", "Score rankings against known causal sets");
  std::vector<std::string> eval_scores;
  std::string eval_truth, eval_out, eval_curve, eval_summary, eval_recovery;
  std::string eval_k_grid;
  int eval_window = 100;
  double eval_cutoff = 0.5;
  eval_cmd->add_option("scores", eval_scores, "Score TSV files (one per replicate)")
      ->required();
  eval_cmd->add_option("--truth", eval_truth, "Truth JSON from simulate")->required();
  eval_cmd->add_option("--window", eval_window, "Recovery window (default 100)");
  eval_cmd->add_option("--fdr-cutoff", eval_cutoff,
                       "Cutoff used to size each non-RND method");
  eval_cmd->add_option("--k-grid", eval_k_grid, "Comma-separated k values");
  eval_cmd->add_option("--out", eval_out, "Report JSON")->required();
  eval_cmd->add_option("--tp-curve", eval_curve, "TP-curve TSV");
  eval_cmd->add_option("--summary", eval_summary, "Model-size summary TSV");
  eval_cmd->add_option("--recovery", eval_recovery, "Recovery-count TSV");

  // ---- bench ----
  auto* bench_cmd =
      app.add_subcommand("bench", "Simulate, score, select and evaluate");
  std::string bench_preset, bench_scenario, bench_out, bench_curve,
      bench_summary, bench_recovery, bench_k_grid;
  std::string bench_lambda = "0.1";
  std::optional<int> bench_n, bench_d, bench_B;
  std::optional<std::uint64_t> bench_seed;
  double bench_cutoff = 0.5;
  int bench_window = 100;
  bench_cmd->add_option("--preset", bench_preset, "q1like | q2like | q4like");
  bench_cmd->add_option("--scenario", bench_scenario, "Scenario file");
  bench_cmd->add_option("--n", bench_n, "Override sample count");
  bench_cmd->add_option("--d", bench_d, "Override marker count");
  bench_cmd->add_option("--replicates", bench_B, "Override replicate count");
  bench_cmd->add_option("--seed", bench_seed, "Override seed");
  bench_cmd->add_option("--lambda", bench_lambda,
                        "Shrinkage intensity or 'analytic'");
  bench_cmd->add_option("--fdr-cutoff", bench_cutoff, "Selection cutoff");
  bench_cmd->add_option("--window", bench_window, "Recovery window");
  bench_cmd->add_option("--k-grid", bench_k_grid, "Comma-separated k values");
  bench_cmd->add_option("--out", bench_out, "Report JSON")->required();
  bench_cmd->add_option("--tp-curve", bench_curve, "TP-curve TSV");
  bench_cmd->add_option("--summary", bench_summary, "Summary TSV");
  bench_cmd->add_option("--recovery", bench_recovery, "Recovery TSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  set_thread_count(threads);

  if (score_cmd->parsed()) {
    const LoadedData data = load_for_scoring(
        score_in, score_in.method == "cat" || score_in.method == "tscore");
    const ScoreVector scores = compute_scores(score_in, data);
    const Provenance prov =
        make_provenance(canonical_score_config(score_in, "score"));
    write_scores_tsv(score_out, scores, data.X.markers, prov);
    return kExitOk;
  }

  if (select_cmd->parsed()) {
    std::ostringstream config;
    SelectionResult result;
    if (!select_scores_file.empty()) {
      const ScoreTable table = read_scores_tsv(select_scores_file);
      ScoreVector scores;
      scores.kind = score_kind_from_name(table.kind);
      scores.marker_ids = table.ranked_ids;
      scores.values = Eigen::Map<const Eigen::VectorXd>(
          table.scores.data(), static_cast<Eigen::Index>(table.scores.size()));
      result = top_k > 0 ? select_top_k(scores, top_k) : select(scores, cutoff);
      config << "select;scores=" << select_scores_file;
    } else {
      if (select_in.genotypes.empty() || select_in.phenotype.empty()) {
        throw CLI::ValidationError(
            "select needs either --scores or --genotypes/--phenotype");
      }
      const LoadedData data = load_for_scoring(
          select_in, select_in.method == "cat" || select_in.method == "tscore");
      const ScoreVector scores = compute_scores(select_in, data);
      result = top_k > 0 ? select_top_k(scores, top_k) : select(scores, cutoff);
      config << canonical_score_config(select_in, "select");
    }
    config << ";cutoff=" << cutoff << ";top_k=" << top_k;
    write_selection_json(select_out, result, make_provenance(config.str()),
                         !no_fdr_dump);
    return kExitOk;
  }

  if (sim_cmd->parsed()) {
    const SimulationScenario sc = resolve_scenario(sim_preset, sim_scenario,
                                                   sim_n, sim_d, sim_B, sim_seed);
    std::ostringstream config;
    config << "simulate;name=" << sc.name << ";n=" << sc.n << ";d=" << sc.d
           << ";B=" << sc.replicates << ";seed=" << sc.seed;
    const Provenance prov = make_provenance(config.str());

    const RawGenotypes raw = simulate_genotypes(sc);
    const std::vector<PhenotypeVector> phenotypes = simulate_phenotypes(raw, sc);
    std::vector<std::string> causal_ids;
    for (const CausalMarker& causal : sc.causal) {
      causal_ids.push_back(raw.markers[static_cast<std::size_t>(causal.index)].id);
    }
    // Constant columns (rare variants with no carriers drawn) would make
    // the written file unusable for scoring; drop them here.
    int constant_removed = 0;
    const RawGenotypes writable = remove_constant_markers(raw, &constant_removed);
    if (constant_removed > 0) {
      std::cerr << "simulate: dropped " << constant_removed
                << " constant marker(s)\n";
    }
    write_genotypes_tsv(sim_prefix + ".genotypes.tsv", writable, prov);
    write_marker_metadata_tsv(sim_prefix + ".markers.tsv", writable, prov);
    write_phenotypes_tsv(sim_prefix + ".phenotypes.tsv", writable.samples,
                         phenotypes, prov);
    write_truth_json(sim_prefix + ".truth.json", sc, causal_ids, prov);
    write_scenario(sim_prefix + ".scenario.txt", sc);
    return kExitOk;
  }

  if (eval_cmd->parsed()) {
    const TruthTable truth = read_truth_json(eval_truth);
    std::map<std::string, MethodSeries> methods;
    for (const std::string& path : eval_scores) {
      const ScoreTable table = read_scores_tsv(path);
      MethodReplicate rep;
      rep.ranking = table.ranked_ids;
      if (table.kind == "RND") {
        rep.model_size = -1;
      } else {
        ScoreVector scores;
        scores.kind = score_kind_from_name(table.kind);
        scores.marker_ids = table.ranked_ids;
        scores.values = Eigen::Map<const Eigen::VectorXd>(
            table.scores.data(), static_cast<Eigen::Index>(table.scores.size()));
        rep.model_size = static_cast<int>(select(scores, eval_cutoff).model_size());
      }
      methods[table.kind].push_back(std::move(rep));
    }
    std::ostringstream config;
    config << "evaluate;truth=" << eval_truth << ";window=" << eval_window
           << ";cutoff=" << eval_cutoff << ";files=" << eval_scores.size();
    const Provenance prov = make_provenance(config.str());

    int max_d = 0;
    for (const auto& [name, series] : methods) {
      for (const MethodReplicate& rep : series) {
        max_d = std::max(max_d, static_cast<int>(rep.ranking.size()));
      }
    }
    const std::vector<int> grid = eval_k_grid.empty()
                                      ? default_k_grid(max_d)
                                      : parse_k_grid(eval_k_grid);
    const EvaluationReport report = evaluate_methods(
        methods, truth.causal_ids, truth.causal_mafs, grid, eval_window);
    write_report_json(eval_out, report, prov);
    if (!eval_curve.empty()) write_tp_curve_tsv(eval_curve, report, prov);
    if (!eval_summary.empty()) write_summary_tsv(eval_summary, report, prov);
    if (!eval_recovery.empty()) write_recovery_tsv(eval_recovery, report, prov);
    return kExitOk;
  }

  if (bench_cmd->parsed()) {
    BenchOptions options;
    options.scenario = resolve_scenario(bench_preset, bench_scenario, bench_n,
                                        bench_d, bench_B, bench_seed);
    const LambdaChoice lambda = parse_lambda(bench_lambda);
    options.analytic_lambda = lambda.analytic;
    options.lambda = lambda.value;
    options.fdr_cutoff = bench_cutoff;
    options.window = bench_window;
    if (!bench_k_grid.empty()) options.k_grid = parse_k_grid(bench_k_grid);

    std::ostringstream config;
    config << "bench;name=" << options.scenario.name << ";n=" << options.scenario.n
           << ";d=" << options.scenario.d << ";B=" << options.scenario.replicates
           << ";seed=" << options.scenario.seed << ";lambda=" << bench_lambda
           << ";cutoff=" << bench_cutoff << ";window=" << bench_window;
    const Provenance prov = make_provenance(config.str());

    const BenchResult result = run_bench(options);
    write_report_json(bench_out, result.report, prov);
    if (!bench_curve.empty()) write_tp_curve_tsv(bench_curve, result.report, prov);
    if (!bench_summary.empty()) write_summary_tsv(bench_summary, result.report, prov);
    if (!bench_recovery.empty()) {
      write_recovery_tsv(bench_recovery, result.report, prov);
    }
    std::cerr << "bench: d_used=" << result.markers_used
              << " constant_dropped=" << result.constant_dropped
              << " duplicates_dropped=" << result.duplicates_dropped
              << " lambda=" << result.lambda_used
              << " causal_surviving=" << result.causal_ids.size() << '\n';
    return kExitOk;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const CLI::ParseError&) {
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "carsel: data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "carsel: numerical error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "carsel: error: " << e.what() << '\n';
    return kExitNumeric;
  }
}
