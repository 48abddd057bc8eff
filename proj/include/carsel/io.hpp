#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "carsel/evaluate.hpp"
#include "carsel/simulate.hpp"
#include "carsel/types.hpp"

namespace carsel {

// Stamped into every output file: tool version plus a hash of the
// canonical run configuration.
struct Provenance {
  std::string version;
  std::uint64_t config_hash = 0;
};

std::uint64_t fnv1a_hash(const std::string& text);
std::string provenance_comment(const Provenance& prov);

// --- genotype / phenotype tables --------------------------------------

// TSV with a header of marker ids (first cell names the sample column) and
// one row per sample; calls are 0/1/2 or NA.
RawGenotypes read_genotypes_tsv(const std::string& path);
void write_genotypes_tsv(const std::string& path, const RawGenotypes& raw,
                         const Provenance& prov);

// Sidecar marker metadata: columns marker_id, gene, synonymous {0,1}.
// Matching is by marker id; unknown ids are an error.
void apply_marker_metadata_tsv(const std::string& path, RawGenotypes& raw);
void write_marker_metadata_tsv(const std::string& path, const RawGenotypes& raw,
                               const Provenance& prov);

// Phenotype table: sample_id column, then phenotype columns (named "y" or
// "y<b>") and any further numeric columns as covariates.
struct PhenotypeTable {
  std::vector<std::string> samples;
  std::vector<std::string> phenotype_names;
  Eigen::MatrixXd Y;  // n x B
  std::vector<std::string> covariate_names;
  Eigen::MatrixXd Z;  // n x c, no intercept
};

PhenotypeTable read_phenotypes_tsv(const std::string& path);
void write_phenotypes_tsv(const std::string& path,
                          const std::vector<std::string>& samples,
                          const std::vector<PhenotypeVector>& phenotypes,
                          const Provenance& prov);

// --- scores and selections ---------------------------------------------

void write_scores_tsv(const std::string& path, const ScoreVector& scores,
                      const std::vector<MarkerMeta>& markers,
                      const Provenance& prov);

struct ScoreTable {
  std::vector<std::string> ranked_ids;  // rank order as stored in the file
  std::vector<double> scores;           // signed, same order
  std::string kind;
};

ScoreTable read_scores_tsv(const std::string& path);

std::string selection_to_json(const SelectionResult& result,
                              const Provenance& prov, bool include_fdr = true);
void write_selection_json(const std::string& path, const SelectionResult& result,
                          const Provenance& prov, bool include_fdr = true);

// --- scenarios and truth -----------------------------------------------

// Flat key-value scenario grammar: one "key = value" per line, '#'
// comments; repeatable keys "block = SIZE RHO", "blocks = COUNT SIZE RHO",
// "causal = INDEX BETA MAF" (1-based marker index).
SimulationScenario read_scenario(const std::string& path);
void write_scenario(const std::string& path, const SimulationScenario& sc);

std::string truth_to_json(const SimulationScenario& sc,
                          const std::vector<std::string>& causal_ids,
                          const Provenance& prov);
void write_truth_json(const std::string& path, const SimulationScenario& sc,
                      const std::vector<std::string>& causal_ids,
                      const Provenance& prov);

struct TruthTable {
  std::vector<std::string> causal_ids;
  std::map<std::string, double> causal_mafs;
};

TruthTable read_truth_json(const std::string& path);

// --- evaluation reports -------------------------------------------------

std::string report_to_json(const EvaluationReport& report,
                           const Provenance& prov);
void write_report_json(const std::string& path, const EvaluationReport& report,
                       const Provenance& prov);

// TP-curve table: one (k, method, mean_tp) row per grid point.
void write_tp_curve_tsv(const std::string& path, const EvaluationReport& report,
                        const Provenance& prov);

// Model-size / cross-TP and rare-common summary tables.
void write_summary_tsv(const std::string& path, const EvaluationReport& report,
                       const Provenance& prov);
void write_recovery_tsv(const std::string& path, const EvaluationReport& report,
                        const Provenance& prov);

}  // namespace carsel
