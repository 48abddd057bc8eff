#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "carsel/evaluate.hpp"
#include "carsel/lowrank.hpp"
#include "carsel/simulate.hpp"
#include "carsel/types.hpp"

namespace carsel {

// Rare variants can draw zero carriers at desk scale; the resulting
// constant columns cannot be standardized and carry no signal.
RawGenotypes remove_constant_markers(const RawGenotypes& raw,
                                     int* removed = nullptr);

// Genotype preprocessing applied to simulated data before scoring:
// constant columns dropped, then exact duplicates, then standardization.
struct PreparedGenotypes {
  GenotypeMatrix X;
  int constant_dropped = 0;
  int duplicates_dropped = 0;
};

PreparedGenotypes prepare_simulated(const RawGenotypes& raw);

struct BenchOptions {
  SimulationScenario scenario;
  double lambda = 0.1;
  bool analytic_lambda = false;
  double fdr_cutoff = 0.5;
  int window = 100;
  std::vector<int> k_grid;      // empty = default grid
};

struct BenchResult {
  EvaluationReport report;
  double lambda_used = 0.1;
  int markers_used = 0;
  int constant_dropped = 0;
  int duplicates_dropped = 0;
  std::vector<std::string> causal_ids;  // causal markers that survived
};

// The replicate driver: one low-rank factor shared across all B phenotype
// replicates; CAR and COR sized by local-fdr selection, RND kept as the
// reference ranking. Deterministic for a fixed scenario seed.
BenchResult run_bench(const BenchOptions& options);

std::vector<int> default_k_grid(int d);

}  // namespace carsel
