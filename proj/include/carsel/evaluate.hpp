#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "carsel/types.hpp"

namespace carsel {

// One replicate of one method: the full ranking plus the model size that
// method chose for itself. model_size < 0 means the method has no own
// size (the random baseline) and only contributes rankings.
struct MethodReplicate {
  std::vector<std::string> ranking;
  int model_size = -1;
};

using MethodSeries = std::vector<MethodReplicate>;  // indexed by replicate

int true_positives_at_k(const std::vector<std::string>& ranking,
                        const std::unordered_set<std::string>& causal, int k);

// Replicates in which each causal marker appears among the top `window`.
std::map<std::string, int> recovery_frequency(
    const MethodSeries& series, const std::unordered_set<std::string>& causal,
    int window = 100);

struct RareCommonSplit {
  double rare = 0.0;    // proportion with MAF below the rare threshold
  double common = 0.0;
};

// Proportions among true-positive occurrences in the top `window`,
// pooled over replicates; absent when no true positive ever appears.
std::optional<RareCommonSplit> rare_common_split(
    const MethodSeries& series, const std::unordered_set<std::string>& causal,
    const std::map<std::string, double>& mafs, int window = 100,
    double rare_threshold = 0.01);

// Mean true positives of each reference ranking truncated at each sizing
// method's model size (row: sizing method, column: reference ranking).
std::map<std::string, std::map<std::string, double>> cross_method_tp(
    const std::map<std::string, MethodSeries>& methods,
    const std::unordered_set<std::string>& causal);

struct ModelSizeSummary {
  double median = 0.0;
  double iqr = 0.0;
};

struct EvaluationReport {
  int replicates = 0;
  int window = 100;
  std::vector<std::string> causal_ids;
  std::vector<int> k_grid;
  std::map<std::string, std::vector<double>> tp_at_k;  // mean TP per k
  std::map<std::string, ModelSizeSummary> model_size;
  std::map<std::string, double> tp_at_own_size;
  std::map<std::string, std::map<std::string, double>> cross_tp;
  std::map<std::string, std::map<std::string, int>> recovery;
  std::map<std::string, std::optional<RareCommonSplit>> rare_common;
};

EvaluationReport evaluate_methods(
    const std::map<std::string, MethodSeries>& methods,
    const std::vector<std::string>& causal_ids,
    const std::map<std::string, double>& mafs, const std::vector<int>& k_grid,
    int window = 100, double rare_threshold = 0.01);

}  // namespace carsel
