#include "carsel/evaluate.hpp"

#include <algorithm>

#include "carsel/errors.hpp"
#include "carsel/stats.hpp"

namespace carsel {

int true_positives_at_k(const std::vector<std::string>& ranking,
                        const std::unordered_set<std::string>& causal, int k) {
  if (k < 0) throw DataError("negative k");
  const int limit = std::min<int>(k, static_cast<int>(ranking.size()));
  int hits = 0;
  for (int r = 0; r < limit; ++r) {
    if (causal.count(ranking[static_cast<std::size_t>(r)])) ++hits;
  }
  return hits;
}

std::map<std::string, int> recovery_frequency(
    const MethodSeries& series, const std::unordered_set<std::string>& causal,
    int window) {
  std::map<std::string, int> counts;
  for (const std::string& id : causal) counts[id] = 0;
  for (const MethodReplicate& rep : series) {
    const int limit =
        std::min<int>(window, static_cast<int>(rep.ranking.size()));
    for (int r = 0; r < limit; ++r) {
      const std::string& id = rep.ranking[static_cast<std::size_t>(r)];
      if (causal.count(id)) ++counts[id];
    }
  }
  return counts;
}

std::optional<RareCommonSplit> rare_common_split(
    const MethodSeries& series, const std::unordered_set<std::string>& causal,
    const std::map<std::string, double>& mafs, int window,
    double rare_threshold) {
  long rare = 0, common = 0;
  for (const MethodReplicate& rep : series) {
    const int limit =
        std::min<int>(window, static_cast<int>(rep.ranking.size()));
    for (int r = 0; r < limit; ++r) {
      const std::string& id = rep.ranking[static_cast<std::size_t>(r)];
      if (!causal.count(id)) continue;
      const auto maf = mafs.find(id);
      if (maf == mafs.end()) throw DataError("no MAF recorded for '" + id + "'");
      if (maf->second < rare_threshold) {
        ++rare;
      } else {
        ++common;
      }
    }
  }
  const long total = rare + common;
  if (total == 0) return std::nullopt;
  RareCommonSplit split;
  split.rare = static_cast<double>(rare) / static_cast<double>(total);
  split.common = static_cast<double>(common) / static_cast<double>(total);
  return split;
}

std::map<std::string, std::map<std::string, double>> cross_method_tp(
    const std::map<std::string, MethodSeries>& methods,
    const std::unordered_set<std::string>& causal) {
  std::map<std::string, std::map<std::string, double>> table;
  for (const auto& [sizer, sizer_series] : methods) {
    bool has_size = false;
    for (const MethodReplicate& rep : sizer_series) {
      if (rep.model_size >= 0) has_size = true;
    }
    if (!has_size) continue;
    for (const auto& [ref, ref_series] : methods) {
      if (ref_series.size() != sizer_series.size()) {
        throw DataError("replicate counts differ between methods");
      }
      double total = 0.0;
      int used = 0;
      for (std::size_t b = 0; b < sizer_series.size(); ++b) {
        const int size = sizer_series[b].model_size;
        if (size < 0) continue;
        total += true_positives_at_k(ref_series[b].ranking, causal, size);
        ++used;
      }
      table[sizer][ref] = used > 0 ? total / used : 0.0;
    }
  }
  return table;
}

EvaluationReport evaluate_methods(
    const std::map<std::string, MethodSeries>& methods,
    const std::vector<std::string>& causal_ids,
    const std::map<std::string, double>& mafs, const std::vector<int>& k_grid,
    int window, double rare_threshold) {
  EvaluationReport report;
  report.window = window;
  report.causal_ids = causal_ids;
  report.k_grid = k_grid;
  const std::unordered_set<std::string> causal(causal_ids.begin(),
                                               causal_ids.end());

  for (const auto& [name, series] : methods) {
    if (report.replicates == 0) {
      report.replicates = static_cast<int>(series.size());
    } else if (report.replicates != static_cast<int>(series.size())) {
      throw DataError("replicate counts differ between methods");
    }

    std::vector<double> means;
    means.reserve(k_grid.size());
    for (const int k : k_grid) {
      double total = 0.0;
      for (const MethodReplicate& rep : series) {
        total += true_positives_at_k(rep.ranking, causal, k);
      }
      means.push_back(series.empty() ? 0.0 : total / static_cast<double>(series.size()));
    }
    report.tp_at_k[name] = std::move(means);

    std::vector<double> sizes;
    double tp_own = 0.0;
    for (const MethodReplicate& rep : series) {
      if (rep.model_size < 0) continue;
      sizes.push_back(static_cast<double>(rep.model_size));
      tp_own += true_positives_at_k(rep.ranking, causal, rep.model_size);
    }
    if (!sizes.empty()) {
      report.model_size[name] =
          ModelSizeSummary{median(sizes), interquartile_range(sizes)};
      report.tp_at_own_size[name] = tp_own / static_cast<double>(sizes.size());
    }

    report.recovery[name] = recovery_frequency(series, causal, window);
    report.rare_common[name] =
        rare_common_split(series, causal, mafs, window, rare_threshold);
  }
  report.cross_tp = cross_method_tp(methods, causal);
  return report;
}

}  // namespace carsel
