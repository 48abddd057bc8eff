#include "carsel/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "carsel/errors.hpp"
#include "carsel/scores.hpp"

namespace carsel {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r') {
    fields.back().pop_back();
  }
  return fields;
}

double parse_double(const std::string& text, const std::string& path, int line,
                    std::size_t column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw DataError(path + ":" + std::to_string(line) + ": column " +
                    std::to_string(column + 1) + ": expected a number, got '" +
                    text + "'");
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  return out;
}

bool is_comment_or_blank(const std::string& line) {
  for (const char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const char c : text) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string provenance_comment(const Provenance& prov) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(prov.config_hash));
  return "# carsel " + prov.version + " config=" + buf;
}

// --- genotypes -----------------------------------------------------------

RawGenotypes read_genotypes_tsv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!is_comment_or_blank(line)) {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw DataError(path + ": empty genotype file");
  const std::vector<std::string> header = split_tabs(line);
  if (header.size() < 2) {
    throw DataError(path + ":" + std::to_string(lineno) +
                    ": header needs a sample column and at least one marker");
  }
  RawGenotypes raw;
  const std::size_t d = header.size() - 1;
  raw.markers.resize(d);
  for (std::size_t j = 0; j < d; ++j) raw.markers[j].id = header[j + 1];

  std::vector<std::int8_t> calls;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    const std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != header.size()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(header.size()) + " columns, got " +
                      std::to_string(fields.size()));
    }
    raw.samples.push_back(fields[0]);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      const std::string& f = fields[j];
      if (f == "NA") {
        calls.push_back(RawGenotypes::kMissing);
      } else if (f == "0" || f == "1" || f == "2") {
        calls.push_back(static_cast<std::int8_t>(f[0] - '0'));
      } else {
        throw DataError(path + ":" + std::to_string(lineno) + ": column " +
                        std::to_string(j + 1) + ": call must be 0, 1, 2 or NA, got '" +
                        f + "'");
      }
    }
  }
  const Eigen::Index n = static_cast<Eigen::Index>(raw.samples.size());
  if (n == 0) throw DataError(path + ": no sample rows");
  raw.calls.resize(n, static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d); ++j) {
      raw.calls(i, j) = calls[static_cast<std::size_t>(i) * d +
                              static_cast<std::size_t>(j)];
    }
  }
  return raw;
}

void write_genotypes_tsv(const std::string& path, const RawGenotypes& raw,
                         const Provenance& prov) {
  std::ofstream out = open_output(path);
  out << provenance_comment(prov) << '\n';
  out << "sample_id";
  for (const MarkerRecord& m : raw.markers) out << '\t' << m.id;
  out << '\n';
  for (Eigen::Index i = 0; i < raw.n(); ++i) {
    out << raw.samples[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < raw.d(); ++j) {
      const std::int8_t c = raw.calls(i, j);
      if (c == RawGenotypes::kMissing) {
        out << "\tNA";
      } else {
        out << '\t' << static_cast<int>(c);
      }
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

void apply_marker_metadata_tsv(const std::string& path, RawGenotypes& raw) {
  std::ifstream in = open_input(path);
  std::map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < raw.markers.size(); ++j) {
    index[raw.markers[j].id] = j;
  }
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    const std::vector<std::string> fields = split_tabs(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() < 3 || fields[0] != "marker_id") {
        throw DataError(path + ":" + std::to_string(lineno) +
                        ": expected header 'marker_id\tgene\tsynonymous'");
      }
      continue;
    }
    if (fields.size() < 3) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected 3 columns");
    }
    const auto it = index.find(fields[0]);
    if (it == index.end()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": marker '" +
                      fields[0] + "' not present in the genotype file");
    }
    raw.markers[it->second].gene = fields[1];
    if (fields[2] == "0") {
      raw.markers[it->second].synonymous = false;
    } else if (fields[2] == "1") {
      raw.markers[it->second].synonymous = true;
    } else {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": column 3: synonymous flag must be 0 or 1");
    }
  }
}

void write_marker_metadata_tsv(const std::string& path, const RawGenotypes& raw,
                               const Provenance& prov) {
  std::ofstream out = open_output(path);
  out << provenance_comment(prov) << '\n';
  out << "marker_id\tgene\tsynonymous\n";
  for (const MarkerRecord& m : raw.markers) {
    out << m.id << '\t' << (m.gene.empty() ? "-" : m.gene) << '\t'
        << (m.synonymous ? 1 : 0) << '\n';
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

// --- phenotypes ----------------------------------------------------------

namespace {

bool is_phenotype_column(const std::string& name) {
  if (name == "y") return true;
  if (name.size() < 2 || name[0] != 'y') return false;
  for (std::size_t i = 1; i < name.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(name[i]))) return false;
  }
  return true;
}

}  // namespace

PhenotypeTable read_phenotypes_tsv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!is_comment_or_blank(line)) {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw DataError(path + ": empty phenotype file");
  const std::vector<std::string> header = split_tabs(line);
  if (header.size() < 2) {
    throw DataError(path + ":" + std::to_string(lineno) +
                    ": need sample_id plus at least one phenotype column");
  }

  PhenotypeTable table;
  std::vector<std::size_t> pheno_cols, covar_cols;
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (is_phenotype_column(header[j])) {
      pheno_cols.push_back(j);
      table.phenotype_names.push_back(header[j]);
    } else {
      covar_cols.push_back(j);
      table.covariate_names.push_back(header[j]);
    }
  }
  if (pheno_cols.empty()) {
    throw DataError(path + ": no phenotype column (named 'y' or 'y<b>') found");
  }

  std::vector<double> ys, zs;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    const std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != header.size()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(header.size()) + " columns, got " +
                      std::to_string(fields.size()));
    }
    table.samples.push_back(fields[0]);
    for (const std::size_t j : pheno_cols) {
      ys.push_back(parse_double(fields[j], path, lineno, j));
    }
    for (const std::size_t j : covar_cols) {
      zs.push_back(parse_double(fields[j], path, lineno, j));
    }
  }
  const Eigen::Index n = static_cast<Eigen::Index>(table.samples.size());
  if (n == 0) throw DataError(path + ": no sample rows");
  table.Y.resize(n, static_cast<Eigen::Index>(pheno_cols.size()));
  table.Z.resize(n, static_cast<Eigen::Index>(covar_cols.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index b = 0; b < table.Y.cols(); ++b) {
      table.Y(i, b) = ys[static_cast<std::size_t>(i) * pheno_cols.size() +
                         static_cast<std::size_t>(b)];
    }
    for (Eigen::Index c = 0; c < table.Z.cols(); ++c) {
      table.Z(i, c) = zs[static_cast<std::size_t>(i) * covar_cols.size() +
                         static_cast<std::size_t>(c)];
    }
  }
  return table;
}

void write_phenotypes_tsv(const std::string& path,
                          const std::vector<std::string>& samples,
                          const std::vector<PhenotypeVector>& phenotypes,
                          const Provenance& prov) {
  if (phenotypes.empty()) throw DataError("no phenotypes to write");
  std::ofstream out = open_output(path);
  out << provenance_comment(prov) << '\n';
  out << "sample_id";
  for (const PhenotypeVector& p : phenotypes) out << "\ty" << p.replicate;
  out << '\n';
  const Eigen::Index n = phenotypes.front().y.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    out << samples[static_cast<std::size_t>(i)];
    for (const PhenotypeVector& p : phenotypes) {
      out << '\t' << fmt_double(p.y[i]);
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

// --- scores --------------------------------------------------------------

void write_scores_tsv(const std::string& path, const ScoreVector& scores,
                      const std::vector<MarkerMeta>& markers,
                      const Provenance& prov) {
  std::ofstream out = open_output(path);
  out << provenance_comment(prov) << '\n';
  out << "rank\tmarker_id\tgene\tscore\tabs_score\tkind\tlambda\n";
  const std::vector<int> order = rank_order(scores);
  const std::string lambda =
      scores.lambda_used ? fmt_double(*scores.lambda_used) : std::string("-");
  for (std::size_t r = 0; r < order.size(); ++r) {
    const int j = order[r];
    const std::string gene =
        markers.empty() ? std::string("-")
                        : (markers[static_cast<std::size_t>(j)].gene.empty()
                               ? std::string("-")
                               : markers[static_cast<std::size_t>(j)].gene);
    out << (r + 1) << '\t' << scores.marker_ids[static_cast<std::size_t>(j)]
        << '\t' << gene << '\t' << fmt_double(scores.values[j]) << '\t'
        << fmt_double(std::abs(scores.values[j])) << '\t'
        << score_kind_name(scores.kind) << '\t' << lambda << '\n';
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

ScoreTable read_scores_tsv(const std::string& path) {
  std::ifstream in = open_input(path);
  ScoreTable table;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    const std::vector<std::string> fields = split_tabs(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() < 6 || fields[0] != "rank") {
        throw DataError(path + ":" + std::to_string(lineno) +
                        ": not a score table (expected 'rank' header)");
      }
      continue;
    }
    if (fields.size() < 6) {
      throw DataError(path + ":" + std::to_string(lineno) + ": short row");
    }
    table.ranked_ids.push_back(fields[1]);
    table.scores.push_back(parse_double(fields[3], path, lineno, 3));
    table.kind = fields[5];
  }
  if (table.ranked_ids.empty()) throw DataError(path + ": no score rows");
  return table;
}

std::string selection_to_json(const SelectionResult& result,
                              const Provenance& prov, bool include_fdr) {
  json doc;
  doc["tool"] = {{"name", "carsel"},
                 {"version", prov.version},
                 {"config", provenance_comment(prov).substr(2)}};
  if (std::isfinite(result.cutoff)) doc["cutoff"] = result.cutoff;
  if (std::isfinite(result.eta0)) doc["eta0"] = result.eta0;
  if (std::isfinite(result.null_scale)) doc["null_scale"] = result.null_scale;
  doc["model_size"] = result.model_size();
  doc["selected"] = result.selected;
  if (include_fdr && !result.local_fdr.empty()) {
    doc["ranking"] = result.ranked_ids;
    doc["fdr"] = result.local_fdr;
  }
  return doc.dump(2);
}

void write_selection_json(const std::string& path, const SelectionResult& result,
                          const Provenance& prov, bool include_fdr) {
  std::ofstream out = open_output(path);
  out << selection_to_json(result, prov, include_fdr) << '\n';
  if (!out) throw DataError("failed writing '" + path + "'");
}

// --- scenarios -----------------------------------------------------------

SimulationScenario read_scenario(const std::string& path) {
  std::ifstream in = open_input(path);
  SimulationScenario sc;
  sc.blocks.clear();
  sc.causal.clear();
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw DataError(path + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    auto trim = [](std::string s) {
      const auto from = s.find_first_not_of(" \t\r");
      const auto to = s.find_last_not_of(" \t\r");
      return from == std::string::npos ? std::string() : s.substr(from, to - from + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::istringstream vs(value);
    if (key == "name") {
      sc.name = value;
      continue;
    } else if (key == "n") {
      if (!(vs >> sc.n)) fail("bad n");
    } else if (key == "d") {
      if (!(vs >> sc.d)) fail("bad d");
    } else if (key == "heritability" || key == "h2") {
      if (!(vs >> sc.heritability)) fail("bad heritability");
    } else if (key == "replicates") {
      if (!(vs >> sc.replicates)) fail("bad replicates");
    } else if (key == "seed") {
      if (!(vs >> sc.seed)) fail("bad seed");
    } else if (key == "background_maf") {
      if (!(vs >> sc.background_maf_lo >> sc.background_maf_hi)) {
        fail("background_maf needs 'lo hi'");
      }
    } else if (key == "block") {
      LdBlock block;
      if (!(vs >> block.size >> block.rho)) fail("block needs 'size rho'");
      sc.blocks.push_back(block);
    } else if (key == "blocks") {
      int count = 0;
      LdBlock block;
      if (!(vs >> count >> block.size >> block.rho) || count < 1) {
        fail("blocks needs 'count size rho'");
      }
      for (int i = 0; i < count; ++i) sc.blocks.push_back(block);
    } else if (key == "causal") {
      CausalMarker causal;
      int one_based = 0;
      if (!(vs >> one_based >> causal.beta >> causal.maf) || one_based < 1) {
        fail("causal needs 'index beta maf' with a 1-based index");
      }
      causal.index = one_based - 1;
      sc.causal.push_back(causal);
    } else {
      fail("unknown key '" + key + "'");
    }
    std::string extra;
    if (vs >> extra) fail("trailing content '" + extra + "'");
  }
  validate_scenario(sc);
  return sc;
}

void write_scenario(const std::string& path, const SimulationScenario& sc) {
  std::ofstream out = open_output(path);
  out << "# carsel scenario\n";
  out << "name = " << sc.name << '\n';
  out << "n = " << sc.n << '\n';
  out << "d = " << sc.d << '\n';
  out << "heritability = " << fmt_double(sc.heritability) << '\n';
  out << "replicates = " << sc.replicates << '\n';
  out << "seed = " << sc.seed << '\n';
  out << "background_maf = " << fmt_double(sc.background_maf_lo) << ' '
      << fmt_double(sc.background_maf_hi) << '\n';
  for (const LdBlock& block : sc.blocks) {
    out << "block = " << block.size << ' ' << fmt_double(block.rho) << '\n';
  }
  for (const CausalMarker& causal : sc.causal) {
    out << "causal = " << (causal.index + 1) << ' ' << fmt_double(causal.beta)
        << ' ' << fmt_double(causal.maf) << '\n';
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::string truth_to_json(const SimulationScenario& sc,
                          const std::vector<std::string>& causal_ids,
                          const Provenance& prov) {
  if (causal_ids.size() != sc.causal.size()) {
    throw DataError("causal id count does not match the scenario");
  }
  json doc;
  doc["tool"] = {{"name", "carsel"},
                 {"version", prov.version},
                 {"config", provenance_comment(prov).substr(2)}};
  doc["scenario"] = sc.name;
  doc["seed"] = sc.seed;
  doc["heritability"] = sc.heritability;
  doc["replicates"] = sc.replicates;
  json causal = json::array();
  for (std::size_t i = 0; i < sc.causal.size(); ++i) {
    causal.push_back({{"id", causal_ids[i]},
                      {"index", sc.causal[i].index + 1},
                      {"beta", sc.causal[i].beta},
                      {"maf", sc.causal[i].maf}});
  }
  doc["causal"] = causal;
  return doc.dump(2);
}

void write_truth_json(const std::string& path, const SimulationScenario& sc,
                      const std::vector<std::string>& causal_ids,
                      const Provenance& prov) {
  std::ofstream out = open_output(path);
  out << truth_to_json(sc, causal_ids, prov) << '\n';
  if (!out) throw DataError("failed writing '" + path + "'");
}

TruthTable read_truth_json(const std::string& path) {
  std::ifstream in = open_input(path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  TruthTable truth;
  if (!doc.contains("causal") || !doc["causal"].is_array()) {
    throw DataError(path + ": missing 'causal' array");
  }
  for (const json& entry : doc["causal"]) {
    const std::string id = entry.at("id").get<std::string>();
    truth.causal_ids.push_back(id);
    truth.causal_mafs[id] = entry.at("maf").get<double>();
  }
  return truth;
}

// --- reports -------------------------------------------------------------

namespace {

json report_to_json_doc(const EvaluationReport& report, const Provenance& prov) {
  json doc;
  doc["tool"] = {{"name", "carsel"},
                 {"version", prov.version},
                 {"config", provenance_comment(prov).substr(2)}};
  doc["replicates"] = report.replicates;
  doc["window"] = report.window;
  doc["causal"] = report.causal_ids;
  doc["k_grid"] = report.k_grid;
  doc["tp_at_k"] = report.tp_at_k;
  json sizes = json::object();
  for (const auto& [method, summary] : report.model_size) {
    sizes[method] = {{"median", summary.median}, {"iqr", summary.iqr}};
  }
  doc["model_size"] = sizes;
  doc["tp_at_own_size"] = report.tp_at_own_size;
  doc["cross_tp"] = report.cross_tp;
  doc["recovery"] = report.recovery;
  json rc = json::object();
  for (const auto& [method, split] : report.rare_common) {
    if (split) {
      rc[method] = {{"rare", split->rare}, {"common", split->common}};
    } else {
      rc[method] = nullptr;
    }
  }
  doc["rare_common"] = rc;
  return doc;
}

}  // namespace

std::string report_to_json(const EvaluationReport& report,
                           const Provenance& prov) {
  return report_to_json_doc(report, prov).dump(2);
}

void write_report_json(const std::string& path, const EvaluationReport& report,
                       const Provenance& prov) {
  std::ofstream out = open_output(path);
  out << report_to_json(report, prov) << '\n';
  if (!out) throw DataError("failed writing '" + path + "'");
}

void write_tp_curve_tsv(const std::string& path, const EvaluationReport& report,
                        const Provenance& prov) {
  std::ofstream out = open_output(path);
  out << provenance_comment(prov) << '\n';
  out << "k\tmethod\tmean_tp\n";
  for (const auto& [method, curve] : report.tp_at_k) {
    for (std::size_t i = 0; i < curve.size(); ++i) {
      out << report.k_grid[i] << '\t' << method << '\t' << fmt_double(curve[i])
          << '\n';
    }
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

void write_summary_tsv(const std::string& path, const EvaluationReport& report,
                       const Provenance& prov) {
  std::ofstream out = open_output(path);
  out << provenance_comment(prov) << '\n';
  out << "method\tmodel_size_median\tmodel_size_iqr\ttp_at_own_size";
  std::vector<std::string> refs;
  for (const auto& [method, curve] : report.tp_at_k) refs.push_back(method);
  for (const std::string& ref : refs) out << "\ttp_" << ref;
  out << "\trare\tcommon\n";
  for (const auto& [method, summary] : report.model_size) {
    out << method << '\t' << fmt_double(summary.median) << '\t'
        << fmt_double(summary.iqr) << '\t'
        << fmt_double(report.tp_at_own_size.at(method));
    for (const std::string& ref : refs) {
      const auto row = report.cross_tp.find(method);
      if (row != report.cross_tp.end() && row->second.count(ref)) {
        out << '\t' << fmt_double(row->second.at(ref));
      } else {
        out << "\t-";
      }
    }
    const auto rc = report.rare_common.find(method);
    if (rc != report.rare_common.end() && rc->second) {
      out << '\t' << fmt_double(rc->second->rare) << '\t'
          << fmt_double(rc->second->common);
    } else {
      out << "\t-\t-";
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

void write_recovery_tsv(const std::string& path, const EvaluationReport& report,
                        const Provenance& prov) {
  std::ofstream out = open_output(path);
  out << provenance_comment(prov) << '\n';
  out << "causal_id";
  std::vector<std::string> methods;
  for (const auto& [method, counts] : report.recovery) methods.push_back(method);
  for (const std::string& m : methods) out << '\t' << m;
  out << '\n';
  for (const std::string& id : report.causal_ids) {
    out << id;
    for (const std::string& m : methods) {
      const auto& counts = report.recovery.at(m);
      const auto it = counts.find(id);
      out << '\t' << (it == counts.end() ? 0 : it->second);
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

}  // namespace carsel
