#include "carsel/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "carsel/errors.hpp"
#include "carsel/kernels.hpp"
#include "carsel/rng.hpp"

namespace carsel {

namespace {

// Stream tags keeping the sub-generators of one scenario independent.
constexpr std::uint64_t kTagBackgroundMaf = 0x4d41460000000000ULL;
constexpr std::uint64_t kTagSample = 0x53414d0000000000ULL;
constexpr std::uint64_t kTagReplicate = 0x5245500000000000ULL;

struct BlockLayout {
  std::vector<int> block_of;     // -1 for unblocked markers
  std::vector<char> starts_block;
};

BlockLayout layout_blocks(const SimulationScenario& sc) {
  BlockLayout layout;
  layout.block_of.assign(static_cast<std::size_t>(sc.d), -1);
  layout.starts_block.assign(static_cast<std::size_t>(sc.d), 0);
  int next = 0;
  for (std::size_t k = 0; k < sc.blocks.size(); ++k) {
    layout.starts_block[static_cast<std::size_t>(next)] = 1;
    for (int off = 0; off < sc.blocks[k].size; ++off) {
      layout.block_of[static_cast<std::size_t>(next + off)] = static_cast<int>(k);
    }
    next += sc.blocks[k].size;
  }
  return layout;
}

}  // namespace

double inverse_normal_cdf(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw DataError("inverse normal CDF needs p in (0, 1)");
  }
  // Acklam's rational approximation.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  }
  // One Halley step against the exact CDF.
  const double err = 0.5 * std::erfc(-x / 1.4142135623730951) - p;
  const double u = err * 2.5066282746310002 * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

void validate_scenario(const SimulationScenario& sc) {
  if (sc.n < 2 || sc.d < 1) throw DataError("scenario needs n >= 2 and d >= 1");
  if (sc.replicates < 1) throw DataError("scenario needs at least 1 replicate");
  int covered = 0;
  for (const LdBlock& block : sc.blocks) {
    if (block.size < 1) throw DataError("LD block size must be positive");
    if (!(block.rho >= 0.0) || !(block.rho < 1.0)) {
      throw DataError("LD block correlation must be in [0, 1)");
    }
    covered += block.size;
  }
  if (covered > sc.d) throw DataError("LD blocks cover more markers than d");
  std::set<int> seen;
  for (const CausalMarker& causal : sc.causal) {
    if (causal.index < 0 || causal.index >= sc.d) {
      throw DataError("causal index out of range");
    }
    if (!seen.insert(causal.index).second) {
      throw DataError("duplicate causal index " + std::to_string(causal.index));
    }
    if (!(causal.maf > 0.0) || causal.maf > 0.5) {
      throw DataError("causal MAF must be in (0, 0.5]");
    }
  }
  if (!sc.causal.empty() &&
      (!(sc.heritability > 0.0) || sc.heritability > 1.0)) {
    throw DataError("heritability must be in (0, 1]");
  }
  if (!(sc.background_maf_lo > 0.0) || sc.background_maf_hi > 0.5 ||
      sc.background_maf_lo > sc.background_maf_hi) {
    throw DataError("background MAF range must sit inside (0, 0.5]");
  }
}

RawGenotypes simulate_genotypes(const SimulationScenario& sc) {
  validate_scenario(sc);
  const BlockLayout layout = layout_blocks(sc);

  // Per-marker MAF: causal values pinned by the scenario, the rest drawn
  // log-uniformly from a dedicated stream.
  std::vector<double> maf(static_cast<std::size_t>(sc.d));
  {
    Rng rng = Rng::stream(sc.seed, kTagBackgroundMaf);
    const double lo = std::log(sc.background_maf_lo);
    const double hi = std::log(sc.background_maf_hi);
    for (double& m : maf) m = std::exp(rng.uniform(lo, hi));
  }
  for (const CausalMarker& causal : sc.causal) {
    maf[static_cast<std::size_t>(causal.index)] = causal.maf;
  }
  std::vector<double> threshold(maf.size());
  for (std::size_t j = 0; j < maf.size(); ++j) {
    threshold[j] = inverse_normal_cdf(maf[j]);
  }

  RawGenotypes raw;
  raw.calls.resize(sc.n, sc.d);
  raw.samples.reserve(static_cast<std::size_t>(sc.n));
  for (int i = 0; i < sc.n; ++i) raw.samples.push_back("s" + std::to_string(i + 1));
  raw.markers.resize(static_cast<std::size_t>(sc.d));
  for (int j = 0; j < sc.d; ++j) {
    MarkerRecord& rec = raw.markers[static_cast<std::size_t>(j)];
    rec.id = "snp" + std::to_string(j + 1);
    const int blk = layout.block_of[static_cast<std::size_t>(j)];
    rec.gene = blk >= 0 ? "blk" + std::to_string(blk + 1) : "-";
    rec.synonymous = false;
  }

  // One RNG stream per sample with a fixed draw order makes the result
  // independent of the parallel schedule.
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int i = 0; i < sc.n; ++i) {
    Rng rng = Rng::stream(sc.seed, kTagSample + static_cast<std::uint64_t>(i));
    std::vector<std::int8_t> code(static_cast<std::size_t>(sc.d), 0);
    for (int hap = 0; hap < 2; ++hap) {
      double shared = 0.0;
      for (int j = 0; j < sc.d; ++j) {
        const int blk = layout.block_of[static_cast<std::size_t>(j)];
        double latent;
        if (blk >= 0) {
          if (layout.starts_block[static_cast<std::size_t>(j)]) {
            shared = rng.normal();
          }
          const double rho = sc.blocks[static_cast<std::size_t>(blk)].rho;
          latent = std::sqrt(rho) * shared + std::sqrt(1.0 - rho) * rng.normal();
        } else {
          latent = rng.normal();
        }
        if (latent < threshold[static_cast<std::size_t>(j)]) {
          code[static_cast<std::size_t>(j)] += 1;
        }
      }
    }
    for (int j = 0; j < sc.d; ++j) {
      raw.calls(i, j) = code[static_cast<std::size_t>(j)];
    }
  }
  return raw;
}

std::vector<PhenotypeVector> simulate_phenotypes(const RawGenotypes& genotypes,
                                                 const SimulationScenario& sc) {
  validate_scenario(sc);
  const Eigen::Index n = genotypes.n();
  if (n != sc.n || genotypes.d() != sc.d) {
    throw DataError("genotype dimensions do not match the scenario");
  }

  bool any_effect = false;
  Eigen::VectorXd genetic = Eigen::VectorXd::Zero(n);
  for (const CausalMarker& causal : sc.causal) {
    if (causal.beta == 0.0) continue;
    any_effect = true;
    genetic += causal.beta *
               genotypes.calls.col(causal.index).cast<double>();
  }

  double noise_sd = 1.0;
  if (any_effect) {
    const double mean = genetic.mean();
    const double var_g =
        (genetic.array() - mean).square().sum() / static_cast<double>(n - 1);
    if (var_g < 1e-12) {
      throw NumericError(
          "zero genetic variance with positive heritability: causal columns "
          "are constant in this sample");
    }
    noise_sd = std::sqrt(var_g * (1.0 - sc.heritability) / sc.heritability);
  }

  std::vector<PhenotypeVector> phenotypes(
      static_cast<std::size_t>(sc.replicates));
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int b = 1; b <= sc.replicates; ++b) {
    Rng rng = Rng::stream(sc.seed, kTagReplicate + static_cast<std::uint64_t>(b));
    Eigen::VectorXd y(n);
    if (any_effect) {
      for (Eigen::Index i = 0; i < n; ++i) {
        y[i] = genetic[i] + noise_sd * rng.normal();
      }
    } else {
      for (Eigen::Index i = 0; i < n; ++i) y[i] = rng.normal();
    }
    PhenotypeVector& pheno = phenotypes[static_cast<std::size_t>(b - 1)];
    pheno.y = std::move(y);
    pheno.replicate = b;
  }
  return phenotypes;
}

namespace {

struct AnchorSnp {
  double maf;
  double beta;
};

// Effect/MAF anchor pairs for the preset causal sets.
const AnchorSnp kQ1Anchors[] = {
    {0.011478, 0.56190},  // ARNT-like
    {0.017217, 0.74136},  // FLT1-like group
    {0.027977, 0.61830},
    {0.066714, 0.64997},
    {0.004304, 0.62223},
    {0.000717, 1.07706},  // KDR-like group
    {0.164993, 0.13573},
    {0.020803, 0.29558},
    {0.002152, 1.20645},  // VEGFA-like
    {0.000717, 1.35726},  // VEGFC-like
};

const AnchorSnp kQ2Anchors[] = {
    {0.000717, 1.01569},  // BCHE-like group
    {0.000717, 1.09484},
    {0.015782, 0.49459},  // LPL-like
    {0.002152, 0.83224},  // SIRT1-like group
    {0.002152, 0.97060},
    {0.170732, 0.24437},  // VNN1-like
    {0.098278, 0.27053},  // VNN3-like group
    {0.010043, 0.66909},
};

// Causal markers are packed gene by gene into the leading LD blocks;
// anchors first, then fillers with a comparable per-marker variance
// contribution beta^2 * 2 maf (1 - maf).
std::vector<CausalMarker> build_causal(const std::vector<int>& gene_sizes,
                                       const AnchorSnp* anchors,
                                       std::size_t n_anchors, int block_size,
                                       std::uint64_t table_seed,
                                       double filler_scale) {
  Rng rng = Rng::stream(table_seed, 0x544142ULL);
  std::vector<CausalMarker> causal;
  std::size_t next_anchor = 0;
  for (std::size_t gene = 0; gene < gene_sizes.size(); ++gene) {
    for (int slot = 0; slot < gene_sizes[gene]; ++slot) {
      CausalMarker marker;
      marker.index = static_cast<int>(gene) * block_size + slot;
      if (next_anchor < n_anchors) {
        marker.maf = anchors[next_anchor].maf;
        marker.beta = anchors[next_anchor].beta;
        ++next_anchor;
      } else {
        marker.maf = std::exp(rng.uniform(std::log(0.008), std::log(0.3)));
        const double contribution = filler_scale * (0.8 + 0.4 * rng.uniform());
        marker.beta =
            contribution / std::sqrt(2.0 * marker.maf * (1.0 - marker.maf));
      }
      causal.push_back(marker);
    }
  }
  return causal;
}

std::vector<LdBlock> default_blocks() {
  // 40 blocks of 25 markers at latent rho 0.5; the second half of the
  // marker set stays independent.
  return std::vector<LdBlock>(40, LdBlock{25, 0.5});
}

std::vector<SimulationScenario> make_presets() {
  std::vector<SimulationScenario> presets;

  SimulationScenario q1;
  q1.name = "q1like";
  q1.n = 400;
  q1.d = 2000;
  q1.blocks = default_blocks();
  q1.heritability = 0.44;
  q1.replicates = 100;
  q1.seed = 7;
  q1.causal = build_causal({5, 6, 5, 3, 3, 4, 4, 4, 4}, kQ1Anchors,
                           std::size(kQ1Anchors), 25, 0xCA5001ULL, 0.095);
  presets.push_back(std::move(q1));

  SimulationScenario q2;
  q2.name = "q2like";
  q2.n = 400;
  q2.d = 2000;
  q2.blocks = default_blocks();
  q2.heritability = 0.29;
  q2.replicates = 100;
  q2.seed = 7;
  q2.causal = build_causal({6, 5, 6, 5, 6, 6, 6, 6, 5, 5, 5, 5, 5}, kQ2Anchors,
                           std::size(kQ2Anchors), 25, 0xCA5002ULL, 0.065);
  presets.push_back(std::move(q2));

  SimulationScenario q4;
  q4.name = "q4like";
  q4.n = 400;
  q4.d = 2000;
  q4.blocks = default_blocks();
  q4.heritability = 0.0;  // none of the variance is genetic
  q4.replicates = 100;
  q4.seed = 7;
  presets.push_back(std::move(q4));

  return presets;
}

}  // namespace

const std::vector<SimulationScenario>& scenario_presets() {
  static const std::vector<SimulationScenario> presets = make_presets();
  return presets;
}

SimulationScenario preset_scenario(const std::string& name) {
  for (const SimulationScenario& sc : scenario_presets()) {
    if (sc.name == name) return sc;
  }
  throw DataError("unknown scenario preset '" + name +
                  "' (expected q1like, q2like, or q4like)");
}

}  // namespace carsel
