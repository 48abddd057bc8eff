#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "carsel/types.hpp"

namespace carsel {

struct LdBlock {
  int size = 0;
  double rho = 0.0;  // within-block latent correlation, [0, 1)
};

struct CausalMarker {
  int index = 0;  // column in the simulated matrix
  double beta = 0.0;
  double maf = 0.25;  // (0, 0.5]
};

// Synthetic GWAS scenario: LD blocks of equicorrelated markers, a causal
// set with fixed effect sizes, and a target heritability. Stands in for
// the access-restricted workshop data at desk scale.
struct SimulationScenario {
  std::string name = "custom";
  int n = 400;
  int d = 2000;
  std::vector<LdBlock> blocks;       // assigned to markers from index 0
  std::vector<CausalMarker> causal;
  double heritability = 0.44;        // (0, 1]; ignored when causal is empty
  int replicates = 100;              // B
  std::uint64_t seed = 7;
  double background_maf_lo = 0.005;  // log-uniform MAF range for
  double background_maf_hi = 0.5;    // non-causal markers
};

void validate_scenario(const SimulationScenario& sc);

// Allele-count codes via a latent-Gaussian threshold model: per haplotype,
// markers in a block share a factor with weight sqrt(rho); the latent value
// is cut at the MAF quantile and the two haplotype alleles are summed, so
// marginal code frequencies follow Hardy-Weinberg at the marker's MAF.
// Same seed gives bit-identical output for any thread count.
RawGenotypes simulate_genotypes(const SimulationScenario& sc);

// y_b = X_causal beta + eps_b on raw codes, with the noise variance set so
// the genetic share of variance equals the scenario heritability. With no
// causal markers (or all-zero betas) each y_b is pure standard noise.
// Returned vectors are raw; standardize downstream.
std::vector<PhenotypeVector> simulate_phenotypes(const RawGenotypes& genotypes,
                                                 const SimulationScenario& sc);

// Named scenarios mirroring the workshop phenotypes: "q1like" (38 causal,
// h2 = 0.44), "q2like" (71 causal, h2 = 0.29), "q4like" (no causal).
const std::vector<SimulationScenario>& scenario_presets();
SimulationScenario preset_scenario(const std::string& name);

// Inverse standard normal CDF (Acklam rational approximation plus one
// Halley refinement); exposed for the simulation tests.
double inverse_normal_cdf(double p);

}  // namespace carsel
