#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "linkage/data.hpp"
#include "linkage/likelihood.hpp"
#include "linkage/model.hpp"
#include "linkage/pedigree.hpp"

namespace linkage {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Generator seed for one replicate, a pure function of (seed, index) so any
// evaluation schedule reproduces the same replicate.
inline std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

// mt19937_64 with explicit draw-to-double conversion; the standard
// distributions are implementation-defined, this is not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }

  std::size_t categorical(std::span<const double> probs) {
    const double u = uniform();
    double cum = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 0.0) continue;
      cum += probs[i];
      last = i;
      if (u < cum) return i;
    }
    return last;
  }

 private:
  std::mt19937_64 engine_;
};

struct SimConfig {
  double chiTrue = 0.5;
  std::uint64_t replicates = 1;
  std::uint64_t seed = 1;
  double missingnessRate = 0.0;

  void validate() const {
    RecombinationParam{chiTrue};
    detail::require(replicates >= 1, Errc::ZeroReplicates, "at least one replicate is required");
    detail::require(missingnessRate >= 0.0 && missingnessRate <= 1.0, Errc::InvalidArgument,
                    "missingness rate outside [0, 1]");
  }
};

struct SimulatedFamily {
  std::vector<PhasedGenotype> genotypes;
  ObservedData data;
};

inline SimulatedFamily gene_drop_with(const Pedigree& p, const TwoLocusModel& m, double chi, double missingness,
                                      Rng& rng) {
  SimulatedFamily out{std::vector<PhasedGenotype>(p.size()), ObservedData::unknown(p.size())};
  const auto& tf = m.trait.frequencies();
  const auto& mf = m.marker.frequencies();
  auto gamete = [&](const PhasedGenotype& parent) {
    const bool fromPaternal = rng.bernoulli(0.5);
    const bool recombine = rng.bernoulli(chi);
    const Haplotype& first = fromPaternal ? parent.paternal : parent.maternal;
    const Haplotype& other = fromPaternal ? parent.maternal : parent.paternal;
    return Haplotype{first.trait, recombine ? other.marker : first.marker};
  };
  for (std::size_t i : p.topological_order()) {
    PhasedGenotype g;
    if (p.is_founder(i)) {
      g.paternal.trait = rng.categorical(tf);
      g.paternal.marker = rng.categorical(mf);
      g.maternal.trait = rng.categorical(tf);
      g.maternal.marker = rng.categorical(mf);
    } else {
      g.paternal = gamete(out.genotypes[static_cast<std::size_t>(p.father_index(i))]);
      g.maternal = gamete(out.genotypes[static_cast<std::size_t>(p.mother_index(i))]);
    }
    out.genotypes[i] = g;
    const double pen = m.penetrance.affected(g.paternal.trait, g.maternal.trait);
    out.data[i].phenotype = rng.bernoulli(pen) ? Phenotype::Affected : Phenotype::Unaffected;
    const bool missing = rng.bernoulli(missingness);
    if (!missing) out.data[i].marker = MarkerGenotype(g.paternal.marker, g.maternal.marker);
  }
  return out;
}

inline SimulatedFamily gene_drop_full(const Pedigree& p, const TwoLocusModel& m, const SimConfig& cfg,
                                      std::uint64_t replicateIndex) {
  cfg.validate();
  Rng rng(replicate_seed(cfg.seed, replicateIndex));
  return gene_drop_with(p, m, cfg.chiTrue, cfg.missingnessRate, rng);
}

inline ObservedData gene_drop(const Pedigree& p, const TwoLocusModel& m, const SimConfig& cfg,
                              std::uint64_t replicateIndex) {
  return gene_drop_full(p, m, cfg, replicateIndex).data;
}

// Replicate r of a multi-family design; family f uses stream r * F + f.
inline std::vector<Family> simulate_families(std::span<const Pedigree> pedigrees, const TwoLocusModel& m,
                                             const SimConfig& cfg, std::uint64_t replicateIndex) {
  std::vector<Family> out;
  const auto F = static_cast<std::uint64_t>(pedigrees.size());
  for (std::uint64_t f = 0; f < F; ++f)
    out.push_back(Family{pedigrees[f], gene_drop(pedigrees[f], m, cfg, replicateIndex * F + f)});
  return out;
}

struct PowerEstimate {
  double power = 0.0;
  double se = 0.0;
  std::uint64_t replicates = 0;
};

// Fraction of simulated replicates whose maximum total lod over the grid
// reaches the threshold, with its binomial standard error.
inline PowerEstimate estimate_power(std::span<const Pedigree> families, const TwoLocusModel& m, double lodThreshold,
                                    const SimConfig& cfg, std::span<const double> grid) {
  cfg.validate();
  detail::require(lodThreshold >= 0.0, Errc::InvalidArgument, "lod threshold must be non-negative");
  detail::require(!families.empty(), Errc::EmptyInput, "no families to simulate");
  std::uint64_t hits = 0;
  for (std::uint64_t r = 0; r < cfg.replicates; ++r) {
    const auto sample = simulate_families(families, m, cfg, r);
    const LodEvaluator eval(sample, m);
    double best = -std::numeric_limits<double>::infinity();
    for (double chi : grid) best = std::max(best, eval.lod(chi));
    if (best >= lodThreshold) ++hits;
  }
  const double n = static_cast<double>(cfg.replicates);
  const double w = static_cast<double>(hits) / n;
  return {w, std::sqrt(w * (1.0 - w) / n), cfg.replicates};
}

inline PowerEstimate estimate_power(std::span<const Pedigree> families, const TwoLocusModel& m, double lodThreshold,
                                    const SimConfig& cfg) {
  const auto grid = default_chi_grid();
  return estimate_power(families, m, lodThreshold, cfg, grid);
}

}  // namespace linkage
