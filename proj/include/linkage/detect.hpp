#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "linkage/data.hpp"
#include "linkage/likelihood.hpp"
#include "linkage/model.hpp"
#include "linkage/pedigree.hpp"
#include "linkage/sim.hpp"

namespace linkage {

// ---------------------------------------------------------------------------
// Sequential probability ratio test
// ---------------------------------------------------------------------------

struct SprtConfig {
  double alpha = 0.05;
  double beta = 0.05;
  double chiAlt = 0.1;

  void validate() const {
    using detail::require;
    require(alpha > 0.0 && alpha < 1.0, Errc::InvalidArgument, "alpha must lie in (0, 1)");
    require(beta > 0.0 && beta < 1.0, Errc::InvalidArgument, "beta must lie in (0, 1)");
    require(alpha + beta < 1.0, Errc::InvalidArgument, "alpha + beta must be below 1");
    require(chiAlt >= 0.0 && chiAlt < 0.5, Errc::InvalidArgument, "alternative chi must lie in [0, 1/2)");
  }
};

// Wald boundaries with overshoot ignored: A = (1 - beta) / alpha and
// B = beta / (1 - alpha), held as base-10 logs.
struct SprtBoundaries {
  double log10A = 0.0;
  double log10B = 0.0;
};

inline SprtBoundaries sprt_boundaries(const SprtConfig& cfg) {
  cfg.validate();
  return {std::log10((1.0 - cfg.beta) / cfg.alpha), std::log10(cfg.beta / (1.0 - cfg.alpha))};
}

enum class SprtOutcome { DeclareLinkage, DeclareNoLinkage, Undecided };

inline const char* to_string(SprtOutcome o) {
  switch (o) {
    case SprtOutcome::DeclareLinkage: return "declareLinkage";
    case SprtOutcome::DeclareNoLinkage: return "declareNoLinkage";
    case SprtOutcome::Undecided: return "undecided";
  }
  return "undecided";
}

struct SprtDecision {
  SprtOutcome outcome = SprtOutcome::Undecided;
  std::size_t step = 0;  // 1-based family count at the decision; stream length if undecided
  double total = 0.0;
};

inline SprtDecision sprt_run(std::span<const double> lods, const SprtBoundaries& b) {
  SprtDecision d;
  for (std::size_t i = 0; i < lods.size(); ++i) {
    d.total += lods[i];
    d.step = i + 1;
    if (d.total >= b.log10A) {
      d.outcome = SprtOutcome::DeclareLinkage;
      return d;
    }
    if (d.total <= b.log10B) {
      d.outcome = SprtOutcome::DeclareNoLinkage;
      return d;
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// False discovery rate of a declared linkage
// ---------------------------------------------------------------------------

inline constexpr double kMortonPrior = 1.0 / 20.0;
inline constexpr double kSmithPrior = 1.0 / 24.0;

// alpha (1 - prior) / (alpha (1 - prior) + prior W), W the average power.
inline double fdr(double alpha, double prior, double power) {
  using detail::require;
  require(alpha > 0.0 && alpha <= 1.0, Errc::InvalidArgument, "alpha must lie in (0, 1]");
  require(prior > 0.0 && prior <= 1.0, Errc::InvalidArgument, "prior must lie in (0, 1]");
  require(power > 0.0 && power <= 1.0, Errc::InvalidArgument, "power must lie in (0, 1]");
  const double falses = alpha * (1.0 - prior);
  return falses / (falses + prior * power);
}

// ---------------------------------------------------------------------------
// Odds of error and Kullback-Leibler information on finite outcome sets
// ---------------------------------------------------------------------------

namespace detail {

inline void check_distribution(std::span<const double> f, const char* name) {
  double total = 0.0;
  for (double x : f) {
    require(x >= 0.0 && std::isfinite(x), Errc::InvalidArgument, std::string(name) + " has a negative entry");
    total += x;
  }
  require(!f.empty() && std::abs(total - 1.0) <= 1e-9, Errc::InvalidArgument,
          std::string(name) + " does not sum to 1");
}

inline double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace detail

struct OddsOfError {
  double alpha = 0.0;
  double power = 0.0;
  // E_1(f0(X) / f1(X) | X in C); equals alpha / power whenever f0 vanishes
  // wherever f1 does inside C.
  double conditionalMeanLR = 0.0;
};

inline OddsOfError odds_of_error_check(std::span<const double> f0, std::span<const double> f1,
                                       std::span<const std::size_t> critical) {
  detail::check_distribution(f0, "f0");
  detail::check_distribution(f1, "f1");
  detail::require(f0.size() == f1.size(), Errc::InvalidArgument, "f0 and f1 live on different outcome sets");
  std::vector<bool> seen(f0.size(), false);
  OddsOfError r;
  double weighted = 0.0;
  for (std::size_t x : critical) {
    detail::require(x < f0.size(), Errc::InvalidArgument, "critical region names an unknown outcome");
    if (seen[x]) continue;
    seen[x] = true;
    r.alpha += f0[x];
    r.power += f1[x];
    if (f1[x] > 0.0) weighted += (f0[x] / f1[x]) * f1[x];
  }
  detail::require(r.power > 0.0, Errc::ZeroPowerRegion, "critical region has zero probability under f1");
  r.conditionalMeanLR = weighted / r.power;
  return r;
}

// sum_x f0(x) ln(f0(x) / f1(x)), natural-log units.
inline double kl_information(std::span<const double> f0, std::span<const double> f1) {
  detail::check_distribution(f0, "f0");
  detail::check_distribution(f1, "f1");
  detail::require(f0.size() == f1.size(), Errc::InvalidArgument, "f0 and f1 live on different outcome sets");
  double kl = 0.0;
  for (std::size_t x = 0; x < f0.size(); ++x) {
    if (f0[x] == 0.0) continue;
    detail::require(f1[x] > 0.0, Errc::SupportMismatch, "f0 puts mass where f1 has none");
    kl += f0[x] * std::log(f0[x] / f1[x]);
  }
  return kl;
}

// ---------------------------------------------------------------------------
// Locus heterogeneity (admixture of linked and unlinked families)
// ---------------------------------------------------------------------------

struct HetTestResult {
  double alphaHat = 1.0;
  double chiHat = kNullChi;
  double lrStatistic = 0.0;
  double mixtureLogLik = 0.0;
  double homogeneousLogLik = 0.0;
};

namespace detail {

// sum_f ln(a 10^lod_f + 1 - a), evaluated in log space.
inline double admixture_loglik(std::span<const double> lods, double a) {
  const double la = std::log(a);
  const double lb = std::log1p(-a);
  double s = 0.0;
  for (double l : lods) s += log_add(la + l * std::numbers::ln10, lb);
  return s;
}

}  // namespace detail

inline HetTestResult heterogeneity_test(std::span<const LodCurve> curves) {
  using detail::require;
  require(curves.size() >= 2, Errc::InvalidArgument, "heterogeneity test needs at least two families");
  const auto grid = curves.front().chis();
  for (const auto& c : curves)
    require(c.chis() == grid, Errc::InvalidArgument, "lod curves must share one chi grid");
  require(std::find(grid.begin(), grid.end(), kNullChi) != grid.end(), Errc::GridMissingNull,
          "chi grid must include 1/2");

  constexpr double kTie = 1e-12;
  HetTestResult r;
  r.mixtureLogLik = -std::numeric_limits<double>::infinity();
  r.homogeneousLogLik = -std::numeric_limits<double>::infinity();
  std::vector<double> lods(curves.size());
  // Descending chi so ties resolve toward 1/2.
  for (std::size_t k = grid.size(); k-- > 0;) {
    for (std::size_t f = 0; f < curves.size(); ++f) lods[f] = curves[f].points[k].lod;
    const auto value = [&](double a) { return detail::admixture_loglik(lods, a); };

    const double homogeneous = value(1.0);
    double bestA = 1.0;
    double best = homogeneous;
    const double inner = detail::golden_section_max(value, 0.0, 1.0, 1e-10);
    for (double a : {inner, 0.0}) {
      const double v = value(a);
      if (v > best + kTie) {
        best = v;
        bestA = a;
      }
    }
    r.homogeneousLogLik = std::max(r.homogeneousLogLik, homogeneous);
    if (best > r.mixtureLogLik + kTie || r.mixtureLogLik == -std::numeric_limits<double>::infinity()) {
      r.mixtureLogLik = best;
      r.alphaHat = bestA;
      r.chiHat = grid[k];
    }
  }
  r.lrStatistic = 2.0 * (r.mixtureLogLik - r.homogeneousLogLik);
  return r;
}

// ---------------------------------------------------------------------------
// Expected lod scores
// ---------------------------------------------------------------------------

enum class ElodMethod { Enumeration, MonteCarlo };

struct ElodResult {
  double value = 0.0;
  std::optional<double> standardError;  // present iff method == MonteCarlo
  ElodMethod method = ElodMethod::Enumeration;
  std::optional<std::uint64_t> replicates;
};

struct DataConfiguration {
  ObservedData data;
  double probability = 0.0;
};

// Every fully observed data configuration (phenotype plus marker genotype on
// each individual) with its probability at chi. Individuals carrying data in
// `fixed` keep it, and probabilities are then conditional on that data.
// Branches whose partial data already have probability zero are pruned.
inline std::vector<DataConfiguration> enumerate_data_law(const Pedigree& p, const TwoLocusModel& m, double chi,
                                                         const ObservedData& fixed,
                                                         std::size_t limit = kDefaultEnumerationLimit) {
  RecombinationParam{chi};
  detail::require(p.size() <= limit, Errc::TooLargeToEnumerate,
                  "family " + p.family_id() + " is too large to enumerate data configurations");
  check_data(p, m, fixed);

  std::vector<Observation> alphabet;
  for (auto ph : {Phenotype::Unaffected, Phenotype::Affected})
    for (std::size_t a = 0; a < m.marker.allele_count(); ++a)
      for (std::size_t b = a; b < m.marker.allele_count(); ++b) alphabet.push_back({ph, MarkerGenotype(a, b)});

  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (fixed[i].is_missing()) free.push_back(i);

  const auto loglik = [&](const ObservedData& d) { return FamilyLikelihood(p, m, d, limit).loglik(chi); };
  const double base = loglik(fixed);
  detail::require(std::isfinite(base), Errc::InconsistentData, "conditioning data have zero probability");

  std::vector<DataConfiguration> out;
  ObservedData current = fixed;
  const auto descend = [&](auto&& self, std::size_t depth) -> void {
    for (const auto& obs : alphabet) {
      current[free[depth]] = obs;
      const double ll = loglik(current);
      if (!std::isfinite(ll)) continue;
      if (depth + 1 == free.size()) {
        out.push_back({current, std::exp(ll - base)});
      } else {
        self(self, depth + 1);
      }
    }
    current[free[depth]] = Observation{};
  };
  if (free.empty()) {
    out.push_back({current, 1.0});
  } else {
    descend(descend, 0);
  }
  return out;
}

struct DataLawCategories {
  std::vector<ObservedData> configurations;
  std::vector<ScoreCategory> categories;
};

// The data configurations of one pedigree as multinomial categories in eta,
// each with its probability function and null probability.
inline DataLawCategories data_law_categories(const Pedigree& p, const TwoLocusModel& m,
                                             std::size_t limit = kDefaultEnumerationLimit) {
  DataLawCategories out;
  for (auto& cfg : enumerate_data_law(p, m, kNullChi, ObservedData::unknown(p.size()), limit)) {
    auto fl = std::make_shared<const FamilyLikelihood>(p, m, cfg.data, limit);
    out.categories.push_back(
        {cfg.probability, [fl](double eta) { return std::exp(fl->loglik((1.0 - eta) / 2.0)); }, nullptr});
    out.configurations.push_back(std::move(cfg.data));
  }
  return out;
}

inline double data_lod(const Pedigree& p, const TwoLocusModel& m, const ObservedData& d, double chi) {
  const FamilyLikelihood fl(p, m, d);
  return (fl.loglik(chi) - fl.loglik(kNullChi)) / std::numbers::ln10;
}

inline ElodResult elod_enumerate(const Pedigree& p, const TwoLocusModel& m, double chiTrue, double chiEval,
                                 const ObservedData& fixed) {
  RecombinationParam{chiEval};
  double total = 0.0;
  for (const auto& cfg : enumerate_data_law(p, m, chiTrue, fixed)) {
    if (cfg.probability == 0.0) continue;
    total += cfg.probability * data_lod(p, m, cfg.data, chiEval);
  }
  return {total, std::nullopt, ElodMethod::Enumeration, std::nullopt};
}

inline ElodResult elod_enumerate(const Pedigree& p, const TwoLocusModel& m, double chiTrue, double chiEval) {
  return elod_enumerate(p, m, chiTrue, chiEval, ObservedData::unknown(p.size()));
}

inline ElodResult elod_monte_carlo(const Pedigree& p, const TwoLocusModel& m, double chiTrue, double chiEval,
                                   std::uint64_t replicates, std::uint64_t seed) {
  detail::require(replicates >= 1, Errc::ZeroReplicates, "at least one replicate is required");
  RecombinationParam{chiEval};
  const SimConfig cfg{chiTrue, replicates, seed, 0.0};
  // Welford accumulation in replicate order.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::uint64_t r = 0; r < replicates; ++r) {
    const double x = data_lod(p, m, gene_drop(p, m, cfg, r), chiEval);
    const double delta = x - mean;
    mean += delta / static_cast<double>(r + 1);
    m2 += delta * (x - mean);
  }
  const double n = static_cast<double>(replicates);
  const double se = replicates > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
  return {mean, se, ElodMethod::MonteCarlo, replicates};
}

// ---------------------------------------------------------------------------
// Operating characteristics of the SPRT by simulation
// ---------------------------------------------------------------------------

struct SprtCalibration {
  std::uint64_t streams = 0;
  double alphaHat = 0.0;      // fraction of null streams declaring linkage
  double powerHat = 0.0;      // fraction of alternative streams declaring linkage
  double oddsOfError = 0.0;   // alphaHat / powerHat
  double oddsStandardError = 0.0;
  double meanStepsNull = 0.0;
  double meanStepsAlt = 0.0;
};

// Runs `streams` independent family streams under chi = 1/2 and under
// chiAlt; each stream adds one simulated copy of `family` at a time until a
// boundary is crossed or maxFamilies is reached.
inline SprtCalibration simulate_sprt(const Pedigree& family, const TwoLocusModel& m, const SprtConfig& cfg,
                                     std::uint64_t streams, std::uint64_t seed, std::size_t maxFamilies = 1000) {
  const auto bounds = sprt_boundaries(cfg);
  detail::require(streams >= 1, Errc::ZeroReplicates, "at least one stream is required");

  // Lods depend only on the data configuration; small families repeat often.
  std::map<std::vector<std::uint32_t>, double> cache;
  const auto lod_of = [&](const ObservedData& d) {
    std::vector<std::uint32_t> key;
    for (const auto& o : d.records) {
      key.push_back(static_cast<std::uint32_t>(o.phenotype));
      key.push_back(o.marker ? static_cast<std::uint32_t>(o.marker->first) : 0xFFFFu);
      key.push_back(o.marker ? static_cast<std::uint32_t>(o.marker->second) : 0xFFFFu);
    }
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, data_lod(family, m, d, cfg.chiAlt)).first;
    return it->second;
  };

  SprtCalibration out;
  out.streams = streams;
  std::uint64_t declared[2] = {0, 0};
  double steps[2] = {0.0, 0.0};
  for (int h = 0; h < 2; ++h) {
    const SimConfig sim{h == 0 ? kNullChi : cfg.chiAlt, streams, splitmix64(seed + static_cast<std::uint64_t>(h)), 0.0};
    for (std::uint64_t s = 0; s < streams; ++s) {
      double total = 0.0;
      std::size_t k = 0;
      for (; k < maxFamilies; ++k) {
        const double lod = lod_of(gene_drop(family, m, sim, s * maxFamilies + k));
        total += lod;
        if (total >= bounds.log10A) {
          ++declared[h];
          break;
        }
        if (total <= bounds.log10B) break;
      }
      steps[h] += static_cast<double>(std::min(k + 1, maxFamilies));
    }
  }
  const double n = static_cast<double>(streams);
  out.alphaHat = static_cast<double>(declared[0]) / n;
  out.powerHat = static_cast<double>(declared[1]) / n;
  out.meanStepsNull = steps[0] / n;
  out.meanStepsAlt = steps[1] / n;
  if (out.powerHat > 0.0) {
    out.oddsOfError = out.alphaHat / out.powerHat;
    const double relA = out.alphaHat > 0.0 ? (1.0 - out.alphaHat) / (n * out.alphaHat) : 0.0;
    const double relP = (1.0 - out.powerHat) / (n * out.powerHat);
    out.oddsStandardError = out.oddsOfError * std::sqrt(relA + relP);
  }
  return out;
}

}  // namespace linkage
