#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "linkage/data.hpp"
#include "linkage/error.hpp"

namespace linkage {

// Penrose-style sib-pair concordance: if two traits are linked, sibs alike
// for one tend to be alike for the other.
struct SibPair {
  bool traitAConcordant = false;
  bool traitBConcordant = false;
};

struct SibPairResult {
  double statistic = 0.0;
  // table[a][b]: a = trait A concordant, b = trait B concordant (0 = no).
  std::array<std::array<std::uint64_t, 2>, 2> table{};
  bool degenerate = false;  // a zero margin; statistic forced to 0
};

inline SibPairResult sib_pair_test(std::span<const SibPair> pairs) {
  detail::require(!pairs.empty(), Errc::EmptyInput, "no sib pairs");
  SibPairResult r;
  for (const auto& p : pairs) ++r.table[p.traitAConcordant][p.traitBConcordant];
  const double a = static_cast<double>(r.table[1][1]);
  const double b = static_cast<double>(r.table[1][0]);
  const double c = static_cast<double>(r.table[0][1]);
  const double d = static_cast<double>(r.table[0][0]);
  const double n = a + b + c + d;
  const double margins = (a + b) * (c + d) * (a + c) * (b + d);
  if (margins == 0.0) {
    r.degenerate = true;
    return r;
  }
  const double diff = a * d - b * c;
  r.statistic = n * diff * diff / margins;
  return r;
}

struct TrioTransmission {
  std::uint64_t heterozygousParentCount = 0;
  std::uint64_t transmittedTarget = 0;    // b
  std::uint64_t untransmittedTarget = 0;  // c
};

// McNemar form (b - c)^2 / (b + c).
inline double tdt(const TrioTransmission& t) {
  const double b = static_cast<double>(t.transmittedTarget);
  const double c = static_cast<double>(t.untransmittedTarget);
  detail::require(b + c >= 1.0, Errc::NoInformativeTransmissions, "no informative transmissions");
  return (b - c) * (b - c) / (b + c);
}

struct TransmissionCount {
  TrioTransmission counts;
  std::uint64_t triosUsed = 0;
  std::uint64_t triosSkipped = 0;  // missing genotypes, Mendelian errors or unresolvable origin
};

// Scores every child whose parents and own marker genotypes are observed.
// Each heterozygous parent carrying `target` contributes one transmission.
inline TransmissionCount count_transmissions(std::span<const Family> families, std::size_t target) {
  TransmissionCount out;
  for (const auto& fam : families) {
    const auto& p = fam.pedigree;
    for (std::size_t c = 0; c < p.size(); ++c) {
      if (p.is_founder(c)) continue;
      const auto& child = fam.data[c].marker;
      const auto& father = fam.data[static_cast<std::size_t>(p.father_index(c))].marker;
      const auto& mother = fam.data[static_cast<std::size_t>(p.mother_index(c))].marker;
      if (!child || !father || !mother) {
        ++out.triosSkipped;
        continue;
      }
      const auto has = [](const MarkerGenotype& g, std::size_t a) { return g.first == a || g.second == a; };
      // Score each ordering (paternal, maternal) of the child's alleles that
      // the parents can produce; keep the trio only if all orderings agree.
      std::optional<std::array<std::uint64_t, 3>> tally;
      bool ambiguous = false;
      const std::pair<std::size_t, std::size_t> orders[2] = {{child->first, child->second},
                                                             {child->second, child->first}};
      for (const auto& [fromFather, fromMother] : orders) {
        if (!has(*father, fromFather) || !has(*mother, fromMother)) continue;
        std::array<std::uint64_t, 3> t{0, 0, 0};
        for (const auto& [parent, sent] : {std::pair{*father, fromFather}, std::pair{*mother, fromMother}}) {
          if (parent.first == parent.second || !has(parent, target)) continue;
          ++t[0];
          ++t[sent == target ? 1 : 2];
        }
        if (tally && *tally != t) ambiguous = true;
        tally = t;
      }
      if (!tally || ambiguous) {
        ++out.triosSkipped;
        continue;
      }
      ++out.triosUsed;
      out.counts.heterozygousParentCount += (*tally)[0];
      out.counts.transmittedTarget += (*tally)[1];
      out.counts.untransmittedTarget += (*tally)[2];
    }
  }
  return out;
}

struct HomozygosityInput {
  double inbreedingCoefficient = 0.0;  // F; recorded for provenance only
  double markerAlleleFrequency = 1.0;  // p of the observed allele
  MarkerGenotype observedGenotype;
};

struct HomozygosityScore {
  double score = 0.0;             // base 10
  bool negativeInfinite = false;  // heterozygote: autozygosity excluded
};

// log10 of P(genotype | autozygous) / P(genotype | Hardy-Weinberg): p / p^2
// for a homozygote, and zero probability for a heterozygote under
// autozygosity.
inline HomozygosityScore homozygosity_score(const HomozygosityInput& h) {
  detail::require(h.inbreedingCoefficient >= 0.0 && h.inbreedingCoefficient <= 1.0, Errc::InvalidArgument,
                  "inbreeding coefficient outside [0, 1]");
  detail::require(h.markerAlleleFrequency > 0.0 && h.markerAlleleFrequency <= 1.0, Errc::InvalidArgument,
                  "allele frequency outside (0, 1]");
  if (h.observedGenotype.first != h.observedGenotype.second)
    return {-std::numeric_limits<double>::infinity(), true};
  const double p = h.markerAlleleFrequency;
  return {std::log10(p / (p * p)), false};
}

}  // namespace linkage
