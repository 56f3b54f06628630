#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "linkage/error.hpp"

namespace linkage {

// A locus with its population allele frequencies. An allele may carry
// frequency zero, which declares it absent from the founder population.
class Locus {
 public:
  Locus(std::string name, std::vector<std::string> alleles, std::vector<double> frequencies)
      : name_(std::move(name)), alleles_(std::move(alleles)), freq_(std::move(frequencies)) {
    using detail::require;
    require(!freq_.empty(), Errc::InvalidArgument, "locus " + name_ + " has no alleles");
    require(alleles_.size() == freq_.size(), Errc::InvalidArgument,
            "locus " + name_ + ": allele names and frequencies differ in length");
    double total = 0.0;
    for (double f : freq_) {
      require(f >= 0.0 && f <= 1.0, Errc::InvalidArgument,
              "locus " + name_ + ": allele frequency outside [0, 1]");
      total += f;
    }
    require(std::abs(total - 1.0) <= 1e-12, Errc::InvalidArgument,
            "locus " + name_ + ": allele frequencies do not sum to 1");
  }

  // Unnamed alleles are labelled "1", "2", ...
  explicit Locus(std::vector<double> frequencies, std::string name = "locus")
      : Locus(std::move(name), default_names(frequencies.size()), frequencies) {}

  const std::string& name() const { return name_; }
  const std::vector<std::string>& alleles() const { return alleles_; }
  const std::vector<double>& frequencies() const { return freq_; }
  std::size_t allele_count() const { return freq_.size(); }
  double frequency(std::size_t allele) const { return freq_.at(allele); }

  std::optional<std::size_t> allele_index(const std::string& label) const {
    for (std::size_t i = 0; i < alleles_.size(); ++i)
      if (alleles_[i] == label) return i;
    return std::nullopt;
  }

 private:
  static std::vector<std::string> default_names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= n; ++i) out.push_back(std::to_string(i));
    return out;
  }

  std::string name_;
  std::vector<std::string> alleles_;
  std::vector<double> freq_;
};

struct Haplotype {
  std::size_t trait = 0;
  std::size_t marker = 0;
  bool operator==(const Haplotype&) const = default;
};

struct PhasedGenotype {
  Haplotype paternal;
  Haplotype maternal;
  bool operator==(const PhasedGenotype&) const = default;

  PhasedGenotype swapped() const { return {maternal, paternal}; }
};

class RecombinationParam {
 public:
  explicit RecombinationParam(double chi) : chi_(chi) {
    detail::require(chi >= 0.0 && chi <= 0.5, Errc::InvalidArgument,
                    "recombination fraction must lie in [0, 1/2]");
  }
  static RecombinationParam from_eta(double eta) {
    detail::require(eta >= 0.0 && eta <= 1.0, Errc::InvalidArgument, "eta must lie in [0, 1]");
    return RecombinationParam((1.0 - eta) / 2.0);
  }

  double chi() const { return chi_; }
  double eta() const { return 1.0 - 2.0 * chi_; }
  bool is_null() const { return chi_ == 0.5; }

 private:
  double chi_;
};

enum class Phenotype { Unknown, Unaffected, Affected };

// P(affected | unordered trait genotype), stored as a symmetric table.
class PenetranceModel {
 public:
  explicit PenetranceModel(std::size_t traitAlleles, double fill = 0.0)
      : n_(traitAlleles), table_(traitAlleles * traitAlleles, fill) {
    detail::require(traitAlleles > 0, Errc::InvalidArgument, "penetrance needs at least one allele");
    check(fill);
  }

  // Biallelic helpers with allele 0 as the disease allele.
  static PenetranceModel dominant(double penetrance = 1.0, double phenocopy = 0.0) {
    PenetranceModel pm(2, phenocopy);
    pm.set(0, 0, penetrance);
    pm.set(0, 1, penetrance);
    return pm;
  }
  static PenetranceModel recessive(double penetrance = 1.0, double phenocopy = 0.0) {
    PenetranceModel pm(2, phenocopy);
    pm.set(0, 0, penetrance);
    return pm;
  }
  static PenetranceModel of(double homozygousDisease, double heterozygous, double homozygousNormal) {
    PenetranceModel pm(2);
    pm.set(0, 0, homozygousDisease);
    pm.set(0, 1, heterozygous);
    pm.set(1, 1, homozygousNormal);
    return pm;
  }

  void set(std::size_t a, std::size_t b, double affected) {
    check(affected);
    table_.at(a * n_ + b) = affected;
    table_.at(b * n_ + a) = affected;
  }

  double affected(std::size_t a, std::size_t b) const { return table_.at(a * n_ + b); }
  std::size_t allele_count() const { return n_; }

 private:
  static void check(double p) {
    detail::require(p >= 0.0 && p <= 1.0, Errc::InvalidArgument, "penetrance outside [0, 1]");
  }

  std::size_t n_;
  std::vector<double> table_;
};

struct TwoLocusModel {
  Locus trait;
  Locus marker;
  PenetranceModel penetrance;
  std::optional<double> defaultChi;

  TwoLocusModel(Locus traitLocus, Locus markerLocus, PenetranceModel pm,
                std::optional<double> chi = std::nullopt)
      : trait(std::move(traitLocus)), marker(std::move(markerLocus)), penetrance(std::move(pm)),
        defaultChi(chi) {
    detail::require(penetrance.allele_count() == trait.allele_count(), Errc::InvalidArgument,
                    "penetrance table does not match the trait locus");
    if (defaultChi) RecombinationParam{*defaultChi};
  }
};

// Dense indexing of haplotypes (trait-major) and ordered phased genotypes
// (paternal-major) shared by every engine.
struct GenotypeSpace {
  std::size_t traitAlleles = 0;
  std::size_t markerAlleles = 0;

  explicit GenotypeSpace(const TwoLocusModel& m)
      : traitAlleles(m.trait.allele_count()), markerAlleles(m.marker.allele_count()) {}
  GenotypeSpace(std::size_t nt, std::size_t nm) : traitAlleles(nt), markerAlleles(nm) {}

  std::size_t haplotypes() const { return traitAlleles * markerAlleles; }
  std::size_t genotypes() const { return haplotypes() * haplotypes(); }

  std::size_t index(Haplotype h) const { return h.trait * markerAlleles + h.marker; }
  std::size_t index(const PhasedGenotype& g) const {
    return index(g.paternal) * haplotypes() + index(g.maternal);
  }
  Haplotype haplotype(std::size_t h) const { return {h / markerAlleles, h % markerAlleles}; }
  PhasedGenotype genotype(std::size_t g) const {
    return {haplotype(g / haplotypes()), haplotype(g % haplotypes())};
  }
};

// Hardy-Weinberg at each locus and linkage equilibrium between them; both
// phases of a double heterozygote get the same weight.
inline double founder_prior(const PhasedGenotype& g, const Locus& trait, const Locus& marker) {
  return trait.frequency(g.paternal.trait) * marker.frequency(g.paternal.marker) *
         trait.frequency(g.maternal.trait) * marker.frequency(g.maternal.marker);
}

namespace detail {

// Same as transmission_prob but accepts any chi in [0, 1], which finite
// differences around eta = 0 need.
inline double transmission_raw(const PhasedGenotype& parent, const Haplotype& gamete, double chi) {
  const double keep = 0.5 * (1.0 - chi);
  const double swap = 0.5 * chi;
  double p = 0.0;
  if (gamete == parent.paternal) p += keep;
  if (gamete == parent.maternal) p += keep;
  if (gamete == Haplotype{parent.paternal.trait, parent.maternal.marker}) p += swap;
  if (gamete == Haplotype{parent.maternal.trait, parent.paternal.marker}) p += swap;
  return p;
}

}  // namespace detail

inline double transmission_prob(const PhasedGenotype& parent, const Haplotype& gamete,
                                RecombinationParam r) {
  return detail::transmission_raw(parent, gamete, r.chi());
}

inline double penetrance_prob(Phenotype phenotype, const PhasedGenotype& g, const PenetranceModel& pm) {
  switch (phenotype) {
    case Phenotype::Unknown: return 1.0;
    case Phenotype::Affected: return pm.affected(g.paternal.trait, g.maternal.trait);
    case Phenotype::Unaffected: return 1.0 - pm.affected(g.paternal.trait, g.maternal.trait);
  }
  return 1.0;
}

}  // namespace linkage
