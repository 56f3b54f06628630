#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "linkage/data.hpp"
#include "linkage/enumerate.hpp"
#include "linkage/likelihood.hpp"
#include "linkage/model.hpp"
#include "linkage/pedigree.hpp"
#include "linkage/sim.hpp"

namespace linkage {

namespace designs {

inline Individual founder(std::string id, Sex sex) { return Individual{std::move(id), std::nullopt, std::nullopt, sex}; }

inline Individual child(std::string id, std::string father, std::string mother, Sex sex = Sex::Unknown) {
  return Individual{std::move(id), std::move(father), std::move(mother), sex};
}

// Dominant, fully penetrant, rare disease allele; equifrequent biallelic marker.
inline TwoLocusModel backcross_model() {
  return TwoLocusModel(Locus("disease", {"D", "d"}, {0.01, 0.99}), Locus("marker", {"1", "2"}, {0.5, 0.5}),
                       PenetranceModel::dominant());
}

// Three generations where the affected parent "3" has known phase D-1 / d-2
// and the spouse is d-2 / d-2, so every child is a scorable meiosis. With
// this data the lod is exactly
//   nonRecombinant * log10(2(1 - chi)) + recombinant * log10(2 chi).
inline Family phase_known_backcross(std::size_t nonRecombinant, std::size_t recombinant,
                                    std::string familyId = "1") {
  std::vector<Individual> inds{founder("1", Sex::Male), founder("2", Sex::Female), child("3", "1", "2", Sex::Male),
                               founder("4", Sex::Female)};
  ObservedData d;
  d.records.push_back({Phenotype::Affected, MarkerGenotype(0, 0)});
  d.records.push_back({Phenotype::Unaffected, MarkerGenotype(1, 1)});
  d.records.push_back({Phenotype::Affected, MarkerGenotype(0, 1)});
  d.records.push_back({Phenotype::Unaffected, MarkerGenotype(1, 1)});
  for (std::size_t k = 0; k < nonRecombinant + recombinant; ++k) {
    inds.push_back(child(std::to_string(5 + k), "3", "4"));
    const bool recombinant_child = k >= nonRecombinant;
    // Non-recombinant: affected with 1/2 or unaffected with 2/2; alternate.
    const bool affected = (k % 2 == 0) != recombinant_child;
    const bool carries1 = (k % 2 == 0);
    d.records.push_back({affected ? Phenotype::Affected : Phenotype::Unaffected,
                         carries1 ? MarkerGenotype(0, 1) : MarkerGenotype(1, 1)});
  }
  return Family{validate_pedigree(std::move(inds), std::move(familyId)), std::move(d)};
}

// Two parents and `children` offspring.
inline Pedigree nuclear(std::size_t children, std::string familyId = "1") {
  std::vector<Individual> inds{founder("1", Sex::Male), founder("2", Sex::Female)};
  for (std::size_t k = 0; k < children; ++k) inds.push_back(child(std::to_string(3 + k), "1", "2"));
  return validate_pedigree(std::move(inds), std::move(familyId));
}

// Grandparents 1 x 2, their child 3 married to founder 4, and `children`
// grandchildren.
inline Pedigree three_generation(std::size_t children, std::string familyId = "1") {
  std::vector<Individual> inds{founder("1", Sex::Male), founder("2", Sex::Female), child("3", "1", "2", Sex::Male),
                               founder("4", Sex::Female)};
  for (std::size_t k = 0; k < children; ++k) inds.push_back(child(std::to_string(5 + k), "3", "4"));
  return validate_pedigree(std::move(inds), std::move(familyId));
}

}  // namespace designs

struct CorpusCase {
  std::string name;
  Family family;
  TwoLocusModel model;
};

inline const std::vector<double>& corpus_chis() {
  static const std::vector<double> chis{0.0, 0.05, 0.1, 0.3, 0.5};
  return chis;
}

// Loop-free pedigrees of at most six people crossed with dominant, recessive
// and partial-penetrance models. Data come from a fixed-seed gene drop at
// chi = 0 with 20% missing markers, so the likelihood is positive at every
// corpus chi.
inline std::vector<CorpusCase> self_test_corpus() {
  using namespace designs;
  struct Shape {
    std::string name;
    Pedigree pedigree;
  };
  std::vector<Shape> shapes;
  shapes.push_back({"singleton", validate_pedigree({founder("1", Sex::Female)})});
  shapes.push_back({"trio", nuclear(1)});
  shapes.push_back({"sibship2", nuclear(2)});
  shapes.push_back({"sibship4", nuclear(4)});
  shapes.push_back({"three-generation", three_generation(1)});
  shapes.push_back({"three-generation-2", three_generation(2)});
  shapes.push_back({"half-sibs",
                    validate_pedigree({founder("1", Sex::Male), founder("2", Sex::Female), founder("3", Sex::Female),
                                       child("4", "1", "2"), child("5", "1", "3")})});
  shapes.push_back({"married-in-sib",
                    validate_pedigree({founder("1", Sex::Male), founder("2", Sex::Female), child("3", "1", "2"),
                                       child("4", "1", "2", Sex::Female), founder("5", Sex::Male),
                                       child("6", "5", "4")})});

  std::vector<std::pair<std::string, TwoLocusModel>> models;
  models.push_back({"dominant", TwoLocusModel(Locus("disease", {"D", "d"}, {0.1, 0.9}), Locus("marker", {"1", "2"}, {0.4, 0.6}),
                                              PenetranceModel::dominant())});
  models.push_back({"recessive", TwoLocusModel(Locus("disease", {"D", "d"}, {0.3, 0.7}), Locus("marker", {"1", "2", "3"}, {0.2, 0.3, 0.5}),
                                               PenetranceModel::recessive())});
  models.push_back({"partial", TwoLocusModel(Locus("disease", {"D", "d"}, {0.2, 0.8}), Locus("marker", {"1", "2", "3"}, {0.5, 0.25, 0.25}),
                                             PenetranceModel::of(0.9, 0.6, 0.05))});

  std::vector<CorpusCase> out;
  std::uint64_t stream = 0;
  for (const auto& shape : shapes) {
    for (const auto& [modelName, model] : models) {
      const SimConfig cfg{0.0, 1, 20240101, 0.2};
      auto data = gene_drop(shape.pedigree, model, cfg, stream++);
      out.push_back({shape.name + "/" + modelName, Family{shape.pedigree, std::move(data)}, model});
    }
  }
  return out;
}

struct SelfCheckReport {
  std::size_t cases = 0;
  std::size_t comparisons = 0;
  std::size_t failures = 0;
  double maxRelativeError = 0.0;
  std::vector<std::string> failed;

  bool passed() const { return failures == 0 && comparisons > 0; }
};

inline double relative_difference(double a, double b) {
  if (a == b) return 0.0;
  if (!std::isfinite(a) || !std::isfinite(b)) return std::numeric_limits<double>::infinity();
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

// Peeling against brute-force enumeration on every corpus case and chi, plus
// lod(1/2) == 0 exactly.
inline SelfCheckReport run_self_check(double tolerance = 1e-10) {
  SelfCheckReport r;
  for (const auto& c : self_test_corpus()) {
    ++r.cases;
    const FamilyLikelihood fl(c.family.pedigree, c.model, c.family.data);
    const double null = fl.loglik(kNullChi);
    for (double chi : corpus_chis()) {
      ++r.comparisons;
      const double peeled = fl.loglik(chi);
      const double brute = brute_force_loglik(c.family.pedigree, c.model, c.family.data, chi);
      const double rel = relative_difference(peeled, brute);
      r.maxRelativeError = std::max(r.maxRelativeError, rel);
      const bool lodOk = chi != kNullChi || (peeled - null) / std::log(10.0) == 0.0;
      if (rel > tolerance || !lodOk || !std::isfinite(peeled)) {
        ++r.failures;
        char buf[64];
        std::snprintf(buf, sizeof buf, " chi=%g", chi);
        r.failed.push_back(c.name + buf);
      }
    }
  }
  return r;
}

}  // namespace linkage
