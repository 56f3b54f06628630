#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "linkage/data.hpp"
#include "linkage/model.hpp"
#include "linkage/peeling.hpp"
#include "linkage/pedigree.hpp"

namespace linkage {

inline constexpr std::size_t kDefaultEnumerationLimit = 8;

namespace detail {

// Depth-first walk over every joint phased-genotype assignment, parents
// before children, skipping branches whose running product is zero. The
// visitor receives the full assignment and its joint probability. Uses the
// model-level probability functions directly and nothing from the peeling
// engine.
inline void enumerate_assignments(const Pedigree& p, const TwoLocusModel& m, const ObservedData& d,
                                  double chi, std::size_t limit,
                                  const std::function<void(const std::vector<std::size_t>&, double)>& visit) {
  detail::require(p.size() <= limit, Errc::TooLargeToEnumerate,
                  "family " + p.family_id() + " has " + std::to_string(p.size()) +
                      " individuals; enumeration limit is " + std::to_string(limit));
  check_data(p, m, d);
  const GenotypeSpace space(m);
  const auto& order = p.topological_order();

  // Own-evidence weight of each candidate state, zero states dropped.
  std::vector<std::vector<std::pair<std::size_t, double>>> states(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t g = 0; g < space.genotypes(); ++g) {
      const auto pg = space.genotype(g);
      if (!marker_matches(d[i], pg)) continue;
      double w = penetrance_prob(d[i].phenotype, pg, m.penetrance);
      if (p.is_founder(i)) w *= founder_prior(pg, m.trait, m.marker);
      if (w > 0.0) states[i].emplace_back(g, w);
    }
  }

  std::vector<std::size_t> assignment(p.size(), 0);
  std::function<void(std::size_t, double)> descend = [&](std::size_t depth, double weight) {
    if (depth == order.size()) {
      visit(assignment, weight);
      return;
    }
    const std::size_t i = order[depth];
    for (const auto& [g, w] : states[i]) {
      double x = weight * w;
      if (!p.is_founder(i)) {
        const auto child = space.genotype(g);
        const auto father = space.genotype(assignment[static_cast<std::size_t>(p.father_index(i))]);
        const auto mother = space.genotype(assignment[static_cast<std::size_t>(p.mother_index(i))]);
        x *= detail::transmission_raw(father, child.paternal, chi) *
             detail::transmission_raw(mother, child.maternal, chi);
      }
      if (x == 0.0) continue;
      assignment[i] = g;
      descend(depth + 1, x);
    }
  };
  descend(0, 1.0);
}

inline double brute_force_loglik_raw(const Pedigree& p, const TwoLocusModel& m, const ObservedData& d,
                                     double chi, std::size_t limit) {
  double total = 0.0;
  enumerate_assignments(p, m, d, chi, limit,
                        [&](const std::vector<std::size_t>&, double w) { total += w; });
  return total > 0.0 ? std::log(total) : -std::numeric_limits<double>::infinity();
}

inline GenotypePosteriors brute_force_posteriors_raw(const Pedigree& p, const TwoLocusModel& m,
                                                     const ObservedData& d, double chi, std::size_t limit) {
  const GenotypeSpace space(m);
  GenotypePosteriors out{space, std::vector<std::vector<double>>(p.size(), std::vector<double>(space.genotypes())),
                         {}, 0.0};
  double total = 0.0;
  enumerate_assignments(p, m, d, chi, limit, [&](const std::vector<std::size_t>& a, double w) {
    total += w;
    for (std::size_t i = 0; i < a.size(); ++i) out.probabilities[i][a[i]] += w;
  });
  detail::require(total > 0.0, Errc::InconsistentData, "data have zero probability; posteriors are undefined");
  for (auto& row : out.probabilities) {
    for (double& x : row) x /= total;
  }
  out.logLik = std::log(total);
  out.logNormalizers.assign(p.size(), out.logLik);
  return out;
}

}  // namespace detail

// Explicit summation over all phased-genotype assignments. Exists as an
// independent check on peeling and as the fallback for looped pedigrees.
inline double brute_force_loglik(const Pedigree& p, const TwoLocusModel& m, const ObservedData& d, double chi,
                                 std::size_t limit = kDefaultEnumerationLimit) {
  RecombinationParam{chi};
  return detail::brute_force_loglik_raw(p, m, d, chi, limit);
}

inline GenotypePosteriors brute_force_posteriors(const Pedigree& p, const TwoLocusModel& m, const ObservedData& d,
                                                 double chi, std::size_t limit = kDefaultEnumerationLimit) {
  RecombinationParam{chi};
  return detail::brute_force_posteriors_raw(p, m, d, chi, limit);
}

}  // namespace linkage
