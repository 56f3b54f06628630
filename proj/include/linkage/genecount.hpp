#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "linkage/error.hpp"

namespace linkage {

// Alleles, observable phenotypes, and which phenotype each unordered
// genotype displays (e.g. ABO blood groups).
class PhenotypeSystem {
 public:
  using Genotype = std::pair<std::size_t, std::size_t>;  // first <= second

  PhenotypeSystem(std::vector<std::string> alleles, std::vector<std::string> phenotypes,
                  std::map<Genotype, std::size_t> membership)
      : alleles_(std::move(alleles)), phenotypes_(std::move(phenotypes)), membership_(std::move(membership)) {
    using detail::require;
    const std::size_t k = alleles_.size();
    require(k >= 1, Errc::InvalidArgument, "phenotype system needs alleles");
    members_.resize(phenotypes_.size());
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a; b < k; ++b) {
        const auto it = membership_.find({a, b});
        require(it != membership_.end(), Errc::InvalidArgument,
                "genotype " + alleles_[a] + "/" + alleles_[b] + " has no phenotype");
        require(it->second < phenotypes_.size(), Errc::InvalidArgument, "membership names an unknown phenotype");
        members_[it->second].push_back({a, b});
      }
    }
    require(membership_.size() == k * (k + 1) / 2, Errc::InvalidArgument,
            "membership lists genotypes outside the allele set");
    for (std::size_t ph = 0; ph < phenotypes_.size(); ++ph)
      require(!members_[ph].empty(), Errc::InvalidArgument, "phenotype " + phenotypes_[ph] + " has no genotype");
  }

  // Every genotype is its own phenotype.
  static PhenotypeSystem codominant(std::vector<std::string> alleles) {
    std::vector<std::string> names;
    std::map<Genotype, std::size_t> membership;
    for (std::size_t a = 0; a < alleles.size(); ++a)
      for (std::size_t b = a; b < alleles.size(); ++b) {
        membership[{a, b}] = names.size();
        names.push_back(alleles[a] + alleles[b]);
      }
    return PhenotypeSystem(std::move(alleles), std::move(names), std::move(membership));
  }

  // Alleles A, B, O with O recessive; phenotypes A, B, AB, O.
  static PhenotypeSystem abo() {
    return PhenotypeSystem({"A", "B", "O"}, {"A", "B", "AB", "O"},
                           {{{0, 0}, 0}, {{0, 2}, 0}, {{1, 1}, 1}, {{1, 2}, 1}, {{0, 1}, 2}, {{2, 2}, 3}});
  }

  const std::vector<std::string>& alleles() const { return alleles_; }
  const std::vector<std::string>& phenotypes() const { return phenotypes_; }
  const std::vector<Genotype>& genotypes_of(std::size_t phenotype) const { return members_.at(phenotype); }
  std::size_t allele_count() const { return alleles_.size(); }
  std::size_t phenotype_count() const { return phenotypes_.size(); }

 private:
  std::vector<std::string> alleles_;
  std::vector<std::string> phenotypes_;
  std::map<Genotype, std::size_t> membership_;
  std::vector<std::vector<Genotype>> members_;
};

struct EmIterate {
  std::vector<double> frequencies;
  double logLikelihood = 0.0;
};

struct EmTrajectory {
  std::vector<EmIterate> iterates;  // iterates[0] is the starting point
  bool converged = false;

  const EmIterate& final() const { return iterates.back(); }
};

inline constexpr double kEmTolerance = 1e-10;
inline constexpr std::size_t kEmMaxIterations = 10000;
inline constexpr double kEmRoundingError = 1e-14;

inline double genotype_probability(const PhenotypeSystem::Genotype& g, std::span<const double> freq) {
  return g.first == g.second ? freq[g.first] * freq[g.first] : 2.0 * freq[g.first] * freq[g.second];
}

// Observed-data multinomial log-likelihood under Hardy-Weinberg, dropping the
// multinomial coefficient.
inline double phenotype_loglik(const PhenotypeSystem& sys, std::span<const std::uint64_t> counts,
                               std::span<const double> freq) {
  double ll = 0.0;
  for (std::size_t ph = 0; ph < sys.phenotype_count(); ++ph) {
    if (counts[ph] == 0) continue;
    double p = 0.0;
    for (const auto& g : sys.genotypes_of(ph)) p += genotype_probability(g, freq);
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    ll += static_cast<double>(counts[ph]) * std::log(p);
  }
  return ll;
}

// One gene-counting step: split each phenotype count over its genotypes in
// proportion to their current probabilities, then count alleles.
inline std::vector<double> em_update(const PhenotypeSystem& sys, std::span<const std::uint64_t> counts,
                                     std::span<const double> freq) {
  std::vector<double> alleles(sys.allele_count(), 0.0);
  double total = 0.0;
  for (std::size_t ph = 0; ph < sys.phenotype_count(); ++ph) {
    if (counts[ph] == 0) continue;
    const double n = static_cast<double>(counts[ph]);
    double p = 0.0;
    for (const auto& g : sys.genotypes_of(ph)) p += genotype_probability(g, freq);
    if (p <= 0.0) continue;
    for (const auto& g : sys.genotypes_of(ph)) {
      const double share = n * genotype_probability(g, freq) / p;
      alleles[g.first] += share;
      alleles[g.second] += share;
    }
    total += 2.0 * n;
  }
  for (double& a : alleles) a /= total;
  return alleles;
}

inline EmTrajectory em_gene_count(const PhenotypeSystem& sys, std::span<const std::uint64_t> counts,
                                  std::span<const double> init) {
  using detail::require;
  require(counts.size() == sys.phenotype_count(), Errc::InvalidArgument, "one count per phenotype is required");
  require(init.size() == sys.allele_count(), Errc::NonSimplexInit, "initial frequencies have the wrong length");
  double sum = 0.0;
  for (double f : init) {
    require(f > 0.0, Errc::NonSimplexInit, "initial frequencies must be strictly positive");
    sum += f;
  }
  require(std::abs(sum - 1.0) <= 1e-9, Errc::NonSimplexInit, "initial frequencies must sum to 1");
  std::uint64_t n = 0;
  for (auto c : counts) n += c;
  require(n >= 1, Errc::ZeroTotalCount, "no observations");

  EmTrajectory t;
  std::vector<double> theta(init.begin(), init.end());
  t.iterates.push_back({theta, phenotype_loglik(sys, counts, theta)});
  for (std::size_t it = 0; it < kEmMaxIterations; ++it) {
    theta = em_update(sys, counts, theta);
    const double ll = phenotype_loglik(sys, counts, theta);
    const double previous = t.iterates.back().logLikelihood;
    t.iterates.push_back({theta, ll});
    if (std::abs(ll - previous) < kEmTolerance) {
      t.converged = true;
      break;
    }
  }
  return t;
}

inline EmTrajectory em_gene_count(const PhenotypeSystem& sys, std::span<const std::uint64_t> counts) {
  const std::vector<double> uniform(sys.allele_count(), 1.0 / static_cast<double>(sys.allele_count()));
  return em_gene_count(sys, counts, uniform);
}

// Linear convergence rate: geometric mean of the error ratios
// |theta_{k+1} - theta*| / |theta_k - theta*| over the last five iterates
// still well away from the limit theta* (taken as the final iterate).
// Ratios whose numerator is theta* itself are excluded; "well away" means an
// error above 100x the final step length.
inline double em_convergence_rate(const EmTrajectory& t) {
  const auto& its = t.iterates;
  detail::require(its.size() >= 3, Errc::InsufficientIterates, "need at least three iterates");
  const auto& limit = its.back().frequencies;
  std::vector<double> err;
  for (const auto& it : its) {
    double s = 0.0;
    for (std::size_t a = 0; a < limit.size(); ++a) s += (it.frequencies[a] - limit[a]) * (it.frequencies[a] - limit[a]);
    // Frequencies live in [0, 1]; rounding-level error is convergence.
    err.push_back(std::sqrt(s) <= kEmRoundingError ? 0.0 : std::sqrt(s));
  }
  detail::require(err.front() > 0.0, Errc::InsufficientIterates, "trajectory starts at its limit");

  const std::size_t last = err.size() - 2;  // err[last] is the final step length
  const double floor = 100.0 * err[last];
  std::vector<double> ratios;
  for (std::size_t k = 0; k < last; ++k)
    if (err[k] > floor) ratios.push_back(err[k + 1] / err[k]);
  if (ratios.empty()) {
    for (std::size_t k = 0; k < last; ++k)
      if (err[k] > 0.0) ratios.push_back(err[k + 1] / err[k]);
  }
  detail::require(!ratios.empty(), Errc::InsufficientIterates, "no pre-convergence iterates");
  const std::size_t take = std::min<std::size_t>(5, ratios.size());
  double logSum = 0.0;
  for (std::size_t i = ratios.size() - take; i < ratios.size(); ++i) {
    if (ratios[i] == 0.0) return 0.0;
    logSum += std::log(ratios[i]);
  }
  return std::exp(logSum / static_cast<double>(take));
}

}  // namespace linkage
