#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "linkage/data.hpp"
#include "linkage/model.hpp"
#include "linkage/pedigree.hpp"

namespace linkage {

// Exact marginal distribution of every individual's phased genotype given
// all data, indexed by GenotypeSpace::index.
struct GenotypePosteriors {
  GenotypeSpace space;
  std::vector<std::vector<double>> probabilities;
  // Natural log of the unnormalised marginal mass at each individual; every
  // entry equals the pedigree log-likelihood when the passes are consistent.
  std::vector<double> logNormalizers;
  double logLik = 0.0;

  double probability(std::size_t individual, const PhasedGenotype& g) const {
    return probabilities.at(individual).at(space.index(g));
  }
};

namespace detail {

// A non-negative vector carried as v * exp(logScale) with max(v) == 1, so
// long products never underflow.
struct Scaled {
  std::vector<double> v;
  double logScale = 0.0;

  void rescale() {
    const double top = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
    if (top > 0.0 && top != 1.0) {
      for (double& x : v) x /= top;
      logScale += std::log(top);
    }
  }
  bool all_zero() const {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  }
  void multiply(const Scaled& o) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= o.v[i];
    logScale += o.logScale;
    rescale();
  }
  double log_total() const {
    double s = 0.0;
    for (double x : v) s += x;
    return s > 0.0 ? std::log(s) + logScale : -std::numeric_limits<double>::infinity();
  }
};

// trans[g * H + h] = P(parent with phased genotype g transmits haplotype h).
inline std::vector<double> transmission_table(const GenotypeSpace& space, double chi) {
  const std::size_t G = space.genotypes();
  const std::size_t H = space.haplotypes();
  std::vector<double> t(G * H);
  for (std::size_t g = 0; g < G; ++g) {
    const auto pg = space.genotype(g);
    for (std::size_t h = 0; h < H; ++h) t[g * H + h] = transmission_raw(pg, space.haplotype(h), chi);
  }
  return t;
}

// Founder prior (founders only) x penetrance x marker compatibility.
inline std::vector<std::vector<double>> evidence_vectors(const Pedigree& p, const TwoLocusModel& m,
                                                         const ObservedData& d) {
  check_data(p, m, d);
  const GenotypeSpace space(m);
  std::vector<std::vector<double>> out(p.size(), std::vector<double>(space.genotypes()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t g = 0; g < space.genotypes(); ++g) {
      const auto pg = space.genotype(g);
      double w = marker_matches(d[i], pg) ? penetrance_prob(d[i].phenotype, pg, m.penetrance) : 0.0;
      if (w > 0.0 && p.is_founder(i)) w *= founder_prior(pg, m.trait, m.marker);
      out[i][g] = w;
    }
  }
  return out;
}

inline constexpr int kNoTarget = -1;
inline constexpr int kFatherTarget = -2;
inline constexpr int kMotherTarget = -3;

// Sums one nuclear family's transmission factors against the messages
// flowing into it from every member except `target`. A target >= 0 names a
// child by position; kNoTarget sums everything and returns a length-1 vector.
inline Scaled family_message(const GenotypeSpace& space, const std::vector<double>& trans,
                             const Scaled& father, const Scaled& mother,
                             std::span<const Scaled* const> kids, int target) {
  const std::size_t G = space.genotypes();
  const std::size_t H = space.haplotypes();

  Scaled prod{std::vector<double>(G * G, 1.0), 0.0};
  std::vector<double> w(H * G);
  for (std::size_t j = 0; j < kids.size(); ++j) {
    if (static_cast<int>(j) == target) continue;
    const Scaled& u = *kids[j];
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t h1 = 0; h1 < H; ++h1)
      for (std::size_t gm = 0; gm < G; ++gm) {
        double s = 0.0;
        for (std::size_t h2 = 0; h2 < H; ++h2) s += trans[gm * H + h2] * u.v[h1 * H + h2];
        w[h1 * G + gm] = s;
      }
    for (std::size_t gf = 0; gf < G; ++gf) {
      const double* tf = &trans[gf * H];
      double* row = &prod.v[gf * G];
      for (std::size_t gm = 0; gm < G; ++gm) {
        if (row[gm] == 0.0) continue;
        double s = 0.0;
        for (std::size_t h1 = 0; h1 < H; ++h1) s += tf[h1] * w[h1 * G + gm];
        row[gm] *= s;
      }
    }
    prod.logScale += u.logScale;
    prod.rescale();
  }

  Scaled out;
  if (target == kFatherTarget) {
    out.v.assign(G, 0.0);
    for (std::size_t gf = 0; gf < G; ++gf) {
      double s = 0.0;
      for (std::size_t gm = 0; gm < G; ++gm) s += mother.v[gm] * prod.v[gf * G + gm];
      out.v[gf] = s;
    }
    out.logScale = prod.logScale + mother.logScale;
  } else if (target == kMotherTarget) {
    out.v.assign(G, 0.0);
    for (std::size_t gf = 0; gf < G; ++gf) {
      const double a = father.v[gf];
      if (a == 0.0) continue;
      for (std::size_t gm = 0; gm < G; ++gm) out.v[gm] += a * prod.v[gf * G + gm];
    }
    out.logScale = prod.logScale + father.logScale;
  } else if (target == kNoTarget) {
    double s = 0.0;
    for (std::size_t gf = 0; gf < G; ++gf) {
      const double a = father.v[gf];
      if (a == 0.0) continue;
      double r = 0.0;
      for (std::size_t gm = 0; gm < G; ++gm) r += mother.v[gm] * prod.v[gf * G + gm];
      s += a * r;
    }
    out.v.assign(1, s);
    out.logScale = prod.logScale + father.logScale + mother.logScale;
  } else {
    std::vector<double> r(G * H, 0.0);
    for (std::size_t gf = 0; gf < G; ++gf) {
      const double a = father.v[gf];
      if (a == 0.0) continue;
      for (std::size_t gm = 0; gm < G; ++gm) {
        const double q = a * mother.v[gm] * prod.v[gf * G + gm];
        if (q == 0.0) continue;
        for (std::size_t h2 = 0; h2 < H; ++h2) r[gf * H + h2] += q * trans[gm * H + h2];
      }
    }
    out.v.assign(G, 0.0);
    for (std::size_t gf = 0; gf < G; ++gf) {
      for (std::size_t h1 = 0; h1 < H; ++h1) {
        const double t = trans[gf * H + h1];
        if (t == 0.0) continue;
        for (std::size_t h2 = 0; h2 < H; ++h2) out.v[h1 * H + h2] += t * r[gf * H + h2];
      }
    }
    out.logScale = prod.logScale + father.logScale + mother.logScale;
  }
  out.rescale();
  return out;
}

}  // namespace detail

// Peels a loop-free pedigree one nuclear family at a time. Evidence vectors
// are built once, so repeated evaluation over a chi grid is cheap.
class PeelingEngine {
 public:
  PeelingEngine(const Pedigree& p, const TwoLocusModel& m, const ObservedData& d)
      : space_(m), order_(peeling_order(p)), size_(p.size()) {
    for (auto& e : detail::evidence_vectors(p, m, d)) {
      detail::Scaled s{std::move(e), 0.0};
      s.rescale();
      evidence_.push_back(std::move(s));
    }
  }

  const PeelingOrder& order() const { return order_; }
  const GenotypeSpace& space() const { return space_; }

  // Natural-log likelihood; chi may be any value in [0, 1]. Returns -inf when
  // the data are impossible.
  double loglik(double chi) const {
    const auto trans = detail::transmission_table(space_, chi);
    std::vector<detail::Scaled> acc = evidence_;
    double total = 0.0;
    for (std::size_t s : order_.singletons) total += acc[s].log_total();
    for (const auto& step : order_.steps) {
      const auto kids = kid_pointers(acc, step.family);
      const int target = step.pivot ? target_of(step.family, *step.pivot) : detail::kNoTarget;
      auto msg = detail::family_message(space_, trans, acc[step.family.father], acc[step.family.mother],
                                        kids, target);
      if (step.pivot) {
        acc[*step.pivot].multiply(msg);
      } else {
        total += msg.log_total();
      }
    }
    return std::isnan(total) ? -std::numeric_limits<double>::infinity() : total;
  }

  // Collect pass toward each component's final family, then a distribute
  // pass back out, giving every individual its full set of incoming messages.
  GenotypePosteriors posteriors(double chi) const {
    const auto trans = detail::transmission_table(space_, chi);
    const auto& steps = order_.steps;
    // inbound[s][k]: message from step s's family into its k-th member.
    std::vector<std::vector<detail::Scaled>> inbound(steps.size());
    std::vector<std::vector<std::size_t>> memberOf(size_);
    std::vector<detail::Scaled> acc = evidence_;

    for (std::size_t s = 0; s < steps.size(); ++s) {
      const auto& fam = steps[s].family;
      const auto members = fam.members();
      inbound[s].resize(members.size());
      for (std::size_t k = 0; k < members.size(); ++k) memberOf[members[k]].push_back(s);
      if (!steps[s].pivot) continue;
      const auto kids = kid_pointers(acc, fam);
      const int target = target_of(fam, *steps[s].pivot);
      auto msg = detail::family_message(space_, trans, acc[fam.father], acc[fam.mother], kids, target);
      acc[*steps[s].pivot].multiply(msg);
      inbound[s][slot_of(fam, *steps[s].pivot)] = std::move(msg);
    }

    auto incoming_except = [&](std::size_t person, std::size_t skipStep) {
      detail::Scaled u = evidence_[person];
      for (std::size_t s : memberOf[person]) {
        if (s == skipStep) continue;
        u.multiply(inbound[s][slot_of(steps[s].family, person)]);
      }
      return u;
    };

    for (std::size_t s = steps.size(); s-- > 0;) {
      const auto& fam = steps[s].family;
      const auto members = fam.members();
      std::vector<detail::Scaled> in(members.size());
      for (std::size_t k = 0; k < members.size(); ++k) in[k] = incoming_except(members[k], s);
      std::vector<const detail::Scaled*> kids;
      for (std::size_t k = 2; k < members.size(); ++k) kids.push_back(&in[k]);
      for (std::size_t k = 0; k < members.size(); ++k) {
        if (steps[s].pivot && members[k] == *steps[s].pivot) continue;
        const int target = k == 0 ? detail::kFatherTarget
                           : k == 1 ? detail::kMotherTarget
                                    : static_cast<int>(k - 2);
        inbound[s][k] = detail::family_message(space_, trans, in[0], in[1], kids, target);
      }
    }

    GenotypePosteriors out{space_, {}, {}, loglik(chi)};
    detail::require(std::isfinite(out.logLik), Errc::InconsistentData,
                    "data have zero probability; posteriors are undefined");
    for (std::size_t i = 0; i < size_; ++i) {
      detail::Scaled u = incoming_except(i, steps.size());
      out.logNormalizers.push_back(u.log_total());
      double sum = 0.0;
      for (double x : u.v) sum += x;
      for (double& x : u.v) x /= sum;
      out.probabilities.push_back(std::move(u.v));
    }
    return out;
  }

 private:
  static int target_of(const NuclearFamily& fam, std::size_t person) {
    if (person == fam.father) return detail::kFatherTarget;
    if (person == fam.mother) return detail::kMotherTarget;
    const auto it = std::find(fam.children.begin(), fam.children.end(), person);
    return static_cast<int>(it - fam.children.begin());
  }
  static std::size_t slot_of(const NuclearFamily& fam, std::size_t person) {
    const auto members = fam.members();
    return static_cast<std::size_t>(std::find(members.begin(), members.end(), person) - members.begin());
  }
  static std::vector<const detail::Scaled*> kid_pointers(const std::vector<detail::Scaled>& acc,
                                                         const NuclearFamily& fam) {
    std::vector<const detail::Scaled*> kids;
    for (std::size_t c : fam.children) kids.push_back(&acc[c]);
    return kids;
  }

  GenotypeSpace space_;
  PeelingOrder order_;
  std::size_t size_;
  std::vector<detail::Scaled> evidence_;
};

}  // namespace linkage
