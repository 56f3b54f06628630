#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "linkage/data.hpp"
#include "linkage/enumerate.hpp"
#include "linkage/model.hpp"
#include "linkage/peeling.hpp"
#include "linkage/pedigree.hpp"

namespace linkage {

inline constexpr double kNullChi = 0.5;

// One family's likelihood as a function of chi. Loop-free pedigrees are
// peeled; looped ones fall back to enumeration, subject to its size limit.
class FamilyLikelihood {
 public:
  FamilyLikelihood(const Pedigree& p, const TwoLocusModel& m, const ObservedData& d,
                   std::size_t enumerationLimit = kDefaultEnumerationLimit) {
    check_data(p, m, d);
    if (is_loop_free(p)) {
      engine_.emplace(p, m, d);
    } else {
      detail::require(p.size() <= enumerationLimit, Errc::TooLargeToEnumerate,
                      "family " + p.family_id() + " has a loop and is too large to enumerate");
      fallback_ = [p, m, d, enumerationLimit](double chi) {
        return detail::brute_force_loglik_raw(p, m, d, chi, enumerationLimit);
      };
    }
  }

  bool peeled() const { return engine_.has_value(); }

  // chi may be anywhere in [0, 1]; values above 1/2 are the analytic
  // continuation used for derivatives at eta = 0.
  double loglik(double chi) const { return engine_ ? engine_->loglik(chi) : fallback_(chi); }

 private:
  std::optional<PeelingEngine> engine_;
  std::function<double(double)> fallback_;
};

// Natural-log likelihood; -inf flags data that are impossible under the model.
inline double pedigree_loglik(const Pedigree& p, const TwoLocusModel& m, const ObservedData& d, double chi) {
  RecombinationParam{chi};
  return FamilyLikelihood(p, m, d).loglik(chi);
}

// Same likelihood on the eta = 1 - 2 chi scale, accepting eta in [-1, 1].
inline double pedigree_loglik_eta(const Pedigree& p, const TwoLocusModel& m, const ObservedData& d, double eta) {
  detail::require(eta >= -1.0 && eta <= 1.0, Errc::InvalidArgument, "eta must lie in [-1, 1]");
  return FamilyLikelihood(p, m, d).loglik((1.0 - eta) / 2.0);
}

inline GenotypePosteriors posterior_genotypes(const Pedigree& p, const TwoLocusModel& m, const ObservedData& d,
                                              double chi) {
  RecombinationParam{chi};
  if (is_loop_free(p)) return PeelingEngine(p, m, d).posteriors(chi);
  return brute_force_posteriors(p, m, d, chi);
}

struct LodPoint {
  double chi = 0.0;
  double lod = 0.0;
};

struct LodCurve {
  std::vector<LodPoint> points;

  std::vector<double> chis() const {
    std::vector<double> out;
    for (const auto& pt : points) out.push_back(pt.chi);
    return out;
  }
};

// Base-10 lods for a list of independent families. The null likelihoods are
// computed once; a family whose data are impossible even at chi = 1/2 is
// inconsistent and rejected up front.
class LodEvaluator {
 public:
  LodEvaluator(std::span<const Family> families, const TwoLocusModel& m) {
    for (const auto& f : families) {
      fams_.emplace_back(f.pedigree, m, f.data);
      nulls_.push_back(fams_.back().loglik(kNullChi));
      detail::require(std::isfinite(nulls_.back()), Errc::InconsistentData,
                      "family " + f.pedigree.family_id() + " has zero likelihood under no linkage");
    }
  }

  std::size_t family_count() const { return fams_.size(); }

  double family_lod(std::size_t f, double chi) const {
    return (fams_[f].loglik(chi) - nulls_[f]) / std::numbers::ln10;
  }

  std::vector<double> family_lods(double chi) const {
    RecombinationParam{chi};
    std::vector<double> out;
    for (std::size_t f = 0; f < fams_.size(); ++f) out.push_back(family_lod(f, chi));
    return out;
  }

  double lod(double chi) const {
    double total = 0.0;
    for (double x : family_lods(chi)) total += x;
    return total;
  }

 private:
  std::vector<FamilyLikelihood> fams_;
  std::vector<double> nulls_;
};

inline double lod(std::span<const Family> families, const TwoLocusModel& m, double chi) {
  return LodEvaluator(families, m).lod(chi);
}

// Evenly spaced chi values lo, lo+step, ..., hi with hi hit exactly.
inline std::vector<double> chi_grid(double lo, double step, double hi) {
  detail::require(lo >= 0.0 && hi <= 0.5 && lo <= hi, Errc::InvalidArgument, "grid must lie within [0, 1/2]");
  detail::require(step > 0.0, Errc::InvalidArgument, "grid step must be positive");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  if (std::abs(out.back() - hi) <= step * 1e-9) {
    out.back() = hi;
  } else {
    out.push_back(hi);
  }
  return out;
}

inline std::vector<double> default_chi_grid() { return chi_grid(0.0, 0.01, 0.5); }

inline LodCurve lod_curve(const LodEvaluator& eval, std::span<const double> grid) {
  LodCurve curve;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    detail::require(i == 0 || grid[i] > grid[i - 1], Errc::InvalidArgument, "chi grid must increase strictly");
    curve.points.push_back({grid[i], eval.lod(grid[i])});
  }
  return curve;
}

inline LodCurve lod_curve(std::span<const Family> families, const TwoLocusModel& m, std::span<const double> grid) {
  return lod_curve(LodEvaluator(families, m), grid);
}

struct MleResult {
  double chiHat = kNullChi;
  double maxLod = 0.0;
  // Set when the best lod is below 1e-12: the data carry no evidence for
  // linkage and chiHat is reported as 1/2.
  bool flat = false;
};

namespace detail {

inline constexpr double kInvGolden = 0.6180339887498949;

// Maximiser of a unimodal function on [a, b] to interval width `tol`.
template <class F>
double golden_section_max(F&& f, double a, double b, double tol) {
  double c = b - kInvGolden * (b - a);
  double d = a + kInvGolden * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvGolden * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvGolden * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

inline MleResult mle_recombination(const LodEvaluator& eval) {
  constexpr std::size_t kGridPoints = 512;
  constexpr double kTolerance = 1e-6;
  std::vector<double> grid(kGridPoints);
  std::vector<double> values(kGridPoints);
  std::size_t best = 0;
  for (std::size_t i = 0; i < kGridPoints; ++i) {
    grid[i] = 0.5 * static_cast<double>(i) / static_cast<double>(kGridPoints - 1);
    values[i] = eval.lod(grid[i]);
    if (values[i] > values[best]) best = i;
  }
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[best + 1 == kGridPoints ? best : best + 1];
  const double inner = detail::golden_section_max([&](double x) { return eval.lod(x); }, lo, hi, kTolerance);

  MleResult r{grid[best], values[best], false};
  for (double candidate : {lo, hi, inner}) {
    const double v = eval.lod(candidate);
    if (v > r.maxLod) r = {candidate, v, false};
  }
  if (!(r.maxLod >= 1e-12)) return {kNullChi, eval.lod(kNullChi), true};
  return r;
}

inline MleResult mle_recombination(std::span<const Family> families, const TwoLocusModel& m) {
  return mle_recombination(LodEvaluator(families, m));
}

// Multinomial category whose probability depends on eta. The analytic
// derivative at eta = 0 is used when supplied.
struct ScoreCategory {
  double pAtNull = 0.0;
  std::function<double(double)> probability;
  std::function<double(double)> derivative;
};

struct ScoreReport {
  double score = 0.0;
  double information = 0.0;
  double informationPerObservation = 0.0;
  std::vector<double> categoryScores;
};

inline constexpr double kScoreStep = 1e-5;

inline ScoreReport finney_score(std::span<const ScoreCategory> categories, std::span<const std::uint64_t> counts) {
  using detail::require;
  require(categories.size() == counts.size(), Errc::InvalidArgument, "categories and counts differ in length");
  double totalP = 0.0;
  for (const auto& c : categories) {
    require(c.pAtNull >= 0.0, Errc::InvalidArgument, "negative category probability");
    totalP += c.pAtNull;
  }
  require(std::abs(totalP - 1.0) <= 1e-9, Errc::InvalidArgument, "null category probabilities must sum to 1");

  ScoreReport r;
  double n = 0.0;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const auto& c = categories[i];
    double a = 0.0;
    if (c.pAtNull == 0.0) {
      require(counts[i] == 0, Errc::NullProbabilityZero,
              "category " + std::to_string(i) + " has zero probability at eta = 0 but was observed");
    } else if (c.derivative) {
      a = c.derivative(0.0) / c.pAtNull;
    } else {
      a = (c.probability(kScoreStep) - c.probability(-kScoreStep)) / (2.0 * kScoreStep) / c.pAtNull;
    }
    r.categoryScores.push_back(a);
    r.score += a * static_cast<double>(counts[i]);
    r.informationPerObservation += c.pAtNull * a * a;
    n += static_cast<double>(counts[i]);
  }
  r.information = n * r.informationPerObservation;
  return r;
}

}  // namespace linkage
