#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "linkage/corpus.hpp"
#include "linkage/detect.hpp"
#include "linkage/enumerate.hpp"
#include "linkage/likelihood.hpp"
#include "random_pedigrees.hpp"

using namespace linkage;
using designs::child;
using designs::founder;

namespace {

TwoLocusModel model_with(PenetranceModel pm, std::vector<double> marker = {0.3, 0.7}) {
  return TwoLocusModel(Locus({0.2, 0.8}, "trait"), Locus(std::move(marker), "marker"), std::move(pm));
}

// Closed-form lod of a phase-known backcross with n non-recombinant and k
// recombinant children.
double backcross_lod(int n, int k, double chi) {
  double l = 0.0;
  if (n) l += n * std::log10(2.0 * (1.0 - chi));
  if (k) l += k * std::log10(2.0 * chi);
  return l;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(PedigreeLoglik, SingleFounderHeterozygote) {
  const auto p = validate_pedigree({founder("1", Sex::Female)});
  ObservedData d = ObservedData::unknown(1);
  d[0].marker = MarkerGenotype(0, 1);
  const auto m = model_with(PenetranceModel::dominant());
  EXPECT_NEAR(pedigree_loglik(p, m, d, 0.2), std::log(2 * 0.3 * 0.7), 1e-14);
}

TEST(PedigreeLoglik, AllUnknownIsZero) {
  const auto m = model_with(PenetranceModel::dominant(0.8, 0.05));
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto p = fixtures::random_loop_free_pedigree(s, 12);
    EXPECT_NEAR(pedigree_loglik(p, m, ObservedData::unknown(p.size()), 0.1), 0.0, 1e-12);
  }
  EXPECT_NEAR(brute_force_loglik(designs::nuclear(1), m, ObservedData::unknown(3), 0.3), 0.0, 1e-12);
}

TEST(PedigreeLoglik, BackcrossTrioMatchesEnumeration) {
  const auto p = designs::nuclear(1);
  ObservedData d = ObservedData::unknown(3);
  d[0] = {Phenotype::Affected, MarkerGenotype(0, 1)};
  d[1] = {Phenotype::Unaffected, MarkerGenotype(1, 1)};
  d[2] = {Phenotype::Affected, MarkerGenotype(0, 1)};
  const auto m = model_with(PenetranceModel::dominant());
  const double peeled = pedigree_loglik(p, m, d, 0.1);
  EXPECT_LE(rel(peeled, brute_force_loglik(p, m, d, 0.1)), 1e-10);
}

TEST(PedigreeLoglik, ImpossibleDataIsNegativeInfinity) {
  const auto p = designs::nuclear(1);
  ObservedData d = ObservedData::unknown(3);
  d[0].marker = MarkerGenotype(0, 0);
  d[1].marker = MarkerGenotype(0, 0);
  d[2].marker = MarkerGenotype(1, 1);
  const auto m = model_with(PenetranceModel::dominant());
  EXPECT_EQ(pedigree_loglik(p, m, d, 0.1), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(brute_force_loglik(p, m, d, 0.1), -std::numeric_limits<double>::infinity());
  EXPECT_THROW(posterior_genotypes(p, m, d, 0.1), Error);
}

TEST(BruteForce, GuardAtNineIndividuals) {
  const auto p = designs::nuclear(7);
  const auto m = model_with(PenetranceModel::dominant());
  try {
    brute_force_loglik(p, m, ObservedData::unknown(9), 0.1);
    FAIL() << "expected TooLargeToEnumerate";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TooLargeToEnumerate);
  }
}

TEST(BruteForce, DataSizeMismatchRejected) {
  const auto m = model_with(PenetranceModel::dominant());
  EXPECT_THROW(pedigree_loglik(designs::nuclear(1), m, ObservedData::unknown(2), 0.1), Error);
}

// Random loop-free pedigrees, random models and random data from gene drop.
TEST(PedigreeLoglik, PeelingMatchesEnumeration) {
  Rng rng(99);
  for (std::uint64_t s = 0; s < 60; ++s) {
    const auto p = fixtures::random_loop_free_pedigree(s, 3 + s % 4);
    const double f = 0.05 + 0.9 * rng.uniform();
    const double pen = 0.5 + 0.5 * rng.uniform();
    const auto m = TwoLocusModel(Locus({f, 1.0 - f}), Locus({0.2, 0.3, 0.5}),
                                 s % 3 == 0   ? PenetranceModel::dominant(pen, 0.02)
                                 : s % 3 == 1 ? PenetranceModel::recessive(pen, 0.01)
                                              : PenetranceModel::of(0.9, 0.5, 0.1));
    const SimConfig cfg{0.1, 1, 5, 0.3};
    const auto d = gene_drop(p, m, cfg, s);
    for (double chi : {0.0, 0.05, 0.1, 0.3, 0.5}) {
      const double a = pedigree_loglik(p, m, d, chi);
      const double b = brute_force_loglik(p, m, d, chi);
      if (std::isinf(b)) {
        EXPECT_EQ(a, b);
      } else {
        EXPECT_LE(rel(a, b), 1e-10) << "seed " << s << " chi " << chi;
      }
    }
  }
}

TEST(PedigreeLoglik, LoopedPedigreeFallsBackToEnumeration) {
  // Sibs 3 and 4 have a child together: an inbreeding loop.
  const auto p = validate_pedigree({founder("1", Sex::Male), founder("2", Sex::Female), child("3", "1", "2", Sex::Male),
                                    child("4", "1", "2", Sex::Female), child("5", "3", "4")});
  const auto m = model_with(PenetranceModel::recessive());
  ObservedData d = ObservedData::unknown(5);
  d[4] = {Phenotype::Affected, MarkerGenotype(0, 0)};
  const FamilyLikelihood fl(p, m, d);
  EXPECT_FALSE(fl.peeled());
  EXPECT_EQ(fl.loglik(0.2), brute_force_loglik(p, m, d, 0.2));
}

TEST(PedigreeLoglik, NoUnderflowOnLargeSibship) {
  const auto fam = designs::phase_known_backcross(400, 100);
  const auto m = designs::backcross_model();
  const LodEvaluator eval(std::span<const Family>(&fam, 1), m);
  for (double chi : {0.05, 0.2, 0.4}) EXPECT_LE(rel(eval.lod(chi), backcross_lod(400, 100, chi)), 1e-10);
  EXPECT_TRUE(std::isfinite(pedigree_loglik(fam.pedigree, m, fam.data, 0.2)));
}

TEST(PedigreeLoglik, InvariantUnderMarkerRelabeling) {
  const std::vector<double> freq{0.2, 0.3, 0.5};
  const std::vector<std::size_t> perm{2, 0, 1};
  std::vector<double> permuted(3);
  for (std::size_t a = 0; a < 3; ++a) permuted[perm[a]] = freq[a];
  const auto m1 = model_with(PenetranceModel::dominant(0.9, 0.05), freq);
  const auto m2 = model_with(PenetranceModel::dominant(0.9, 0.05), permuted);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto p = fixtures::random_loop_free_pedigree(s, 10);
    const auto d = gene_drop(p, m1, SimConfig{0.1, 1, 11, 0.2}, s);
    ObservedData d2 = d;
    for (auto& o : d2.records)
      if (o.marker) o.marker = MarkerGenotype(perm[o.marker->first], perm[o.marker->second]);
    EXPECT_LE(rel(pedigree_loglik(p, m1, d, 0.15), pedigree_loglik(p, m2, d2, 0.15)), 1e-12);
  }
}

TEST(Lod, ZeroAtNullExactly) {
  for (const auto& c : self_test_corpus()) {
    EXPECT_EQ(lod(std::span<const Family>(&c.family, 1), c.model, 0.5), 0.0) << c.name;
  }
}

TEST(Lod, TenNonRecombinantMeioses) {
  const auto fam = designs::phase_known_backcross(10, 0);
  const auto m = designs::backcross_model();
  EXPECT_NEAR(lod(std::span<const Family>(&fam, 1), m, 0.0), 10 * std::log10(2.0), 1e-12);
}

TEST(Lod, MatchesClosedFormBackcross) {
  const auto m = designs::backcross_model();
  for (int k = 0; k <= 4; ++k) {
    const auto fam = designs::phase_known_backcross(8 - k, k);
    const LodEvaluator eval(std::span<const Family>(&fam, 1), m);
    for (double chi : {0.01, 0.1, 0.25, 0.4, 0.5}) EXPECT_NEAR(eval.lod(chi), backcross_lod(8 - k, k, chi), 1e-12);
  }
}

TEST(Lod, AdditiveAcrossFamilies) {
  const auto corpus = self_test_corpus();
  std::vector<Family> fams;
  const auto& m = corpus[0].model;
  for (const auto& c : corpus)
    if (c.name.ends_with("/dominant")) fams.push_back(c.family);
  const LodEvaluator eval(fams, m);
  for (double chi : {0.0, 0.05, 0.1, 0.3}) {
    double sum = 0.0;
    for (const auto& f : fams) sum += lod(std::span<const Family>(&f, 1), m, chi);
    EXPECT_NEAR(eval.lod(chi), sum, 1e-12);
  }
}

TEST(Lod, InconsistentAtNullRejected) {
  Family fam{designs::nuclear(1), ObservedData::unknown(3)};
  fam.data[0].marker = MarkerGenotype(0, 0);
  fam.data[1].marker = MarkerGenotype(0, 0);
  fam.data[2].marker = MarkerGenotype(1, 1);
  try {
    LodEvaluator(std::span<const Family>(&fam, 1), model_with(PenetranceModel::dominant()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InconsistentData);
  }
}

TEST(ChiGrid, DefaultGridEndsAtHalf) {
  const auto g = default_chi_grid();
  ASSERT_EQ(g.size(), 51u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 0.5);
  EXPECT_THROW(chi_grid(0.0, 0.0, 0.5), Error);
  EXPECT_THROW(chi_grid(0.0, 0.1, 0.6), Error);
}

TEST(Mle, BoundaryAtZero) {
  const auto fam = designs::phase_known_backcross(10, 0);
  const auto r = mle_recombination(std::span<const Family>(&fam, 1), designs::backcross_model());
  EXPECT_EQ(r.chiHat, 0.0);
  EXPECT_NEAR(r.maxLod, 3.0103, 1e-4);
  EXPECT_FALSE(r.flat);
}

TEST(Mle, BinomialProportion) {
  const auto fam = designs::phase_known_backcross(8, 2);
  const auto r = mle_recombination(std::span<const Family>(&fam, 1), designs::backcross_model());
  EXPECT_NEAR(r.chiHat, 0.2, 1e-4);
  EXPECT_NEAR(r.maxLod, backcross_lod(8, 2, 0.2), 1e-9);
}

TEST(Mle, NullMatchingData) {
  const auto fam = designs::phase_known_backcross(5, 5);
  const auto r = mle_recombination(std::span<const Family>(&fam, 1), designs::backcross_model());
  EXPECT_EQ(r.chiHat, 0.5);
  EXPECT_EQ(r.maxLod, 0.0);
}

TEST(EfficientScore, ConstantCategories) {
  const std::vector<ScoreCategory> cats{{0.4, [](double) { return 0.4; }, nullptr},
                                        {0.6, [](double) { return 0.6; }, nullptr}};
  const std::vector<std::uint64_t> counts{5, 7};
  const auto r = finney_score(cats, counts);
  EXPECT_NEAR(r.score, 0.0, 1e-12);
  EXPECT_NEAR(r.information, 0.0, 1e-12);
}

TEST(EfficientScore, TwoCategoryFamily) {
  const std::vector<ScoreCategory> cats{{0.5, [](double e) { return 0.5 * (1 + e); }, nullptr},
                                        {0.5, [](double e) { return 0.5 * (1 - e); }, nullptr}};
  const std::vector<std::uint64_t> counts{3, 1};
  const auto r = finney_score(cats, counts);
  ASSERT_EQ(r.categoryScores.size(), 2u);
  EXPECT_NEAR(r.categoryScores[0], 1.0, 1e-9);
  EXPECT_NEAR(r.categoryScores[1], -1.0, 1e-9);
  EXPECT_NEAR(r.score, 2.0, 1e-9);
  EXPECT_NEAR(r.informationPerObservation, 1.0, 1e-9);
  EXPECT_NEAR(r.information, 4.0, 1e-8);
}

TEST(EfficientScore, AnalyticDerivativePreferred) {
  const std::vector<ScoreCategory> cats{{0.5, nullptr, [](double) { return 0.5; }},
                                        {0.5, nullptr, [](double) { return -0.5; }}};
  const std::vector<std::uint64_t> counts{3, 1};
  const auto r = finney_score(cats, counts);
  EXPECT_EQ(r.score, 2.0);
  EXPECT_EQ(r.informationPerObservation, 1.0);
}

TEST(EfficientScore, Rejections) {
  const std::vector<ScoreCategory> cats{{0.0, [](double e) { return e; }, nullptr},
                                        {1.0, [](double e) { return 1 - e; }, nullptr}};
  const std::vector<std::uint64_t> bad{1, 1};
  try {
    finney_score(cats, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NullProbabilityZero);
  }
  const std::vector<ScoreCategory> unnormalised{{0.3, nullptr, nullptr}};
  const std::vector<std::uint64_t> one{1};
  EXPECT_THROW(finney_score(unnormalised, one), Error);
}

// Central finite difference of the summed pedigree log-likelihood in eta
// against the category score built from the same pedigree's data law. The
// grandparents make phase informative; phase-unknown sibships have zero score.
TEST(EfficientScore, MatchesPedigreeFiniteDifference) {
  const auto p = designs::three_generation(1);
  const auto m = model_with(PenetranceModel::dominant(0.9, 0.05), {0.5, 0.5});
  const auto law = data_law_categories(p, m);
  std::vector<std::uint64_t> counts(law.categories.size(), 0);
  const SimConfig cfg{0.2, 1, 3, 0.0};
  for (std::uint64_t r = 0; r < 200; ++r) {
    const auto d = gene_drop(p, m, cfg, r);
    for (std::size_t i = 0; i < law.configurations.size(); ++i)
      if (law.configurations[i] == d) ++counts[i];
  }
  const auto report = finney_score(law.categories, counts);
  double plus = 0.0;
  double minus = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (!counts[i]) continue;
    const double x = static_cast<double>(counts[i]);
    plus += x * pedigree_loglik_eta(p, m, law.configurations[i], kScoreStep);
    minus += x * pedigree_loglik_eta(p, m, law.configurations[i], -kScoreStep);
  }
  const double fd = (plus - minus) / (2 * kScoreStep);
  ASSERT_GT(std::abs(report.score), 1.0);
  EXPECT_LE(std::abs(fd - report.score), 1e-6 * std::abs(report.score));
  EXPECT_GT(report.information, 0.0);
}

TEST(Posteriors, MatchEnumerationAndNormalizers) {
  const auto corpus = self_test_corpus();
  for (const auto& c : corpus) {
    const auto& f = c.family;
    const auto peeled = posterior_genotypes(f.pedigree, c.model, f.data, 0.1);
    const auto brute = brute_force_posteriors(f.pedigree, c.model, f.data, 0.1);
    const double ll = pedigree_loglik(f.pedigree, c.model, f.data, 0.1);
    for (std::size_t i = 0; i < f.pedigree.size(); ++i) {
      EXPECT_LE(rel(peeled.logNormalizers[i], ll), 1e-10) << c.name;
      double total = 0.0;
      for (std::size_t g = 0; g < peeled.space.genotypes(); ++g) {
        EXPECT_NEAR(peeled.probabilities[i][g], brute.probabilities[i][g], 1e-10) << c.name;
        total += peeled.probabilities[i][g];
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(Posteriors, FounderPointMass) {
  // Recessive, fully penetrant: an affected founder typed 1/1 must be DD
  // with marker 1 on both haplotypes.
  const auto p = validate_pedigree({founder("1", Sex::Male)});
  ObservedData d = ObservedData::unknown(1);
  d[0] = {Phenotype::Affected, MarkerGenotype(0, 0)};
  const auto post = posterior_genotypes(p, model_with(PenetranceModel::recessive()), d, 0.3);
  EXPECT_DOUBLE_EQ(post.probability(0, {{0, 0}, {0, 0}}), 1.0);
}

TEST(DataFile, ParsesFamiliesAndWarnings) {
  const auto parsed = parse_families(
      "# comment\n"
      "A 1 0 0 1 2 1 2\n"
      "A 2 0 0 2 1 2 2\n"
      "\n"
      "A 3 1 2 1 2 1 0\n"
      "B 1 0 0 0\n");
  ASSERT_EQ(parsed.families.size(), 2u);
  const auto& a = parsed.families[0];
  EXPECT_EQ(a.pedigree.family_id(), "A");
  EXPECT_EQ(a.data[0].phenotype, Phenotype::Affected);
  EXPECT_EQ(*a.data[0].marker, MarkerGenotype(0, 1));
  EXPECT_FALSE(a.data[2].marker.has_value());
  ASSERT_EQ(parsed.warnings.size(), 1u);
  EXPECT_NE(parsed.warnings[0].find("line 5"), std::string::npos);
  EXPECT_TRUE(parsed.families[1].data[0].is_missing());
}

TEST(DataFile, RoundTrip) {
  const auto fam = designs::phase_known_backcross(3, 1, "F7");
  std::ostringstream out;
  write_families(out, {fam});
  const auto back = parse_families(out.str());
  ASSERT_EQ(back.families.size(), 1u);
  EXPECT_EQ(back.families[0].pedigree, fam.pedigree);
  EXPECT_EQ(back.families[0].data, fam.data);
}

TEST(DataFile, ParseErrorsNameTheLine) {
  try {
    parse_families("A 1 0 0 1\nA 2 0 0 1 2\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_families("A 1 0 0 3\n"), Error);
  EXPECT_THROW(parse_families("A 1 0 0 1 2 x 1\n"), Error);
}
