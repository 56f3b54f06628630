#include <gtest/gtest.h>

#include <algorithm>
#include <queue>
#include <set>

#include "linkage/corpus.hpp"
#include "linkage/pedigree.hpp"
#include "random_pedigrees.hpp"

using namespace linkage;
using designs::child;
using designs::founder;

namespace {

Errc error_of(std::vector<Individual> raw) {
  try {
    validate_pedigree(std::move(raw));
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return Errc::InvalidArgument;
}

// Nodes reachable from `start` in the individual/mating graph with `removed` deleted.
std::set<std::size_t> reachable(const Pedigree& p, std::size_t start, std::size_t removed) {
  const auto fams = nuclear_families(p);
  std::set<std::size_t> seen{start};
  std::queue<std::size_t> q;
  q.push(start);
  while (!q.empty()) {
    const auto i = q.front();
    q.pop();
    for (const auto& f : fams) {
      const auto m = f.members();
      if (std::find(m.begin(), m.end(), i) == m.end()) continue;
      for (auto j : m)
        if (j != removed && seen.insert(j).second) q.push(j);
    }
  }
  return seen;
}

}  // namespace

TEST(ValidatePedigree, TrioHasTwoFounders) {
  const auto p = validate_pedigree({founder("F", Sex::Male), founder("M", Sex::Female), child("C", "F", "M")});
  EXPECT_EQ(p.size(), 3u);
  const auto f = p.founders();
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(p[f[0]].id, "F");
  EXPECT_EQ(p[f[1]].id, "M");
  EXPECT_FALSE(p.is_founder(2));
}

TEST(ValidatePedigree, SelfParentIsCycle) {
  EXPECT_EQ(error_of({founder("M", Sex::Female), child("A", "A", "M")}), Errc::CycleDetected);
}

TEST(ValidatePedigree, HalfSpecifiedParents) {
  EXPECT_EQ(error_of({founder("F", Sex::Male), Individual{"C", "F", std::nullopt, Sex::Unknown}}),
            Errc::HalfSpecifiedParents);
}

TEST(ValidatePedigree, OtherErrors) {
  EXPECT_EQ(error_of({}), Errc::EmptyPedigree);
  EXPECT_EQ(error_of({founder("A", Sex::Male), founder("A", Sex::Male)}), Errc::DuplicateIndividual);
  EXPECT_EQ(error_of({founder("F", Sex::Male), child("C", "F", "X")}), Errc::MissingParent);
  EXPECT_EQ(error_of({child("A", "B", "C"), child("B", "A", "C"), founder("C", Sex::Female)}), Errc::CycleDetected);
}

TEST(ValidatePedigree, ChildrenMayPrecedeParentsInInput) {
  const auto p = validate_pedigree({child("C", "F", "M"), founder("F", Sex::Male), founder("M", Sex::Female)});
  const auto& order = p.topological_order();
  const auto pos = [&](std::size_t i) { return std::find(order.begin(), order.end(), i) - order.begin(); };
  EXPECT_LT(pos(1), pos(0));
  EXPECT_LT(pos(2), pos(0));
}

TEST(ValidatePedigree, Idempotent) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto p = fixtures::random_loop_free_pedigree(s, 12);
    std::vector<Individual> again(p.individuals().begin(), p.individuals().end());
    EXPECT_EQ(validate_pedigree(std::move(again), p.family_id()), p);
  }
}

TEST(ValidatePedigree, FounderAccounting) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto p = fixtures::random_loop_free_pedigree(s, 15);
    std::size_t nonFounders = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p.is_founder(i)) continue;
      ++nonFounders;
      EXPECT_NE(p.father_index(i), Pedigree::kNoParent);
      EXPECT_NE(p.mother_index(i), Pedigree::kNoParent);
    }
    EXPECT_EQ(p.founders().size() + nonFounders, p.size());
  }
}

TEST(IdLess, NumericAware) {
  EXPECT_TRUE(id_less("2", "10"));
  EXPECT_FALSE(id_less("10", "2"));
  EXPECT_TRUE(id_less("a", "b"));
  EXPECT_TRUE(id_less("10", "a"));
}

TEST(PeelingOrder, TrioOneStepNoPivot) {
  const auto order = peeling_order(designs::nuclear(1));
  ASSERT_EQ(order.steps.size(), 1u);
  EXPECT_FALSE(order.steps[0].pivot.has_value());
  EXPECT_TRUE(order.singletons.empty());
}

TEST(PeelingOrder, ThreeGenerationPivotIsMiddleParent) {
  const auto p = designs::three_generation(1);
  const auto order = peeling_order(p);
  ASSERT_EQ(order.steps.size(), 2u);
  ASSERT_TRUE(order.steps[0].pivot.has_value());
  EXPECT_EQ(p[*order.steps[0].pivot].id, "3");
  EXPECT_FALSE(order.steps[1].pivot.has_value());
}

TEST(PeelingOrder, FirstCousinMarriageIsLooped) {
  const auto p = validate_pedigree({founder("1", Sex::Male), founder("2", Sex::Female), child("3", "1", "2", Sex::Male),
                                    child("4", "1", "2", Sex::Female), founder("5", Sex::Female),
                                    founder("6", Sex::Male), child("7", "3", "5", Sex::Male),
                                    child("8", "6", "4", Sex::Female), child("9", "7", "8")});
  EXPECT_FALSE(is_loop_free(p));
  try {
    peeling_order(p);
    FAIL() << "expected LoopDetected";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::LoopDetected);
  }
}

TEST(PeelingOrder, LoneFounderIsSingleton) {
  const auto order = peeling_order(validate_pedigree({founder("1", Sex::Female)}));
  EXPECT_TRUE(order.steps.empty());
  EXPECT_EQ(order.singletons, std::vector<std::size_t>{0});
}

TEST(PeelingOrder, TieBreakPicksSmallestPivotId) {
  // Two children of 1 x 2 each found a family of their own; both outer
  // families are peelable first, pivot "3" must win over "4".
  const auto p = validate_pedigree({founder("1", Sex::Male), founder("2", Sex::Female), child("4", "1", "2"),
                                    child("3", "1", "2"), founder("5", Sex::Unknown), founder("6", Sex::Unknown),
                                    child("7", "4", "5"), child("8", "3", "6")});
  const auto order = peeling_order(p);
  ASSERT_EQ(order.steps.size(), 3u);
  EXPECT_EQ(p[*order.steps[0].pivot].id, "3");
  EXPECT_EQ(p[*order.steps[1].pivot].id, "4");
}

// Every individual is eliminated exactly once and each pivot cuts the peeled
// section from the rest.
TEST(PeelingOrder, PivotSeparatesPeeledFromRemaining) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto p = fixtures::random_loop_free_pedigree(s, 14);
    const auto order = peeling_order(p);
    std::vector<int> eliminated(p.size(), 0);
    for (auto i : order.singletons) ++eliminated[i];
    std::set<std::size_t> peeled;
    for (std::size_t k = 0; k < order.steps.size(); ++k) {
      const auto& step = order.steps[k];
      for (auto m : step.family.members())
        if (!step.pivot || m != *step.pivot) {
          ++eliminated[m];
          peeled.insert(m);
        }
      if (!step.pivot) continue;
      std::set<std::size_t> remaining;
      for (std::size_t j = k + 1; j < order.steps.size(); ++j)
        for (auto m : order.steps[j].family.members()) remaining.insert(m);
      remaining.erase(*step.pivot);
      ASSERT_FALSE(remaining.empty());
      const auto side = reachable(p, *remaining.begin(), *step.pivot);
      for (auto m : step.family.members())
        if (m != *step.pivot) {
          EXPECT_EQ(side.count(m), 0u) << "seed " << s;
        }
    }
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(eliminated[i], 1) << "seed " << s << " individual " << i;
    ASSERT_FALSE(order.steps.empty());
    EXPECT_FALSE(order.steps.back().pivot.has_value());
  }
}

TEST(NuclearFamilies, GroupsChildrenByParentPair) {
  const auto p = validate_pedigree({founder("1", Sex::Male), founder("2", Sex::Female), founder("3", Sex::Female),
                                    child("4", "1", "2"), child("5", "1", "3"), child("6", "1", "2")});
  const auto fams = nuclear_families(p);
  ASSERT_EQ(fams.size(), 2u);
  EXPECT_EQ(fams[0].children, (std::vector<std::size_t>{3, 5}));
  EXPECT_EQ(fams[1].children, (std::vector<std::size_t>{4}));
}
