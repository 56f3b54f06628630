#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linkage/error.hpp"

namespace linkage {

enum class Sex { Unknown, Male, Female };

struct Individual {
  std::string id;
  std::optional<std::string> father;
  std::optional<std::string> mother;
  Sex sex = Sex::Unknown;

  bool is_founder() const { return !father && !mother; }
  bool operator==(const Individual&) const = default;
};

// Identifiers that are both purely numeric compare by value, everything else
// lexicographically. Used for every deterministic tie-break.
inline bool id_less(std::string_view a, std::string_view b) {
  auto numeric = [](std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (numeric(a) && numeric(b)) {
    auto strip = [](std::string_view s) {
      const auto nz = s.find_first_not_of('0');
      return nz == std::string_view::npos ? std::string_view("0") : s.substr(nz);
    };
    const auto sa = strip(a);
    const auto sb = strip(b);
    if (sa.size() != sb.size()) return sa.size() < sb.size();
    if (sa != sb) return sa < sb;
  }
  return a < b;
}

class Pedigree {
 public:
  static constexpr std::ptrdiff_t kNoParent = -1;

  const std::string& family_id() const { return familyId_; }
  std::span<const Individual> individuals() const { return individuals_; }
  const Individual& operator[](std::size_t i) const { return individuals_[i]; }
  std::size_t size() const { return individuals_.size(); }

  std::ptrdiff_t father_index(std::size_t i) const { return father_[i]; }
  std::ptrdiff_t mother_index(std::size_t i) const { return mother_[i]; }
  bool is_founder(std::size_t i) const { return father_[i] == kNoParent; }

  std::vector<std::size_t> founders() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i)
      if (is_founder(i)) out.push_back(i);
    return out;
  }

  // Parents always precede their children.
  const std::vector<std::size_t>& topological_order() const { return topo_; }

  std::optional<std::size_t> index_of(std::string_view id) const {
    for (std::size_t i = 0; i < size(); ++i)
      if (individuals_[i].id == id) return i;
    return std::nullopt;
  }

  std::vector<std::size_t> children_of(std::size_t i) const {
    std::vector<std::size_t> out;
    const auto si = static_cast<std::ptrdiff_t>(i);
    for (std::size_t c = 0; c < size(); ++c)
      if (father_[c] == si || mother_[c] == si) out.push_back(c);
    return out;
  }

  bool operator==(const Pedigree& o) const {
    return familyId_ == o.familyId_ && individuals_ == o.individuals_;
  }

 private:
  friend Pedigree validate_pedigree(std::vector<Individual> raw, std::string familyId);

  std::string familyId_;
  std::vector<Individual> individuals_;
  std::vector<std::ptrdiff_t> father_;
  std::vector<std::ptrdiff_t> mother_;
  std::vector<std::size_t> topo_;
};

inline Pedigree validate_pedigree(std::vector<Individual> raw, std::string familyId = "1") {
  using detail::require;
  require(!raw.empty(), Errc::EmptyPedigree, "family " + familyId + " has no individuals");

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    require(index.emplace(raw[i].id, i).second, Errc::DuplicateIndividual,
            "individual " + raw[i].id + " listed twice in family " + familyId);
  }
  for (const auto& ind : raw) {
    require(ind.father != ind.id && ind.mother != ind.id, Errc::CycleDetected,
            "individual " + ind.id + " is listed as its own parent");
    require(ind.father.has_value() == ind.mother.has_value(), Errc::HalfSpecifiedParents,
            "individual " + ind.id + " has exactly one parent given");
    require(!ind.father || *ind.father != *ind.mother, Errc::InvalidArgument,
            "individual " + ind.id + " has the same father and mother");
    if (ind.father) {
      require(index.contains(*ind.father), Errc::MissingParent,
              "father " + *ind.father + " of " + ind.id + " is not in the pedigree");
      require(index.contains(*ind.mother), Errc::MissingParent,
              "mother " + *ind.mother + " of " + ind.id + " is not in the pedigree");
    }
  }

  Pedigree p;
  p.familyId_ = std::move(familyId);
  const std::size_t n = raw.size();
  p.father_.assign(n, Pedigree::kNoParent);
  p.mother_.assign(n, Pedigree::kNoParent);
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i].father) {
      p.father_[i] = static_cast<std::ptrdiff_t>(index.at(*raw[i].father));
      p.mother_[i] = static_cast<std::ptrdiff_t>(index.at(*raw[i].mother));
    }
  }

  // Kahn's algorithm; anything left unplaced sits on an ancestry cycle.
  std::vector<int> pending(n, 0);
  std::vector<std::vector<std::size_t>> kids(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (p.father_[i] != Pedigree::kNoParent) {
      pending[i] = 2;
      kids[static_cast<std::size_t>(p.father_[i])].push_back(i);
      kids[static_cast<std::size_t>(p.mother_[i])].push_back(i);
    }
  }
  std::vector<std::size_t> ready;
  for (std::size_t i = n; i-- > 0;)
    if (pending[i] == 0) ready.push_back(i);
  while (!ready.empty()) {
    const std::size_t i = ready.back();
    ready.pop_back();
    p.topo_.push_back(i);
    for (auto it = kids[i].rbegin(); it != kids[i].rend(); ++it)
      if (--pending[*it] == 0) ready.push_back(*it);
  }
  require(p.topo_.size() == n, Errc::CycleDetected,
          "family " + p.familyId_ + " contains an individual who is their own ancestor");

  p.individuals_ = std::move(raw);
  return p;
}

struct NuclearFamily {
  std::size_t father = 0;
  std::size_t mother = 0;
  std::vector<std::size_t> children;

  std::vector<std::size_t> members() const {
    std::vector<std::size_t> m{father, mother};
    m.insert(m.end(), children.begin(), children.end());
    return m;
  }
  bool operator==(const NuclearFamily&) const = default;
};

// Mating pairs with their children, in order of each pair's first child.
inline std::vector<NuclearFamily> nuclear_families(const Pedigree& p) {
  std::vector<NuclearFamily> out;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> slot;
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (p.is_founder(c)) continue;
    const auto key = std::pair{static_cast<std::size_t>(p.father_index(c)),
                               static_cast<std::size_t>(p.mother_index(c))};
    auto [it, fresh] = slot.emplace(key, out.size());
    if (fresh) out.push_back(NuclearFamily{key.first, key.second, {}});
    out[it->second].children.push_back(c);
  }
  return out;
}

struct PeelStep {
  NuclearFamily family;
  // Member through which the peeled section attaches to the rest; empty on
  // the last step of each connected component.
  std::optional<std::size_t> pivot;
};

struct PeelingOrder {
  std::vector<PeelStep> steps;
  // Individuals that belong to no nuclear family (e.g. a lone founder).
  std::vector<std::size_t> singletons;
};

namespace detail {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

}  // namespace detail

// True when the individual/mating-node graph has no cycle, i.e. the pedigree
// can be peeled one nuclear family at a time.
inline bool is_loop_free(const Pedigree& p) {
  const auto fams = nuclear_families(p);
  detail::DisjointSets sets(p.size() + fams.size());
  for (std::size_t f = 0; f < fams.size(); ++f)
    for (std::size_t m : fams[f].members())
      if (!sets.unite(p.size() + f, m)) return false;
  return true;
}

inline PeelingOrder peeling_order(const Pedigree& p) {
  detail::require(is_loop_free(p), Errc::LoopDetected,
                  "family " + p.family_id() + " contains a marriage or inbreeding loop");

  const auto fams = nuclear_families(p);
  std::vector<int> degree(p.size(), 0);
  for (const auto& f : fams)
    for (std::size_t m : f.members()) ++degree[m];

  PeelingOrder order;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (degree[i] == 0) order.singletons.push_back(i);

  std::vector<bool> done(fams.size(), false);
  for (std::size_t round = 0; round < fams.size(); ++round) {
    std::optional<std::size_t> best;
    std::optional<std::size_t> bestPivot;
    for (std::size_t f = 0; f < fams.size(); ++f) {
      if (done[f]) continue;
      std::optional<std::size_t> connector;
      int connectors = 0;
      for (std::size_t m : fams[f].members()) {
        if (degree[m] >= 2) {
          ++connectors;
          connector = m;
        }
      }
      if (connectors > 1) continue;
      // Families with a pivot go first, smallest pivot id wins.
      const bool better = [&] {
        if (!best) return true;
        if (connector.has_value() != bestPivot.has_value()) return connector.has_value();
        if (connector && *connector != *bestPivot)
          return id_less(p[*connector].id, p[*bestPivot].id);
        return false;
      }();
      if (better) {
        best = f;
        bestPivot = connector;
      }
    }
    detail::require(best.has_value(), Errc::LoopDetected,
                    "no peelable nuclear family left in family " + p.family_id());
    done[*best] = true;
    for (std::size_t m : fams[*best].members()) --degree[m];
    order.steps.push_back(PeelStep{fams[*best], bestPivot});
  }
  return order;
}

}  // namespace linkage
