#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "linkage/error.hpp"
#include "linkage/model.hpp"
#include "linkage/pedigree.hpp"

namespace linkage {

// Unordered marker genotype, zero-based allele indices with first <= second.
struct MarkerGenotype {
  std::size_t first = 0;
  std::size_t second = 0;

  MarkerGenotype() = default;
  MarkerGenotype(std::size_t a, std::size_t b) : first(a < b ? a : b), second(a < b ? b : a) {}
  bool operator==(const MarkerGenotype&) const = default;
  auto operator<=>(const MarkerGenotype&) const = default;
};

struct Observation {
  Phenotype phenotype = Phenotype::Unknown;
  std::optional<MarkerGenotype> marker;

  bool operator==(const Observation&) const = default;
  bool is_missing() const { return phenotype == Phenotype::Unknown && !marker; }
};

struct ObservedData {
  std::vector<Observation> records;

  static ObservedData unknown(std::size_t n) { return ObservedData{std::vector<Observation>(n)}; }
  std::size_t size() const { return records.size(); }
  Observation& operator[](std::size_t i) { return records[i]; }
  const Observation& operator[](std::size_t i) const { return records[i]; }
  bool operator==(const ObservedData&) const = default;
};

struct Family {
  Pedigree pedigree;
  ObservedData data;
};

inline void check_data(const Pedigree& p, const TwoLocusModel& m, const ObservedData& d) {
  detail::require(d.size() == p.size(), Errc::InvalidArgument,
                  "family " + p.family_id() + ": data records do not match pedigree size");
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i].marker) {
      detail::require(d[i].marker->second < m.marker.allele_count(), Errc::InvalidArgument,
                      "individual " + p[i].id + " carries a marker allele outside the model");
    }
  }
}

// Compatibility of a phased genotype with the observed marker genotype.
inline bool marker_matches(const Observation& obs, const PhasedGenotype& g) {
  if (!obs.marker) return true;
  return MarkerGenotype(g.paternal.marker, g.maternal.marker) == *obs.marker;
}

struct ParsedFamilies {
  std::vector<Family> families;
  std::vector<std::string> warnings;
};

// Whitespace-delimited LINKAGE-style records, one individual per line:
//   familyId individualId fatherId motherId sex [phenotype allele1 allele2]
// "0" means absent for parents, sex, phenotype and alleles. Alleles are
// one-based in the file. A half-missing marker genotype is dropped with a
// warning.
inline ParsedFamilies parse_families(std::istream& in) {
  struct Pending {
    std::vector<Individual> people;
    ObservedData data;
  };
  std::vector<std::string> order;
  std::map<std::string, Pending> byFamily;
  ParsedFamilies out;

  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto fail = [&](const std::string& why) {
      throw Error(Errc::ParseError, "line " + std::to_string(lineNo) + ": " + why);
    };
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '#') continue;
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 5 && tok.size() != 8) fail("expected 5 or 8 fields, found " + std::to_string(tok.size()));

    const auto code = [&](const std::string& s, int hi, const char* what) {
      if (s.size() != 1 || s[0] < '0' || s[0] > '0' + hi) fail(std::string("bad ") + what + " '" + s + "'");
      return s[0] - '0';
    };
    Individual ind;
    ind.id = tok[1];
    if (ind.id == "0") fail("individual id 0 is reserved");
    if (tok[2] != "0") ind.father = tok[2];
    if (tok[3] != "0") ind.mother = tok[3];
    ind.sex = static_cast<Sex>(code(tok[4], 2, "sex"));

    Observation obs;
    if (tok.size() == 8) {
      obs.phenotype = static_cast<Phenotype>(code(tok[5], 2, "phenotype"));
      std::size_t alleles[2] = {0, 0};
      for (int k = 0; k < 2; ++k) {
        const std::string& s = tok[6 + k];
        std::size_t used = 0;
        unsigned long v = 0;
        try {
          v = std::stoul(s, &used);
        } catch (const std::exception&) {
          fail("bad allele '" + s + "'");
        }
        if (used != s.size()) fail("bad allele '" + s + "'");
        alleles[k] = v;
      }
      if (alleles[0] != 0 && alleles[1] != 0) {
        obs.marker = MarkerGenotype(alleles[0] - 1, alleles[1] - 1);
      } else if (alleles[0] != 0 || alleles[1] != 0) {
        out.warnings.push_back("line " + std::to_string(lineNo) +
                               ": partially observed marker genotype treated as missing");
      }
    }

    auto [it, fresh] = byFamily.try_emplace(tok[0]);
    if (fresh) order.push_back(tok[0]);
    it->second.people.push_back(std::move(ind));
    it->second.data.records.push_back(obs);
  }

  for (const auto& fam : order) {
    auto& pending = byFamily.at(fam);
    out.families.push_back(Family{validate_pedigree(std::move(pending.people), fam), std::move(pending.data)});
  }
  return out;
}

inline ParsedFamilies parse_families(const std::string& text) {
  std::istringstream in(text);
  return parse_families(in);
}

inline void write_families(std::ostream& out, const std::vector<Family>& families) {
  for (const auto& fam : families) {
    const auto& p = fam.pedigree;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto& ind = p[i];
      const auto& obs = fam.data[i];
      out << p.family_id() << ' ' << ind.id << ' ' << ind.father.value_or("0") << ' '
          << ind.mother.value_or("0") << ' ' << static_cast<int>(ind.sex) << ' '
          << static_cast<int>(obs.phenotype);
      if (obs.marker)
        out << ' ' << obs.marker->first + 1 << ' ' << obs.marker->second + 1;
      else
        out << " 0 0";
      out << '\n';
    }
  }
}

}  // namespace linkage
