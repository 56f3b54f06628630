#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "linkage/error.hpp"
#include "linkage/genecount.hpp"
#include "linkage/model.hpp"

namespace linkage {

// Model document:
//   {
//     "trait":  {"name": "disease", "alleles": ["D", "d"], "frequencies": [0.01, 0.99]},
//     "marker": {"name": "M", "alleles": ["1", "2"], "frequencies": [0.3, 0.7]},
//     "penetrance": {"D/D": 1.0, "D/d": 1.0, "d/d": 0.0},
//     "chi": 0.1
//   }
// Penetrance keys are unordered genotypes written with allele names; every
// genotype must appear. "chi" is optional.
namespace detail {

inline Locus locus_from_json(const nlohmann::json& j, const std::string& fallbackName) {
  require(j.is_object(), Errc::ParseError, "locus entry must be an object");
  auto freqs = j.at("frequencies").get<std::vector<double>>();
  std::vector<std::string> alleles;
  if (j.contains("alleles")) {
    alleles = j.at("alleles").get<std::vector<std::string>>();
  } else {
    for (std::size_t i = 1; i <= freqs.size(); ++i) alleles.push_back(std::to_string(i));
  }
  return Locus(j.value("name", fallbackName), std::move(alleles), std::move(freqs));
}

inline std::pair<std::size_t, std::size_t> genotype_key(const std::string& key,
                                                        const std::vector<std::string>& alleles) {
  const auto slash = key.find('/');
  require(slash != std::string::npos, Errc::ParseError, "genotype key '" + key + "' must look like a/b");
  auto find = [&](const std::string& name) {
    for (std::size_t i = 0; i < alleles.size(); ++i)
      if (alleles[i] == name) return i;
    throw Error(Errc::ParseError, "unknown allele '" + name + "' in genotype key '" + key + "'");
  };
  const auto a = find(key.substr(0, slash));
  const auto b = find(key.substr(slash + 1));
  return a <= b ? std::pair{a, b} : std::pair{b, a};
}

template <class Fn>
auto parse_guard(Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
}

}  // namespace detail

inline TwoLocusModel model_from_json(const nlohmann::json& j) {
  return detail::parse_guard([&] {
    const Locus trait = detail::locus_from_json(j.at("trait"), "trait");
    const Locus marker = detail::locus_from_json(j.at("marker"), "marker");
    PenetranceModel pm(trait.allele_count());
    std::map<std::pair<std::size_t, std::size_t>, double> seen;
    for (const auto& [key, value] : j.at("penetrance").items()) {
      const auto g = detail::genotype_key(key, trait.alleles());
      const double p = value.get<double>();
      const auto [it, fresh] = seen.emplace(g, p);
      detail::require(fresh || it->second == p, Errc::ParseError, "conflicting penetrance for " + key);
      pm.set(g.first, g.second, p);
    }
    const std::size_t n = trait.allele_count();
    detail::require(seen.size() == n * (n + 1) / 2, Errc::ParseError,
                    "penetrance table must list every trait genotype");
    std::optional<double> chi;
    if (j.contains("chi")) chi = j.at("chi").get<double>();
    return TwoLocusModel(trait, marker, pm, chi);
  });
}

inline nlohmann::json model_to_json(const TwoLocusModel& m) {
  auto locus = [](const Locus& l) {
    return nlohmann::json{{"name", l.name()}, {"alleles", l.alleles()}, {"frequencies", l.frequencies()}};
  };
  nlohmann::json pen = nlohmann::json::object();
  const auto& names = m.trait.alleles();
  for (std::size_t a = 0; a < names.size(); ++a)
    for (std::size_t b = a; b < names.size(); ++b) pen[names[a] + "/" + names[b]] = m.penetrance.affected(a, b);
  nlohmann::json j{{"trait", locus(m.trait)}, {"marker", locus(m.marker)}, {"penetrance", pen}};
  if (m.defaultChi) j["chi"] = *m.defaultChi;
  return j;
}

// Gene-counting document:
//   {
//     "alleles": ["A", "B", "O"],
//     "phenotypes": [{"name": "A", "genotypes": ["A/A", "A/O"]}, ...],
//     "counts": {"A": 186, "B": 38, "AB": 13, "O": 284},
//     "init": [0.3, 0.3, 0.4]
//   }
// "init" is optional (uniform by default).
struct GeneCountInput {
  PhenotypeSystem system;
  std::vector<std::uint64_t> counts;
  std::vector<double> init;
};

inline GeneCountInput gene_count_from_json(const nlohmann::json& j) {
  return detail::parse_guard([&] {
    auto alleles = j.at("alleles").get<std::vector<std::string>>();
    std::vector<std::string> names;
    std::map<PhenotypeSystem::Genotype, std::size_t> membership;
    for (const auto& ph : j.at("phenotypes")) {
      const auto index = names.size();
      names.push_back(ph.at("name").get<std::string>());
      for (const auto& key : ph.at("genotypes").get<std::vector<std::string>>()) {
        const auto g = detail::genotype_key(key, alleles);
        detail::require(membership.emplace(g, index).second, Errc::ParseError,
                        "genotype " + key + " assigned to two phenotypes");
      }
    }
    PhenotypeSystem sys(alleles, names, membership);
    std::vector<std::uint64_t> counts(names.size(), 0);
    for (const auto& [name, value] : j.at("counts").items()) {
      bool found = false;
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) {
          counts[i] = value.get<std::uint64_t>();
          found = true;
        }
      }
      detail::require(found, Errc::ParseError, "count given for unknown phenotype " + name);
    }
    std::vector<double> init;
    if (j.contains("init")) {
      init = j.at("init").get<std::vector<double>>();
    } else {
      init.assign(alleles.size(), 1.0 / static_cast<double>(alleles.size()));
    }
    return GeneCountInput{std::move(sys), std::move(counts), std::move(init)};
  });
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  detail::require(static_cast<bool>(in), Errc::InvalidArgument, "cannot open " + path);
  return detail::parse_guard([&] { return nlohmann::json::parse(in); });
}

}  // namespace linkage
