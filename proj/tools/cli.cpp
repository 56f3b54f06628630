#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "linkage/linkage.hpp"

namespace linkage::cli {

namespace {

using Json = nlohmann::ordered_json;

struct CommandInfo {
  Command command;
  const char* name;
  bool lodBased;
};

constexpr CommandInfo kCommands[] = {
    {Command::Lodscan, "lodscan", true},   {Command::Mle, "mle", true},
    {Command::Sprt, "sprt", false},        {Command::Fdr, "fdr", false},
    {Command::Elod, "elod", false},        {Command::Hettest, "hettest", true},
    {Command::Em, "em", false},            {Command::Tdt, "tdt", false},
    {Command::Sibpair, "sibpair", false},  {Command::Homozygosity, "homozygosity", false},
    {Command::Simulate, "simulate", false}, {Command::Power, "power", true},
    {Command::Check, "check", false},
};

const CommandInfo& info(Command c) {
  for (const auto& i : kCommands)
    if (i.command == c) return i;
  throw std::logic_error("unknown command");
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

// Shortest text that reads back as exactly x.
std::string exact(double x) {
  char buf[32];
  for (int digits = 1; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

// Ten significant digits; non-finite values become strings.
Json num(double x) {
  if (!std::isfinite(x)) return fmt(x);
  return std::strtod(fmt(x).c_str(), nullptr);
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("--grid expects lo:step:hi, got '" + spec + "'");
    }
  }
  if (parts.size() != 3) throw UsageError("--grid expects lo:step:hi, got '" + spec + "'");
  try {
    return chi_grid(parts[0], parts[1], parts[2]);
  } catch (const Error& e) {
    throw UsageError(std::string("--grid: ") + e.what());
  }
}

void require_present(bool present, const char* flag, Command c) {
  if (!present) throw UsageError(std::string(to_string(c)) + " requires " + flag);
}

void require_file(const std::string& path) {
  if (!std::filesystem::exists(path)) throw FileNotFound("file not found: " + path);
}

std::vector<Family> load_families(const RunConfig& cfg, std::ostream& err) {
  std::vector<Family> out;
  for (const auto& path : cfg.inputPaths) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("cannot open " + path);
    auto parsed = parse_families(in);
    for (const auto& w : parsed.warnings) err << path << ": warning: " << w << '\n';
    for (auto& f : parsed.families) out.push_back(std::move(f));
  }
  return out;
}

TwoLocusModel load_model(const RunConfig& cfg) { return model_from_json(read_json_file(*cfg.modelPath)); }

struct Output {
  Json result = Json::object();
  std::vector<std::string> header;  // empty: TSV lists scalar result fields
  std::vector<std::vector<std::string>> rows;
};

Json config_echo(const RunConfig& c) {
  Json j;
  j["command"] = to_string(c.command);
  if (!c.inputPaths.empty()) j["inputs"] = c.inputPaths;
  if (c.modelPath) j["model"] = *c.modelPath;
  j["seed"] = c.seed;
  j["grid"] = c.gridSpec;
  auto opt = [&](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  opt("chi", c.chi);
  opt("chiTrue", c.chiTrue);
  opt("alpha", c.alpha);
  opt("beta", c.beta);
  opt("pi", c.pi);
  opt("power", c.power);
  opt("threshold", c.threshold);
  if (c.replicates) j["replicates"] = *c.replicates;
  if (c.missing != 0.0) j["missing"] = c.missing;
  if (c.allele) j["allele"] = *c.allele;
  opt("freq", c.freq);
  if (c.genotype) j["genotype"] = *c.genotype;
  if (c.inbreeding != 0.0) j["inbreeding"] = c.inbreeding;
  return j;
}

std::string rerun_line(const RunConfig& c) {
  std::string s = "linkage";
  for (const auto& a : c.rerun_args()) s += " " + a;
  return s;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

Output do_lodscan(const RunConfig& cfg, std::ostream& err) {
  const auto fams = load_families(cfg, err);
  const auto model = load_model(cfg);
  const LodEvaluator eval(fams, model);
  Output o;
  o.header = {"chi", "lod"};
  const bool perFamily = fams.size() > 1;
  if (perFamily)
    for (const auto& f : fams) o.header.push_back("lod_" + f.pedigree.family_id());
  Json curve = Json::array();
  for (double chi : cfg.grid) {
    const auto lods = eval.family_lods(chi);
    double total = 0.0;
    for (double l : lods) total += l;
    std::vector<std::string> row{fmt(chi), fmt(total)};
    Json point{{"chi", num(chi)}, {"lod", num(total)}};
    if (perFamily) {
      Json byFamily = Json::object();
      for (std::size_t f = 0; f < lods.size(); ++f) {
        row.push_back(fmt(lods[f]));
        byFamily[fams[f].pedigree.family_id()] = num(lods[f]);
      }
      point["families"] = byFamily;
    }
    o.rows.push_back(std::move(row));
    curve.push_back(std::move(point));
  }
  o.result["familyCount"] = fams.size();
  o.result["curve"] = std::move(curve);
  return o;
}

Output do_mle(const RunConfig& cfg, std::ostream& err) {
  const auto fams = load_families(cfg, err);
  const auto model = load_model(cfg);
  const LodEvaluator eval(fams, model);
  const auto r = mle_recombination(eval);
  Output o;
  o.result["chiHat"] = num(r.chiHat);
  o.result["maxLod"] = num(r.maxLod);
  o.result["flat"] = r.flat;
  Json byFamily = Json::object();
  const auto lods = eval.family_lods(r.chiHat);
  for (std::size_t f = 0; f < fams.size(); ++f) byFamily[fams[f].pedigree.family_id()] = num(lods[f]);
  o.result["familyLodsAtChiHat"] = byFamily;
  return o;
}

SprtConfig sprt_config(const RunConfig& cfg) {
  SprtConfig s;
  if (cfg.alpha) s.alpha = *cfg.alpha;
  if (cfg.beta) s.beta = *cfg.beta;
  if (cfg.chi) s.chiAlt = *cfg.chi;
  return s;
}

Output do_sprt(const RunConfig& cfg, std::ostream& err) {
  const auto s = sprt_config(cfg);
  const auto bounds = sprt_boundaries(s);
  Output o;
  o.result["alpha"] = num(s.alpha);
  o.result["beta"] = num(s.beta);
  o.result["chiAlt"] = num(s.chiAlt);
  o.result["log10A"] = num(bounds.log10A);
  o.result["log10B"] = num(bounds.log10B);
  if (cfg.inputPaths.empty()) return o;

  const auto fams = load_families(cfg, err);
  const auto model = load_model(cfg);
  if (cfg.replicates) {
    if (fams.empty()) throw Error(Errc::EmptyInput, "no families in input");
    const auto cal = simulate_sprt(fams.front().pedigree, model, s, *cfg.replicates, cfg.seed);
    o.result["streams"] = cal.streams;
    o.result["alphaHat"] = num(cal.alphaHat);
    o.result["powerHat"] = num(cal.powerHat);
    o.result["oddsOfError"] = num(cal.oddsOfError);
    o.result["oddsStandardError"] = num(cal.oddsStandardError);
    o.result["inverseA"] = num(std::pow(10.0, -bounds.log10A));
    o.result["meanStepsNull"] = num(cal.meanStepsNull);
    o.result["meanStepsAlt"] = num(cal.meanStepsAlt);
    return o;
  }
  const LodEvaluator eval(fams, model);
  const auto lods = eval.family_lods(s.chiAlt);
  const auto d = sprt_run(lods, bounds);
  o.result["outcome"] = to_string(d.outcome);
  o.result["familiesUsed"] = d.step;
  o.result["cumulativeLod"] = num(d.total);
  return o;
}

Output do_fdr(const RunConfig& cfg, std::ostream&) {
  Output o;
  o.result["alpha"] = num(*cfg.alpha);
  o.result["pi"] = num(*cfg.pi);
  o.result["power"] = num(*cfg.power);
  o.result["fdr"] = num(fdr(*cfg.alpha, *cfg.pi, *cfg.power));
  return o;
}

Output do_elod(const RunConfig& cfg, std::ostream& err) {
  const auto fams = load_families(cfg, err);
  const auto model = load_model(cfg);
  const double chiTrue = *cfg.chiTrue;
  const double chiEval = cfg.chi.value_or(chiTrue);
  Output o;
  o.header = {"family", "elod", "se"};
  double total = 0.0;
  double var = 0.0;
  Json byFamily = Json::object();
  for (std::size_t f = 0; f < fams.size(); ++f) {
    const auto& p = fams[f].pedigree;
    // Distinct stream families so multi-family designs stay independent.
    const auto r = cfg.replicates ? elod_monte_carlo(p, model, chiTrue, chiEval, *cfg.replicates,
                                                     replicate_seed(cfg.seed, f))
                                  : elod_enumerate(p, model, chiTrue, chiEval);
    total += r.value;
    const double se = r.standardError.value_or(0.0);
    var += se * se;
    o.rows.push_back({p.family_id(), fmt(r.value), r.standardError ? fmt(se) : "NA"});
    Json e{{"elod", num(r.value)}};
    if (r.standardError) e["standardError"] = num(se);
    byFamily[p.family_id()] = e;
  }
  o.result["method"] = cfg.replicates ? "montecarlo" : "enumeration";
  o.result["chiTrue"] = num(chiTrue);
  o.result["chiEval"] = num(chiEval);
  o.result["elod"] = num(total);
  if (cfg.replicates) o.result["standardError"] = num(std::sqrt(var));
  o.result["families"] = byFamily;
  o.rows.push_back({"total", fmt(total), cfg.replicates ? fmt(std::sqrt(var)) : "NA"});
  return o;
}

Output do_hettest(const RunConfig& cfg, std::ostream& err) {
  const auto fams = load_families(cfg, err);
  const auto model = load_model(cfg);
  const LodEvaluator eval(fams, model);
  std::vector<LodCurve> curves(fams.size());
  for (double chi : cfg.grid) {
    const auto lods = eval.family_lods(chi);
    for (std::size_t f = 0; f < fams.size(); ++f) curves[f].points.push_back({chi, lods[f]});
  }
  const auto r = heterogeneity_test(curves);
  Output o;
  o.result["alphaHat"] = num(r.alphaHat);
  o.result["chiHat"] = num(r.chiHat);
  o.result["lrStatistic"] = num(r.lrStatistic);
  o.result["mixtureLogLik"] = num(r.mixtureLogLik);
  o.result["homogeneousLogLik"] = num(r.homogeneousLogLik);
  return o;
}

Output do_em(const RunConfig& cfg, std::ostream&) {
  const auto in = gene_count_from_json(read_json_file(cfg.inputPaths.front()));
  const auto t = em_gene_count(in.system, in.counts, in.init);
  Output o;
  const auto& alleles = in.system.alleles();
  o.header = {"iteration", "loglik"};
  for (const auto& a : alleles) o.header.push_back("freq_" + a);
  for (std::size_t k = 0; k < t.iterates.size(); ++k) {
    std::vector<std::string> row{std::to_string(k), fmt(t.iterates[k].logLikelihood)};
    for (double f : t.iterates[k].frequencies) row.push_back(fmt(f));
    o.rows.push_back(std::move(row));
  }
  Json freqs = Json::object();
  for (std::size_t a = 0; a < alleles.size(); ++a) freqs[alleles[a]] = num(t.final().frequencies[a]);
  o.result["frequencies"] = freqs;
  o.result["logLikelihood"] = num(t.final().logLikelihood);
  o.result["iterations"] = t.iterates.size() - 1;
  o.result["converged"] = t.converged;
  try {
    o.result["convergenceRate"] = num(em_convergence_rate(t));
  } catch (const Error&) {
    o.result["convergenceRate"] = nullptr;
  }
  return o;
}

Output do_tdt(const RunConfig& cfg, std::ostream& err) {
  const auto fams = load_families(cfg, err);
  if (*cfg.allele < 1) throw UsageError("--allele is 1-based");
  const auto tc = count_transmissions(fams, *cfg.allele - 1);
  Output o;
  o.result["allele"] = *cfg.allele;
  o.result["heterozygousParents"] = tc.counts.heterozygousParentCount;
  o.result["transmitted"] = tc.counts.transmittedTarget;
  o.result["untransmitted"] = tc.counts.untransmittedTarget;
  o.result["triosUsed"] = tc.triosUsed;
  o.result["triosSkipped"] = tc.triosSkipped;
  o.result["statistic"] = num(tdt(tc.counts));
  return o;
}

Output do_sibpair(const RunConfig& cfg, std::ostream&) {
  std::ifstream in(cfg.inputPaths.front());
  if (!in) throw FileNotFound("cannot open " + cfg.inputPaths.front());
  std::vector<SibPair> pairs;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty() || tok.front().front() == '#') continue;
    if (tok.size() != 4)
      throw Error(Errc::ParseError, "line " + std::to_string(lineNo) + ": expected 4 columns, got " +
                                        std::to_string(tok.size()));
    pairs.push_back({tok[0] == tok[1], tok[2] == tok[3]});
  }
  const auto r = sib_pair_test(pairs);
  Output o;
  o.result["pairs"] = pairs.size();
  o.result["bothConcordant"] = r.table[1][1];
  o.result["onlyAConcordant"] = r.table[1][0];
  o.result["onlyBConcordant"] = r.table[0][1];
  o.result["neitherConcordant"] = r.table[0][0];
  o.result["statistic"] = num(r.statistic);
  o.result["degenerate"] = r.degenerate;
  return o;
}

Output do_homozygosity(const RunConfig& cfg, std::ostream&) {
  const auto& g = *cfg.genotype;
  const auto slash = g.find('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 == g.size())
    throw UsageError("--genotype expects a/b, got '" + g + "'");
  const bool homozygous = g.substr(0, slash) == g.substr(slash + 1);
  const auto s = homozygosity_score({cfg.inbreeding, *cfg.freq, homozygous ? MarkerGenotype(0, 0) : MarkerGenotype(0, 1)});
  Output o;
  o.result["genotype"] = g;
  o.result["frequency"] = num(*cfg.freq);
  o.result["inbreeding"] = num(cfg.inbreeding);
  o.result["score"] = num(s.score);
  return o;
}

Output do_power(const RunConfig& cfg, std::ostream& err) {
  const auto fams = load_families(cfg, err);
  const auto model = load_model(cfg);
  std::vector<Pedigree> peds;
  for (const auto& f : fams) peds.push_back(f.pedigree);
  const SimConfig sim{cfg.chiTrue.value_or(0.0), cfg.replicates.value_or(100), cfg.seed, cfg.missing};
  const double threshold = cfg.threshold.value_or(3.0);
  const auto p = estimate_power(peds, model, threshold, sim, cfg.grid);
  Output o;
  o.result["chiTrue"] = num(sim.chiTrue);
  o.result["threshold"] = num(threshold);
  o.result["replicates"] = p.replicates;
  o.result["power"] = num(p.power);
  o.result["standardError"] = num(p.se);
  return o;
}

Output do_check(const RunConfig&, std::ostream&) {
  const auto r = run_self_check();
  Output o;
  o.result["cases"] = r.cases;
  o.result["comparisons"] = r.comparisons;
  o.result["failures"] = r.failures;
  o.result["maxRelativeError"] = num(r.maxRelativeError);
  o.result["passed"] = r.passed();
  if (!r.failed.empty()) o.result["failed"] = r.failed;
  return o;
}

void write_output(const RunConfig& cfg, const Output& o, std::ostream& out) {
  const Format format = cfg.format.value_or(cfg.command == Command::Lodscan ? Format::Tsv : Format::Json);
  if (format == Format::Json) {
    Json doc;
    doc["config"] = config_echo(cfg);
    doc["rerun"] = rerun_line(cfg);
    doc["result"] = o.result;
    out << doc.dump(2) << '\n';
    return;
  }
  out << "# config: " << config_echo(cfg).dump() << '\n';
  out << "# rerun: " << rerun_line(cfg) << '\n';
  auto join = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "\t" : "") << cells[i];
    out << '\n';
  };
  if (!o.header.empty()) {
    join(o.header);
    for (const auto& r : o.rows) join(r);
    return;
  }
  join({"key", "value"});
  for (const auto& [k, v] : o.result.items()) {
    if (v.is_structured()) continue;
    join({k, v.is_string() ? v.get<std::string>() : v.dump()});
  }
}

}  // namespace

const char* to_string(Command c) { return info(c).name; }

std::vector<std::string> RunConfig::rerun_args() const {
  std::vector<std::string> a{to_string(command)};
  const bool isEm = command == Command::Em || command == Command::Sibpair;
  for (const auto& p : inputPaths) {
    a.push_back(isEm ? "--input" : "--ped");
    a.push_back(p);
  }
  auto add = [&](const char* flag, const std::string& v) {
    a.push_back(flag);
    a.push_back(v);
  };
  if (modelPath) add("--model", *modelPath);
  if (chi) add("--chi", exact(*chi));
  if (chiTrue) add("--chi-true", exact(*chiTrue));
  add("--grid", gridSpec);
  if (alpha) add("--alpha", exact(*alpha));
  if (beta) add("--beta", exact(*beta));
  if (pi) add("--pi", exact(*pi));
  if (power) add("--power", exact(*power));
  if (threshold) add("--threshold", exact(*threshold));
  if (replicates) add("--replicates", std::to_string(*replicates));
  add("--seed", std::to_string(seed));
  if (missing != 0.0) add("--missing", exact(missing));
  if (allele) add("--allele", std::to_string(*allele));
  if (freq) add("--freq", exact(*freq));
  if (genotype) add("--genotype", *genotype);
  if (inbreeding != 0.0) add("--inbreeding", exact(inbreeding));
  if (format) add("--format", *format == Format::Json ? "json" : "tsv");
  if (outputPath) add("--out", *outputPath);
  return a;
}

RunConfig parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Genetic linkage analysis", "linkage"};
  std::string command;
  std::vector<std::string> peds;
  std::string input;
  std::string model;
  std::string out;
  std::string format;
  RunConfig c;
  double chi = 0, chiTrue = 0, alpha = 0, beta = 0, pi = 0, power = 0, threshold = 0, freq = 0;
  std::uint64_t replicates = 0;
  std::size_t allele = 0;
  std::string genotype;

  std::vector<std::string> names;
  for (const auto& i : kCommands) names.push_back(i.name);
  app.add_option("command", command, "analysis to run")->required()->check(CLI::IsMember(names));
  app.add_option("--ped", peds, "pedigree data file (repeatable)");
  app.add_option("--input", input, "input file for em (JSON) or sibpair (TSV)");
  app.add_option("--model", model, "two-locus model (JSON)");
  auto* oChi = app.add_option("--chi", chi, "recombination fraction (alternative or evaluation value)");
  auto* oChiTrue = app.add_option("--chi-true", chiTrue, "recombination fraction used to simulate");
  app.add_option("--grid", c.gridSpec, "chi grid lo:step:hi");
  auto* oAlpha = app.add_option("--alpha", alpha, "type I error");
  auto* oBeta = app.add_option("--beta", beta, "type II error");
  auto* oPi = app.add_option("--pi", pi, "prior probability of linkage");
  auto* oPower = app.add_option("--power", power, "average power W");
  auto* oThreshold = app.add_option("--threshold", threshold, "lod threshold");
  auto* oReplicates = app.add_option("--replicates", replicates, "simulation replicates");
  app.add_option("--seed", c.seed, "random seed");
  app.add_option("--missing", c.missing, "per-individual marker missingness in simulations");
  auto* oAllele = app.add_option("--allele", allele, "target marker allele (1-based)");
  auto* oFreq = app.add_option("--freq", freq, "marker allele frequency");
  auto* oGenotype = app.add_option("--genotype", genotype, "observed genotype a/b");
  app.add_option("--inbreeding", c.inbreeding, "inbreeding coefficient F");
  auto* oOut = app.add_option("--out", out, "output path (default stdout)");
  auto* oFormat = app.add_option("--format", format, "json or tsv")->check(CLI::IsMember(std::vector<std::string>{"json", "tsv"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::Error& e) {
    throw UsageError(e.what());
  }

  bool found = false;
  for (const auto& i : kCommands)
    if (command == i.name) {
      c.command = i.command;
      found = true;
    }
  if (!found) throw UsageError("unknown command " + command);

  c.inputPaths = peds;
  if (!input.empty()) c.inputPaths.push_back(input);
  if (!model.empty()) c.modelPath = model;
  if (oOut->count()) c.outputPath = out;
  if (oFormat->count()) c.format = format == "json" ? Format::Json : Format::Tsv;
  if (oChi->count()) c.chi = chi;
  if (oChiTrue->count()) c.chiTrue = chiTrue;
  if (oAlpha->count()) c.alpha = alpha;
  if (oBeta->count()) c.beta = beta;
  if (oPi->count()) c.pi = pi;
  if (oPower->count()) c.power = power;
  if (oThreshold->count()) c.threshold = threshold;
  if (oReplicates->count()) c.replicates = replicates;
  if (oAllele->count()) c.allele = allele;
  if (oFreq->count()) c.freq = freq;
  if (oGenotype->count()) c.genotype = genotype;

  const Command cmd = c.command;
  const bool needsPed = cmd == Command::Lodscan || cmd == Command::Mle || cmd == Command::Elod ||
                        cmd == Command::Hettest || cmd == Command::Tdt || cmd == Command::Simulate ||
                        cmd == Command::Power;
  const bool needsModel = needsPed && cmd != Command::Tdt;
  const bool needsInput = cmd == Command::Em || cmd == Command::Sibpair;
  if (needsPed) require_present(!peds.empty(), "--ped", cmd);
  if (needsModel) require_present(c.modelPath.has_value(), "--model", cmd);
  if (needsInput) require_present(!input.empty(), "--input", cmd);
  if (!needsInput && !input.empty()) throw UsageError("--input is only used by em and sibpair");
  if ((needsInput || cmd == Command::Fdr || cmd == Command::Homozygosity || cmd == Command::Check) && !peds.empty())
    throw UsageError(std::string(to_string(cmd)) + " does not read --ped");
  if (cmd == Command::Sprt) {
    if (!peds.empty()) require_present(c.modelPath.has_value(), "--model", cmd);
    if (c.replicates) require_present(!peds.empty(), "--ped", cmd);
  }
  if (cmd == Command::Fdr) {
    require_present(c.alpha.has_value(), "--alpha", cmd);
    require_present(c.pi.has_value(), "--pi", cmd);
    require_present(c.power.has_value(), "--power", cmd);
  }
  if (cmd == Command::Elod) require_present(c.chiTrue.has_value(), "--chi-true", cmd);
  if (cmd == Command::Tdt) require_present(c.allele.has_value(), "--allele", cmd);
  if (cmd == Command::Homozygosity) {
    require_present(c.freq.has_value(), "--freq", cmd);
    require_present(c.genotype.has_value(), "--genotype", cmd);
  }
  if (c.replicates && *c.replicates == 0) throw UsageError("--replicates must be at least 1");

  c.grid = parse_grid(c.gridSpec);
  if (info(cmd).lodBased) {
    const auto it = std::find_if(c.grid.begin(), c.grid.end(), [](double x) { return std::abs(x - kNullChi) < 1e-12; });
    if (it == c.grid.end()) throw UsageError("--grid must include 0.5");
    *it = kNullChi;
  }

  for (const auto& p : c.inputPaths) require_file(p);
  if (c.modelPath) require_file(*c.modelPath);
  return c;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    std::ofstream file;
    if (cfg.outputPath) {
      file.open(*cfg.outputPath);
      if (!file) throw Error(Errc::InvalidArgument, "cannot write " + *cfg.outputPath);
    }
    std::ostream& sink = cfg.outputPath ? static_cast<std::ostream&>(file) : out;

    if (cfg.command == Command::Simulate) {
      const auto fams = load_families(cfg, err);
      const auto model = load_model(cfg);
      const SimConfig sim{cfg.chiTrue.value_or(kNullChi), cfg.replicates.value_or(1), cfg.seed, cfg.missing};
      std::vector<Pedigree> peds;
      for (const auto& f : fams) peds.push_back(f.pedigree);
      sink << "# config: " << config_echo(cfg).dump() << '\n';
      sink << "# rerun: " << rerun_line(cfg) << '\n';
      for (std::uint64_t r = 0; r < sim.replicates; ++r) {
        auto sample = simulate_families(peds, model, sim, r);
        if (sim.replicates > 1) {
          // Replicate r of family "x" becomes family "x.r".
          for (auto& f : sample) {
            std::vector<Individual> inds(f.pedigree.individuals().begin(), f.pedigree.individuals().end());
            f.pedigree = validate_pedigree(std::move(inds), f.pedigree.family_id() + "." + std::to_string(r + 1));
          }
        }
        write_families(sink, sample);
      }
      return kExitOk;
    }

    Output o;
    switch (cfg.command) {
      case Command::Lodscan: o = do_lodscan(cfg, err); break;
      case Command::Mle: o = do_mle(cfg, err); break;
      case Command::Sprt: o = do_sprt(cfg, err); break;
      case Command::Fdr: o = do_fdr(cfg, err); break;
      case Command::Elod: o = do_elod(cfg, err); break;
      case Command::Hettest: o = do_hettest(cfg, err); break;
      case Command::Em: o = do_em(cfg, err); break;
      case Command::Tdt: o = do_tdt(cfg, err); break;
      case Command::Sibpair: o = do_sibpair(cfg, err); break;
      case Command::Homozygosity: o = do_homozygosity(cfg, err); break;
      case Command::Power: o = do_power(cfg, err); break;
      case Command::Check: o = do_check(cfg, err); break;
      case Command::Simulate: break;
    }
    write_output(cfg, o, sink);
    if (cfg.command == Command::Check && !o.result["passed"].get<bool>()) {
      err << "self-check failed\n";
      return kExitAnalysis;
    }
    return kExitOk;
  } catch (const FileNotFound& e) {
    err << "error: " << e.what() << '\n';
    return kExitFileNotFound;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error [" << linkage::to_string(e.code()) << "]: " << e.what() << '\n';
    return kExitAnalysis;
  }
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_args(args);
  } catch (const HelpRequested& h) {
    out << h.what();
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n"
        << "usage: linkage <command> [options]; commands: lodscan mle sprt fdr elod hettest em tdt sibpair "
           "homozygosity simulate power check\n";
    return kExitUsage;
  } catch (const FileNotFound& e) {
    err << "error: " << e.what() << '\n';
    return kExitFileNotFound;
  }
  return run(cfg, out, err);
}

}  // namespace linkage::cli
