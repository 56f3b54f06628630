#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"

using namespace linkage::cli;

namespace {

const std::string kData = LINKAGE_DATA_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = main_entry(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> backcross(std::string command) {
  return {std::move(command), "--ped", kData + "/backcross10.ped", "--model", kData + "/backcross.json"};
}

}  // namespace

TEST(ParseArgs, Defaults) {
  const auto cfg = parse_args(backcross("lodscan"));
  EXPECT_EQ(cfg.command, Command::Lodscan);
  EXPECT_EQ(cfg.seed, 1u);
  EXPECT_EQ(cfg.gridSpec, "0:0.01:0.5");
  ASSERT_EQ(cfg.grid.size(), 51u);
  EXPECT_EQ(cfg.grid.front(), 0.0);
  EXPECT_EQ(cfg.grid.back(), 0.5);
}

TEST(ParseArgs, RequiredFlags) {
  EXPECT_THROW(parse_args({"lodscan", "--model", kData + "/backcross.json"}), UsageError);
  EXPECT_THROW(parse_args({"fdr", "--alpha", "0.05"}), UsageError);
  EXPECT_THROW(parse_args({"lodscan", "--ped", kData + "/backcross10.ped", "--model", kData + "/backcross.json",
                           "--grid", "0:0.1:0.4"}),
               UsageError);
  const auto cfg = parse_args({"fdr", "--alpha", "0.05", "--pi", "0.05", "--power", "0.8"});
  EXPECT_EQ(*cfg.alpha, 0.05);
  EXPECT_EQ(*cfg.power, 0.8);
}

TEST(ParseArgs, RerunReproducesConfig) {
  auto args = backcross("mle");
  args.insert(args.end(), {"--seed", "99", "--grid", "0:0.05:0.5"});
  const auto cfg = parse_args(args);
  const auto again = parse_args(cfg.rerun_args());
  EXPECT_EQ(again.rerun_args(), cfg.rerun_args());
  EXPECT_EQ(again.grid, cfg.grid);
  EXPECT_EQ(again.seed, 99u);
}

TEST(ExitCodes, UsageAndMissingFile) {
  EXPECT_EQ(invoke({"lodscan", "--nonsense"}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"lodscan", "--ped", kData + "/absent.ped", "--model", kData + "/backcross.json"}).code,
            kExitFileNotFound);
  EXPECT_EQ(invoke({"tdt", "--ped", kData + "/backcross10.ped", "--allele", "7"}).code, kExitAnalysis);
}

TEST(ExitCodes, HelpIsSuccess) {
  const auto r = invoke({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("lodscan"), std::string::npos);
}

TEST(Lodscan, TenNonRecombinants) {
  const auto r = invoke(backcross("lodscan"));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind("# config: ", 0), 0u);
  EXPECT_NE(r.out.find("\n# rerun: linkage lodscan"), std::string::npos);
  std::istringstream in(r.out);
  std::string line;
  bool seen = false;
  while (std::getline(in, line)) {
    if (line.rfind("0\t", 0) != 0) continue;
    EXPECT_NEAR(std::stod(line.substr(2)), 3.0103, 1e-4);
    seen = true;
  }
  EXPECT_TRUE(seen);
}

TEST(Lodscan, JsonOnRequest) {
  auto args = backcross("lodscan");
  args.insert(args.end(), {"--format", "json"});
  const auto r = invoke(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["config"]["command"], "lodscan");
  EXPECT_TRUE(j.contains("rerun"));
}

TEST(Mle, ChiHatZero) {
  const auto r = invoke(backcross("mle"));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["result"]["chiHat"].get<double>(), 0.0);
  EXPECT_NEAR(j["result"]["maxLod"].get<double>(), 3.0103, 1e-4);
}

TEST(Fdr, LodThreeScenario) {
  const auto r = invoke({"fdr", "--alpha", "0.001", "--pi", "0.05", "--power", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["result"]["fdr"].get<double>(), 0.01865, 1e-5);
}

TEST(Sprt, BoundariesAndSequentialRun) {
  auto args = backcross("sprt");
  args.insert(args.end(), {"--alpha", "0.001", "--beta", "0.01", "--chi", "0.1"});
  const auto r = invoke(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["result"]["log10A"].get<double>(), 2.9957, 1e-4);
}

TEST(Em, AboAndTrajectory) {
  const auto r = invoke({"em", "--input", kData + "/abo.json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["result"]["converged"].get<bool>());
  EXPECT_NEAR(j["result"]["frequencies"]["O"].get<double>(), 0.7363, 1e-3);
}

TEST(Sibpair, PerfectAssociation) {
  const auto r = invoke({"sibpair", "--input", kData + "/sibpairs.txt"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["result"]["statistic"].get<double>(), 100.0);
}

TEST(Homozygosity, Example) {
  const auto r = invoke({"homozygosity", "--freq", "0.05", "--genotype", "3/3", "--inbreeding", "0.0625"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NEAR(nlohmann::json::parse(r.out)["result"]["score"].get<double>(), 1.30103, 1e-5);
}

TEST(Check, SelfCheckPasses) {
  const auto r = invoke({"check"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
}

TEST(Determinism, ByteIdenticalReruns) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto sim = (dir / "linkage_cli_sim.ped").string();
  std::vector<std::string> simulate = backcross("simulate");
  simulate.insert(simulate.end(), {"--chi-true", "0.1", "--seed", "17", "--replicates", "3", "--out", sim});
  ASSERT_EQ(invoke(simulate).code, kExitOk);
  std::ifstream a(sim);
  const std::string first((std::istreambuf_iterator<char>(a)), {});
  ASSERT_EQ(invoke(simulate).code, kExitOk);
  std::ifstream b(sim);
  const std::string second((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(first, second);
  EXPECT_NE(first.find("# rerun: "), std::string::npos);

  std::vector<std::string> power = backcross("power");
  power.insert(power.end(), {"--replicates", "20", "--seed", "5"});
  const auto p1 = invoke(power);
  ASSERT_EQ(p1.code, kExitOk) << p1.err;
  EXPECT_EQ(p1.out, invoke(power).out);

  std::vector<std::string> elod = backcross("elod");
  elod.insert(elod.end(), {"--chi-true", "0.1", "--replicates", "50", "--seed", "5"});
  const auto e1 = invoke(elod);
  ASSERT_EQ(e1.code, kExitOk) << e1.err;
  EXPECT_EQ(e1.out, invoke(elod).out);
  std::filesystem::remove(sim);
}
