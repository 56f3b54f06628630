#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace linkage::cli {

enum class Command { Lodscan, Mle, Sprt, Fdr, Elod, Hettest, Em, Tdt, Sibpair, Homozygosity, Simulate, Power, Check };

const char* to_string(Command c);

enum class Format { Json, Tsv };

inline constexpr int kExitOk = 0;
inline constexpr int kExitAnalysis = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFileNotFound = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FileNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Command command = Command::Check;
  std::vector<std::string> inputPaths;  // --ped (repeatable) or --input
  std::optional<std::string> modelPath;
  std::optional<std::string> outputPath;
  std::uint64_t seed = 1;
  std::string gridSpec = "0:0.01:0.5";
  std::vector<double> grid;
  std::optional<Format> format;  // unset: the command's natural format

  std::optional<double> chi;
  std::optional<double> chiTrue;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> pi;
  std::optional<double> power;
  std::optional<double> threshold;
  std::optional<std::uint64_t> replicates;
  double missing = 0.0;
  std::optional<std::size_t> allele;  // 1-based marker allele
  std::optional<double> freq;
  std::optional<std::string> genotype;
  double inbreeding = 0.0;

  // The argument vector that reproduces this configuration.
  std::vector<std::string> rerun_args() const;
};

// Throws UsageError or FileNotFound.
RunConfig parse_args(const std::vector<std::string>& args);

// Returns the process exit code; analysis errors are reported on `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// parse_args + run with every failure mapped to its exit code.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace linkage::cli
