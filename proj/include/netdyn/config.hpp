#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "netdyn/network.hpp"

namespace netdyn {

enum class Command { Simulate, Cycles, Classify, Atoms, Constants };
enum class OutputFormat { Table, Records };

std::optional<Command> parse_command(std::string_view name);
const char* to_string(Command c);

struct Budgets {
  std::size_t steps = 10000;
  std::size_t samples = 10000;
  std::size_t generations = 40;
};

struct RunConfig {
  NetworkParams params;
  std::optional<Command> command;
  std::optional<std::uint64_t> seed;
  Budgets budgets;
  double delta_fraction = 0.1;  ///< perturbation scale as a fraction of alpha
  std::optional<State> start;   ///< initial section point for simulate
  std::string out_prefix = "netdyn";
  OutputFormat format = OutputFormat::Table;
};

/// Config problems, reported with the offending line and key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the plain-text config format:
///
///   # comment
///   n = 2
///   theta = 1
///   gamma = 1 1
///   beta = 2 2
///   h = 0 0.2 ; 0.2 0        # row-major, rows optionally split by ';'
///   seed = 42
///
///   [run]
///   command = classify       # simulate | cycles | classify | atoms | constants
///   steps = 10000
///   samples = 10000
///   generations = 40
///   delta = 0.1              # fraction of the expansivity constant
///   start = 0 0.5
///   format = table           # table | records
///   out = results/run
///
///   [tolerances]
///   root = 1e-14
///   simultaneity = 1e-12
///   recurrence = 1e-9
///   boundary = 1e-10
///
/// Unknown and duplicate keys are errors. Network parameters are validated.
RunConfig parse_config(std::string_view text);

RunConfig load_config(const std::string& path);

/// Exit statuses of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

/// Executes config.command and writes <out_prefix>.*.tsv / .summary.txt.
/// Diagnostics go to err; a short summary goes to out.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace netdyn
