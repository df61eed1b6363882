#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cca/errors.hpp"
#include "cca/experiments.hpp"
#include "cca/lattice1d.hpp"
#include "cca/latticed.hpp"

namespace cca::cli {

/// Thrown by `parse` when help was requested; carries the help text.
class HelpRequested : public Error {
public:
  using Error::Error;
};

/// One parsed subcommand. Only the members relevant to `name` are filled.
struct Command {
  std::string name;
  std::filesystem::path out = ".";
  std::size_t replicas = 1;
  std::size_t parallelism = 1;

  Config1D config1d;            // simulate, ensemble
  ConfigD configd;              // simulate-2d
  LimitLawSetup limit_law;      // verify-limit-law
  ExponentSetup exponent;       // verify-exponent
  std::optional<std::filesystem::path> from_csv;
  TimeChangeSetup timechange;   // verify-timechange
  OracleSetup oracle;           // oracle-compare
  BlowupSetup blowup;           // blowup-scan
};

/// Parses `args` (without the program name). A JSON file given with
/// `--config` supplies values for flags not present on the command line.
/// Throws UsageError on any malformed or invalid input and HelpRequested
/// for --help.
Command parse(const std::vector<std::string> &args);

/// Runs the command, writing artifacts under `cmd.out` and a short report to
/// `log`. Returns 0 when every verdict passes and 1 otherwise.
int dispatch(const Command &cmd, std::ostream &log);

/// Entry point: 0 on success, 1 on a failed verdict, 2 on usage or
/// operational errors.
int main(int argc, const char *const *argv);

} // namespace cca::cli
