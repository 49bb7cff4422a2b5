#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mobigraph {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

// Entry point for the mobigraph command line. Subcommands: ingest, match,
// interpolate, predict, montecarlo, compare, benchmark, report.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv);

}  // namespace mobigraph
