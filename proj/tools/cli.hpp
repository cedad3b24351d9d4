#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wmatch::cli {

/// Exit statuses. Failures also print one JSON object
/// {"error": <code>, "message": <text>} on the error stream.
enum Exit : int {
  ok = 0,
  other = 1,
  usage = 2,
  io = 3,
  format = 4,
  fingerprint = 5,
  invalid = 6,
  unsupported = 7,
  partial = 8,  // completed, but some inputs were skipped
};

/// Dispatches `args` (without the program name) to a subcommand: extract,
/// synth, bench-gen, index-build, query, eval, mine, train-adapter, heatmap.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wmatch::cli

int cli_run(int argc, char** argv);
