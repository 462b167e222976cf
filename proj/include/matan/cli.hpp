#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "matan/config.hpp"

namespace matan::cli {

/// Parses `<subcommand> [flags]`. A `--config <file>` of key=value lines is
/// applied first and explicit flags override it. Throws CLI::ParseError
/// (including CLI::CallForHelp) on bad usage.
RunConfig parse_args(const std::vector<std::string>& args);

/// Runs one pipeline stage: prepare | train-glove | train | eval-edges |
/// eval-nodes | score. Returns 0 on success, 1 on a runtime error and 2 on a
/// usage error; diagnostics go to `err`, the one-line summary to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace matan::cli
