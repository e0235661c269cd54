#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cpscan {

/// Subcommands: detect, simulate, experiment, bench. Returns 0 on success,
/// 1 on usage/config errors and 2 on data errors.
int cli_main(int argc, char** argv);

/// Same, with explicit argument list (argv[0] excluded) and streams.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cpscan
