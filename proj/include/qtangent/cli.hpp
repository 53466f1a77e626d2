#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qtangent {

/// Parses `args` (without the program name) and runs one subcommand.
/// Returns 0 on success, 1 on a usage or validation error (one line on
/// `err`), 2 when a verification verdict fails.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qtangent
