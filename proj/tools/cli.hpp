#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace endocost::cli {

enum ExitCode : int { kOk = 0, kRuntime = 1, kConfig = 2, kValidation = 3 };

// Parses argv (argv[0] is the program name) and dispatches a subcommand:
// run | sweep | topology | truthfulness | validate.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace endocost::cli
