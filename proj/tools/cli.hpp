#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fgvc::cli {

// Runs the command line (args exclude the program name); returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Splices `--config FILE` entries (key=value lines) in front of the explicit
// arguments of the subcommand, so explicit flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace fgvc::cli
