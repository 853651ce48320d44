#pragma once

#include <exception>
#include <ostream>
#include <string>
#include <vector>

namespace igashape::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kParse = 2,
    kTopology = 3,
    kGeometry = 4,
    kSolver = 5,
    kInfeasible = 6,
};

/// Exit code of an exception escaping a subcommand.
int exit_code_for(const std::exception& e);

/// "4" or "1,2,4". Throws ParseError for anything else.
std::vector<int> parse_worker_list(const std::string& text);

/// Runs the command line; messages go to `out`, errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace igashape::cli
