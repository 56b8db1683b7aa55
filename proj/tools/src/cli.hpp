#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace engrank::cli {

// args[0] is the subcommand. Returns 0 on success, 1 on a failure reported
// as JSON on `err`, 2 on usage errors.
int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string usage();

}  // namespace engrank::cli
