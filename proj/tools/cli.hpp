#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace livqual::cli {

/// Runs one command line (without the program name) and returns the exit
/// status. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

int run(int argc, char **argv);

} // namespace livqual::cli
