#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fluidrecon::cli {

/// Exit codes: 0 ok, 2 usage or data error, 3 output I/O error, 4 numeric failure.
enum ExitCode : int { ok = 0, usage = 2, io_failure = 3, numeric = 4 };

/// Runs one command. args excludes the program name, e.g. {"synth", "--scenario", ...}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace fluidrecon::cli
