#pragma once

#include <string>
#include <vector>

namespace cicle::cli {

enum ExitCode : int { ok = 0, usage = 2, data = 3, transport = 4 };

// Entry point of the `cicle` executable: prepare | run | report.
int run(int argc, char** argv);
// Same, with `args` excluding the program name.
int run(const std::vector<std::string>& args);

}  // namespace cicle::cli
