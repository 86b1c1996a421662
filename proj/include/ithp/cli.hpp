#pragma once

#include <string>
#include <vector>

namespace ithp {

// Entry point behind the `ithp` binary; exposed so tests can drive the real
// argument-parsing path in process.
int cli_run(const std::vector<std::string>& args);
int cli_run(int argc, const char* const* argv);

}  // namespace ithp
