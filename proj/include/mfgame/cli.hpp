// Command-line front end. Exit codes: 0 success, 1 domain or check failure,
// 2 usage or parse error.
#pragma once

#include <string>
#include <vector>

namespace mfgame {

/// Runs one CLI invocation; `args` excludes the program name. Output written
/// under --out, the MFGAME_OUT_DIR environment variable, or the config's
/// output.dir, in that order of precedence.
int run_cli(std::vector<std::string> args);

} // namespace mfgame
