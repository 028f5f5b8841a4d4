#pragma once

#include <string>
#include <vector>

namespace icevp {

// Command-line entry point, factored out of main() so tests can drive it.
// Subcommands: run <scenario>, verify [--suite S] [--samples N] [--seed K],
// convergence [--levels L1,L2,...], mesh-info <scenario>.
// Exit codes: 0 success, 1 solver failure, 2 configuration error,
// 3 verification failure. The ICEVP_OUT_DIR environment variable overrides
// the scenario's output directory; --out-dir overrides both.
int run_cli(const std::vector<std::string>& args);

}  // namespace icevp
