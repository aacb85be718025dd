#ifndef KINESIM_TOOLS_CLI_HPP_
#define KINESIM_TOOLS_CLI_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace kinesim::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kSolver = 3, kEnvironment = 4 };

/// Called once `serve` is listening, with the bound port.
using ServingHook = std::function<void(std::uint16_t)>;

/// Runs one command line (args excludes the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const ServingHook& on_serving = {});

/// Makes a running `serve` return 0. Async-signal-safe.
void request_shutdown();

}  // namespace kinesim::cli

#endif  // KINESIM_TOOLS_CLI_HPP_
