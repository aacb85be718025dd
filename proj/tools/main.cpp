#include <csignal>
#include <iostream>

#include "cli.hpp"

namespace {

extern "C" void on_signal(int) { kinesim::cli::request_shutdown(); }

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  return kinesim::cli::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
