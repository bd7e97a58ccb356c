#include <iostream>

#include "cli/config.h"
#include "cli/run.h"

int main(int argc, char** argv) {
  std::optional<slcp::cli::RunConfig> config;
  try {
    config = slcp::cli::ParseCommandLine(argc, argv, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return slcp::cli::kExitConfigError;
  }
  if (!config) return slcp::cli::kExitOk;
  return slcp::cli::Run(*config, std::cerr);
}
