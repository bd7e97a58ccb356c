#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cli/config.h"
#include "slcp/common.h"

namespace slcp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSolverFailure = 1;
inline constexpr int kExitConfigError = 2;

// Executes the command and writes the header line plus its CSV (or candidate
// text) to config.output. Diagnostics go to `err`.
int Run(const RunConfig& config, std::ostream& err);
int Run(const RunConfig& config, std::ostream& err, const std::string& timestamp);

// UTC, second resolution: 2026-01-31T12:00:00Z.
std::string CurrentTimestamp();

// DRLCP system files record the problem source, its sigma and the sample
// points, so verification rebuilds exactly the sampled system:
//
//   [system]
//   problem = duopoly
//   sigma = 0.1
//   [samples]
//   xi = -0.03, 0.12
struct SystemFile {
  std::string problem;
  double sigma = 0.1;
  std::vector<Vector> samples;
};

std::string FormatSystemFile(const SystemFile& system);
SystemFile ParseSystemText(const std::string& text);

}  // namespace slcp::cli
