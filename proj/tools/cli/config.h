#pragma once

// Run configuration shared by the command line, config files and output
// headers. All three reduce to a flat key -> value map, so an output header
// parses back into the configuration that produced it.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace slcp::cli {

enum class Command { kSolve, kPhm, kRefine, kDrlcp, kDuopolyError, kVerify };

std::string_view ToString(Command command);
Command ParseCommand(const std::string& text);

enum class PartitionChoice { kAuto, kUniform, kVoronoi };

struct RunConfig {
  Command command = Command::kSolve;
  std::string problem = "duopoly";  // builtin name or problem file path
  std::uint64_t seed = 0;
  std::string output = "-";         // "-" is stdout
  int threads = 0;                  // 0 keeps the library default

  std::vector<int> K;
  PartitionChoice partition = PartitionChoice::kAuto;
  int reference_K = 4096;

  double tol = 0.0;
  int max_iter = 0;

  double r = 1.0;

  std::vector<double> sigma;
  int reps = 100;
  int N = 5000;

  int starts = 10;
  int samples = 50;
  bool analytic = false;
  std::string system;      // verify input
  std::string candidate;   // verify input
  std::string system_out;  // drlcp output
};

using Settings = std::map<std::string, std::string>;

// Keys grouped by config-file section.
const std::map<std::string, std::vector<std::string>>& SectionKeys();

// Applies defaults for the command and checks cross-field consistency.
// Throws Error(kParseError) naming the offending key.
RunConfig ConfigFromSettings(const Settings& settings);

// Every field of a resolved config, including defaults.
Settings SettingsFromConfig(const RunConfig& config);

struct KeyValueLine {
  std::string section;
  std::string key;  // empty for a section header line
  std::string value;
  int line = 0;
};

// Syntax only: key = value lines under [section] headers, '#' and ';'
// comments. Throws Error(kParseError) with the line number.
std::vector<KeyValueLine> ReadKeyValueLines(const std::string& text);

// key = value lines under [section] headers; '#' and ';' start comments.
// Unknown sections or keys raise Error(kParseError) with the line number.
Settings ParseConfigText(const std::string& text);
Settings ParseConfigFile(const std::string& path);

// "# slcp key=value ... timestamp=...", values percent-escaped.
std::string FormatHeader(const RunConfig& config, const std::string& timestamp);
// Inverse of FormatHeader; the timestamp is ignored.
RunConfig ConfigFromHeader(const std::string& line);

// Parses argv. Flags override values from --config or --replay. Returns
// nullopt after printing help to `out`.
std::optional<RunConfig> ParseCommandLine(int argc, const char* const* argv, std::ostream& out);

std::string ReadTextFile(const std::string& path);

// Value parsers shared with the problem and system file readers; errors name
// the key.
std::vector<double> ParseRealList(const std::string& key, const std::string& text);
int ParseCount(const std::string& key, const std::string& text);

}  // namespace slcp::cli
