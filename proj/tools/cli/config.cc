#include "cli/config.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <charconv>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "slcp/common.h"
#include "slcp/csv.h"

namespace slcp::cli {
namespace {

[[noreturn]] void Fail(const std::string& message) { throw Error(ErrorCode::kParseError, message); }

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(Trim(item));
  if (!text.empty() && text.back() == ',') out.emplace_back();
  return out;
}

long long ParseInteger(const std::string& key, const std::string& text) {
  long long value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    Fail(key + ": expected an integer, got '" + text + "'");
  }
  return value;
}

int ParsePositiveInt(const std::string& key, const std::string& text) {
  const long long v = ParseInteger(key, text);
  if (v < 1 || v > 1'000'000'000) Fail(key + ": expected a positive integer, got '" + text + "'");
  return static_cast<int>(v);
}

double ParseReal(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty() || !std::isfinite(value)) {
    Fail(key + ": expected a finite number, got '" + text + "'");
  }
  return value;
}

double ParsePositiveReal(const std::string& key, const std::string& text) {
  const double v = ParseReal(key, text);
  if (!(v > 0.0)) Fail(key + ": expected a positive number, got '" + text + "'");
  return v;
}

bool ParseBool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  Fail(key + ": expected true or false, got '" + text + "'");
}

std::string ListToString(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string ListToString(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + FormatDouble(v[i]);
  return out;
}

PartitionChoice ParsePartition(const std::string& text) {
  if (text == "auto") return PartitionChoice::kAuto;
  if (text == "uniform") return PartitionChoice::kUniform;
  if (text == "voronoi") return PartitionChoice::kVoronoi;
  Fail("partition: expected auto, uniform or voronoi, got '" + text + "'");
}

std::string_view ToString(PartitionChoice p) {
  switch (p) {
    case PartitionChoice::kAuto: return "auto";
    case PartitionChoice::kUniform: return "uniform";
    case PartitionChoice::kVoronoi: return "voronoi";
  }
  return "auto";
}

const std::vector<std::string>& CommonKeys() {
  static const std::vector<std::string> keys{"command", "problem", "seed", "output", "threads"};
  return keys;
}

const std::vector<std::string>& CommandKeys(Command c) {
  static const std::map<Command, std::vector<std::string>> keys{
      {Command::kSolve, {"K", "partition", "sigma", "tol", "max_iter"}},
      {Command::kPhm, {"K", "partition", "sigma", "tol", "max_iter", "r"}},
      {Command::kRefine, {"K", "partition", "sigma", "tol", "max_iter", "reference_K"}},
      {Command::kDrlcp,
       {"sigma", "samples", "starts", "tol", "max_iter", "analytic", "system_out"}},
      {Command::kDuopolyError, {"K", "sigma", "reps", "N"}},
      {Command::kVerify, {"system", "candidate", "tol"}},
  };
  return keys.at(c);
}

bool KeyApplies(Command c, const std::string& key) {
  const auto& common = CommonKeys();
  const auto& own = CommandKeys(c);
  return std::find(common.begin(), common.end(), key) != common.end() ||
         std::find(own.begin(), own.end(), key) != own.end();
}

std::string Escape(const std::string& value) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char ch : value) {
    if (std::isalnum(ch) || std::string_view("._,/:+-").find(static_cast<char>(ch)) !=
                                std::string_view::npos) {
      out += static_cast<char>(ch);
    } else {
      out += '%';
      out += kHex[ch >> 4];
      out += kHex[ch & 15];
    }
  }
  return out;
}

std::string Unescape(const std::string& value) {
  std::string out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (value[i] != '%') {
      out += value[i];
      continue;
    }
    if (i + 2 >= value.size()) Fail("header: truncated escape in '" + value + "'");
    int code = 0;
    auto [ptr, ec] = std::from_chars(value.data() + i + 1, value.data() + i + 3, code, 16);
    if (ec != std::errc() || ptr != value.data() + i + 3) Fail("header: bad escape in '" + value + "'");
    out += static_cast<char>(code);
    i += 2;
  }
  return out;
}

}  // namespace

std::vector<double> ParseRealList(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : SplitList(text)) out.push_back(ParseReal(key, item));
  if (out.empty()) Fail(key + ": empty list");
  return out;
}

int ParseCount(const std::string& key, const std::string& text) {
  return ParsePositiveInt(key, text);
}

std::string_view ToString(Command command) {
  switch (command) {
    case Command::kSolve: return "solve";
    case Command::kPhm: return "phm";
    case Command::kRefine: return "refine";
    case Command::kDrlcp: return "drlcp";
    case Command::kDuopolyError: return "duopoly-error";
    case Command::kVerify: return "verify";
  }
  return "solve";
}

Command ParseCommand(const std::string& text) {
  for (Command c : {Command::kSolve, Command::kPhm, Command::kRefine, Command::kDrlcp,
                    Command::kDuopolyError, Command::kVerify}) {
    if (text == ToString(c)) return c;
  }
  Fail("unknown command '" + text + "'");
}

const std::map<std::string, std::vector<std::string>>& SectionKeys() {
  static const std::map<std::string, std::vector<std::string>> sections{
      {"run", {"command", "problem", "seed", "output", "threads"}},
      {"partition", {"K", "partition", "reference_K"}},
      {"solver", {"tol", "max_iter"}},
      {"phm", {"r"}},
      {"duopoly", {"sigma", "reps", "N"}},
      {"drlcp", {"samples", "starts", "analytic", "system_out", "system", "candidate"}},
  };
  return sections;
}

RunConfig ConfigFromSettings(const Settings& settings) {
  const auto command_it = settings.find("command");
  if (command_it == settings.end()) Fail("no command given");
  RunConfig c;
  c.command = ParseCommand(command_it->second);
  for (const auto& [key, value] : settings) {
    if (!KeyApplies(c.command, key)) {
      bool known = false;
      for (const auto& [section, keys] : SectionKeys()) {
        known = known || std::find(keys.begin(), keys.end(), key) != keys.end();
      }
      if (!known) Fail("unknown key '" + key + "'");
      Fail("key '" + key + "' does not apply to command " + std::string(ToString(c.command)));
    }
    if (key == "command") continue;
    if (key == "problem") {
      if (value.empty()) Fail("problem: empty value");
      c.problem = value;
    } else if (key == "seed") {
      const long long s = ParseInteger(key, value);
      if (s < 0) Fail("seed: expected a nonnegative integer");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "output") {
      if (value.empty()) Fail("output: empty value");
      c.output = value;
    } else if (key == "threads") {
      const long long t = ParseInteger(key, value);
      if (t < 0 || t > 4096) Fail("threads: expected 0..4096");
      c.threads = static_cast<int>(t);
    } else if (key == "K") {
      for (const std::string& item : SplitList(value)) c.K.push_back(ParsePositiveInt("K", item));
      if (c.K.empty()) Fail("K: empty list");
    } else if (key == "partition") {
      c.partition = ParsePartition(value);
    } else if (key == "reference_K") {
      c.reference_K = ParsePositiveInt(key, value);
    } else if (key == "tol") {
      c.tol = ParsePositiveReal(key, value);
    } else if (key == "max_iter") {
      c.max_iter = ParsePositiveInt(key, value);
    } else if (key == "r") {
      c.r = ParsePositiveReal(key, value);
    } else if (key == "sigma") {
      for (const std::string& item : SplitList(value)) {
        c.sigma.push_back(ParsePositiveReal("sigma", item));
      }
      if (c.sigma.empty()) Fail("sigma: empty list");
    } else if (key == "reps") {
      c.reps = ParsePositiveInt(key, value);
    } else if (key == "N") {
      c.N = ParsePositiveInt(key, value);
    } else if (key == "starts") {
      c.starts = ParsePositiveInt(key, value);
    } else if (key == "samples") {
      c.samples = ParsePositiveInt(key, value);
    } else if (key == "analytic") {
      c.analytic = ParseBool(key, value);
    } else if (key == "system") {
      c.system = value;
    } else if (key == "candidate") {
      c.candidate = value;
    } else if (key == "system_out") {
      c.system_out = value;
    }
  }

  switch (c.command) {
    case Command::kSolve:
      if (c.K.empty()) c.K = {20};
      if (c.tol == 0.0) c.tol = 1e-10;
      if (c.max_iter == 0) c.max_iter = 200;
      break;
    case Command::kPhm:
      if (c.K.empty()) c.K = {20};
      if (c.K.size() != 1) Fail("phm: K must be a single value");
      if (c.tol == 0.0) c.tol = 1e-8;
      if (c.max_iter == 0) c.max_iter = 1000;
      break;
    case Command::kRefine:
      if (c.K.empty()) Fail("refine: a K schedule is required");
      if (c.tol == 0.0) c.tol = 1e-10;
      if (c.max_iter == 0) c.max_iter = 200;
      break;
    case Command::kDrlcp:
      if (c.tol == 0.0) c.tol = 1e-9;
      if (c.max_iter == 0) c.max_iter = 300;
      break;
    case Command::kDuopolyError:
      if (c.K.empty()) c.K = {5, 10, 20, 40, 60, 100};
      if (c.sigma.empty()) c.sigma = {0.1, 0.5, 1.0, 10.0};
      if (c.problem != "duopoly") Fail("duopoly-error: problem must be duopoly");
      break;
    case Command::kVerify:
      if (c.system.empty()) Fail("verify: --system is required");
      if (c.candidate.empty()) Fail("verify: --candidate is required");
      if (c.tol == 0.0) c.tol = 1e-8;
      break;
  }
  if (c.command != Command::kDuopolyError) {
    if (c.sigma.empty()) c.sigma = {0.1};
    if (c.sigma.size() != 1) {
      Fail(std::string(ToString(c.command)) + ": sigma must be a single value");
    }
  }
  return c;
}

Settings SettingsFromConfig(const RunConfig& c) {
  Settings all{
      {"command", std::string(ToString(c.command))},
      {"problem", c.problem},
      {"seed", std::to_string(c.seed)},
      {"output", c.output},
      {"threads", std::to_string(c.threads)},
      {"K", ListToString(c.K)},
      {"partition", std::string(ToString(c.partition))},
      {"reference_K", std::to_string(c.reference_K)},
      {"tol", FormatDouble(c.tol)},
      {"max_iter", std::to_string(c.max_iter)},
      {"r", FormatDouble(c.r)},
      {"sigma", ListToString(c.sigma)},
      {"reps", std::to_string(c.reps)},
      {"N", std::to_string(c.N)},
      {"starts", std::to_string(c.starts)},
      {"samples", std::to_string(c.samples)},
      {"analytic", c.analytic ? "true" : "false"},
      {"system", c.system},
      {"candidate", c.candidate},
      {"system_out", c.system_out},
  };
  Settings out;
  for (const auto& [key, value] : all) {
    if (!KeyApplies(c.command, key)) continue;
    if (value.empty() && (key == "system_out" || key == "system" || key == "candidate")) continue;
    out[key] = value;
  }
  return out;
}

std::vector<KeyValueLine> ReadKeyValueLines(const std::string& text) {
  std::vector<KeyValueLine> out;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto at = [&](const std::string& msg) {
      Fail("line " + std::to_string(line_no) + ": " + msg);
    };
    std::string line = raw;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = Trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') at("unterminated section header");
      section = Trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) at("empty section name");
      out.push_back({section, "", "", line_no});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) at("expected key = value");
    KeyValueLine kv{section, Trim(std::string_view(line).substr(0, eq)),
                    Trim(std::string_view(line).substr(eq + 1)), line_no};
    if (kv.key.empty()) at("empty key");
    out.push_back(std::move(kv));
  }
  return out;
}

Settings ParseConfigText(const std::string& text) {
  Settings out;
  for (const KeyValueLine& kv : ReadKeyValueLines(text)) {
    const auto at = [&](const std::string& msg) {
      Fail("line " + std::to_string(kv.line) + ": " + msg);
    };
    if (!kv.section.empty() && !SectionKeys().contains(kv.section)) {
      at("unknown section [" + kv.section + "]");
    }
    if (kv.key.empty()) continue;
    bool known = false;
    if (kv.section.empty()) {
      for (const auto& [name, keys] : SectionKeys()) {
        known = known || std::find(keys.begin(), keys.end(), kv.key) != keys.end();
      }
    } else {
      const auto& keys = SectionKeys().at(kv.section);
      known = std::find(keys.begin(), keys.end(), kv.key) != keys.end();
    }
    if (!known) {
      at("unknown key '" + kv.key + "'" + (kv.section.empty() ? "" : " in [" + kv.section + "]"));
    }
    if (out.contains(kv.key)) at("duplicate key '" + kv.key + "'");
    out[kv.key] = kv.value;
  }
  return out;
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Settings ParseConfigFile(const std::string& path) {
  try {
    return ParseConfigText(ReadTextFile(path));
  } catch (const Error& e) {
    Fail(path + ": " + e.what());
  }
}

std::string FormatHeader(const RunConfig& config, const std::string& timestamp) {
  const Settings s = SettingsFromConfig(config);
  std::string out = "# slcp command=" + Escape(s.at("command"));
  for (const auto& [key, value] : s) {
    if (key == "command") continue;
    out += " " + key + "=" + Escape(value);
  }
  out += " timestamp=" + Escape(timestamp);
  return out;
}

RunConfig ConfigFromHeader(const std::string& line) {
  std::istringstream in(line);
  std::string token;
  in >> token;
  if (token != "#") Fail("header: missing '#'");
  in >> token;
  if (token != "slcp") Fail("header: not an slcp header");
  Settings s;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) Fail("header: malformed field '" + token + "'");
    const std::string key = token.substr(0, eq);
    if (key == "timestamp") continue;
    s[key] = Unescape(token.substr(eq + 1));
  }
  return ConfigFromSettings(s);
}

std::optional<RunConfig> ParseCommandLine(int argc, const char* const* argv, std::ostream& out) {
  CLI::App app{"Two-stage stochastic LCP solver and experiments", "slcp"};
  app.require_subcommand(0, 1);
  std::string config_path;
  std::string replay_path;
  app.add_option("--config", config_path, "Run configuration file");
  app.add_option("--replay", replay_path, "Rerun the configuration in an output file's header (writes to stdout unless -o is given)");

  struct Flag {
    std::string key;
    std::string name;
    std::string help;
    bool is_switch = false;
  };
  const std::vector<Flag> flags{
      {"problem", "--problem", "Builtin name (duopoly, test1d, constant) or problem file"},
      {"seed", "--seed", "Base seed (default 0)"},
      {"output", "--output,-o", "Output path, '-' for stdout"},
      {"threads", "--threads", "Worker cap (falls back to SLCP_THREADS)"},
      {"K", "--K", "Cell count or comma-separated schedule"},
      {"partition", "--partition", "auto, uniform or voronoi"},
      {"reference_K", "--reference-K", "Reference cell count for refine"},
      {"tol", "--tol", "Solver tolerance"},
      {"max_iter", "--max-iter", "Iteration cap"},
      {"r", "--r", "Proximal parameter"},
      {"sigma", "--sigma", "Truncated-normal sigma (list for duopoly-error)"},
      {"reps", "--reps", "Replications"},
      {"N", "--N", "Evaluation samples per replication"},
      {"starts", "--starts", "Multistart count"},
      {"samples", "--samples", "Scenario samples for the DRLCP system"},
      {"analytic", "--analytic", "Emit the closed-form duopoly candidate", true},
      {"system", "--system", "DRLCP system file"},
      {"candidate", "--candidate", "DRLCP candidate file"},
      {"system_out", "--system-out", "Write the DRLCP system file here"},
  };

  struct Bound {
    CLI::App* app;
    Command command;
  };
  std::vector<Bound> subs;
  std::map<std::pair<CLI::App*, std::string>, std::string> values;
  std::map<std::pair<CLI::App*, std::string>, CLI::Option*> options;
  const auto add_flags = [&](CLI::App* target, std::optional<Command> command) {
    for (const Flag& f : flags) {
      const bool applies = command ? KeyApplies(*command, f.key)
                                   : std::find(CommonKeys().begin(), CommonKeys().end(),
                                               f.key) != CommonKeys().end();
      if (!applies) continue;
      const auto slot = std::make_pair(target, f.key);
      if (f.is_switch) {
        options[slot] = target->add_flag(f.name, f.help);
      } else {
        options[slot] = target->add_option(f.name, values[slot], f.help);
      }
    }
  };
  add_flags(&app, std::nullopt);
  const std::vector<std::pair<Command, std::string>> descriptions{
      {Command::kSolve, "Direct solve of the discretized problem"},
      {Command::kPhm, "Progressive hedging on the discretized problem"},
      {Command::kRefine, "Refinement study against a reference discretization"},
      {Command::kDrlcp, "Sample-based distributionally robust solve"},
      {Command::kDuopolyError, "Piecewise-constant multiplier error experiment"},
      {Command::kVerify, "Check a DRLCP candidate against a system file"},
  };
  for (const auto& [command, help] : descriptions) {
    CLI::App* sub = app.add_subcommand(std::string(ToString(command)), help);
    add_flags(sub, command);
    subs.push_back({sub, command});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    Fail(e.what());
  }

  Settings settings;
  if (!config_path.empty() && !replay_path.empty()) Fail("use either --config or --replay");
  if (!config_path.empty()) settings = ParseConfigFile(config_path);
  if (!replay_path.empty()) {
    std::istringstream in(ReadTextFile(replay_path));
    std::string line;
    std::getline(in, line);
    settings = SettingsFromConfig(ConfigFromHeader(line));
    settings["output"] = "-";
  }
  const auto apply = [&](CLI::App* target) {
    for (const Flag& f : flags) {
      const auto slot = std::make_pair(target, f.key);
      const auto it = options.find(slot);
      if (it == options.end() || it->second->count() == 0) continue;
      settings[f.key] = f.is_switch ? "true" : values[slot];
    }
  };
  apply(&app);
  for (const Bound& b : subs) {
    if (!b.app->parsed()) continue;
    const auto existing = settings.find("command");
    if (existing != settings.end() && existing->second != ToString(b.command)) {
      for (auto it = settings.begin(); it != settings.end();) {
        it = KeyApplies(b.command, it->first) ? std::next(it) : settings.erase(it);
      }
    }
    settings["command"] = std::string(ToString(b.command));
    apply(b.app);
  }
  if (!settings.contains("command")) Fail("no command given (try --help)");
  if (!settings.contains("threads")) {
    if (const char* env = std::getenv("SLCP_THREADS"); env != nullptr && *env != '\0') {
      settings["threads"] = env;
    }
  }
  return ConfigFromSettings(settings);
}

}  // namespace slcp::cli
