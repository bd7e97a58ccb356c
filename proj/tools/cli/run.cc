#include "cli/run.h"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cli/problem_file.h"
#include "slcp/csv.h"
#include "slcp/discretize.h"
#include "slcp/drlcp.h"
#include "slcp/duopoly.h"
#include "slcp/parallel.h"
#include "slcp/phm.h"
#include "slcp/problems.h"
#include "slcp/random.h"

namespace slcp::cli {
namespace {

constexpr std::uint64_t kSampleStream = 0x53414d504c45;

// Errors raised while reading inputs map to exit 2; everything after the
// inputs are accepted maps to exit 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename F>
auto Input(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
}

struct Output {
  std::string body;
  bool success = true;
};

PartitionKind ResolvePartition(PartitionChoice choice, const Density& density) {
  if (choice == PartitionChoice::kUniform) return PartitionKind::kUniformBox;
  if (choice == PartitionChoice::kVoronoi) return PartitionKind::kVoronoi;
  for (int k = 0; k < density.dim(); ++k) {
    if (density.marginal(k).kind() != Marginal::Kind::kUniform) return PartitionKind::kVoronoi;
  }
  return PartitionKind::kUniformBox;
}

void CheckCounts(PartitionKind kind, int dim, const std::vector<int>& Ks) {
  if (kind != PartitionKind::kUniformBox) return;
  for (int K : Ks) {
    const int per_axis = static_cast<int>(std::lround(std::pow(K, 1.0 / dim)));
    int total = 1;
    for (int k = 0; k < dim; ++k) total *= per_axis;
    if (total != K) {
      throw InputError("K=" + std::to_string(K) + " is not a perfect power of the dimension " +
                       std::to_string(dim) + " required by uniform partitions");
    }
  }
}

SolverOptions Solver(const RunConfig& c) {
  SolverOptions o;
  o.tol = c.tol;
  o.max_iter = c.max_iter;
  return o;
}

MomentOptions Moments(const RunConfig& c) {
  MomentOptions m;
  m.seed = c.seed;
  return m;
}

std::vector<Vector> DrawSamples(const Density& density, int count, std::uint64_t seed) {
  Rng rng(seed, {kSampleStream});
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(density.Sample(rng));
  return out;
}

Output RunSolve(const RunConfig& c) {
  const BuiltinProblem bp = Input([&] { return ResolveProblem(c.problem, c.sigma[0]); });
  const PartitionKind kind = ResolvePartition(c.partition, bp.density);
  CheckCounts(kind, bp.density.dim(), c.K);
  const int n = bp.problem.n();
  std::vector<std::string> header{"K", "cells", "max_diameter"};
  for (int j = 0; j < n; ++j) header.push_back("x" + std::to_string(j + 1));
  header.push_back("residual");
  header.push_back("iterations");
  Output out{CsvRecord(header)};
  for (int K : c.K) {
    const PartitionSkeleton sk = MakeSkeleton(kind, bp.density, K, c.seed);
    const Partition part = ComputeCellMoments(bp.problem, sk, bp.density, Moments(c));
    const DiscreteSLCP d(bp.problem, part);
    const DiscreteSolution sol = SolveDiscreteDirect(d, Solver(c));
    std::vector<std::string> row{std::to_string(K), std::to_string(part.K()),
                                 FormatDouble(part.max_diameter())};
    for (int j = 0; j < n; ++j) row.push_back(FormatDouble(sol.x[j]));
    row.push_back(FormatDouble(sol.residual_inf));
    row.push_back(std::to_string(sol.iterations));
    out.body += CsvRecord(row);
  }
  return out;
}

Output RunPhm(const RunConfig& c, std::ostream& err) {
  const BuiltinProblem bp = Input([&] { return ResolveProblem(c.problem, c.sigma[0]); });
  const PartitionKind kind = ResolvePartition(c.partition, bp.density);
  CheckCounts(kind, bp.density.dim(), c.K);
  const PartitionSkeleton sk = MakeSkeleton(kind, bp.density, c.K[0], c.seed);
  const Partition part = ComputeCellMoments(bp.problem, sk, bp.density, Moments(c));
  const DiscreteSLCP d(bp.problem, part);
  PhmOptions o;
  o.r = c.r;
  o.tol = c.tol;
  o.max_iter = c.max_iter;
  try {
    const PhmResult res = PhmSolve(d, o);
    return Output{res.trace.ToCsv()};
  } catch (const PhmNotConvergedError& e) {
    err << "error: " << e.what() << "\n";
    return Output{e.trace().ToCsv(), false};
  }
}

Output RunRefine(const RunConfig& c) {
  const BuiltinProblem bp = Input([&] { return ResolveProblem(c.problem, c.sigma[0]); });
  RefineOptions o;
  o.kind = ResolvePartition(c.partition, bp.density);
  std::vector<int> all = c.K;
  all.push_back(c.reference_K);
  CheckCounts(o.kind, bp.density.dim(), all);
  o.schedule = c.K;
  o.reference_K = c.reference_K;
  o.moments = Moments(c);
  o.solver = Solver(c);
  o.seed = c.seed;
  return Output{RefineStudy(bp.problem, bp.density, o).ToCsv()};
}

DrlcpSystem BuildSystem(const BuiltinProblem& bp, const std::vector<Vector>& samples) {
  if (!bp.ambiguity) {
    throw InputError("problem '" + bp.name + "' has no ambiguity set; drlcp needs duopoly");
  }
  return Input([&] { return AssembleDrlcp(bp.problem, *bp.ambiguity, samples); });
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << text;
  if (!f) throw InputError("write to '" + path + "' failed");
}

Output RunDrlcp(const RunConfig& c, std::ostream& err) {
  const BuiltinProblem bp = Input([&] { return ResolveProblem(c.problem, c.sigma[0]); });
  const std::vector<Vector> samples = DrawSamples(bp.density, c.samples, c.seed);
  const DrlcpSystem sys = BuildSystem(bp, samples);
  if (!c.system_out.empty()) {
    WriteFile(c.system_out, FormatSystemFile(SystemFile{c.problem, c.sigma[0], samples}));
  }
  DrlcpCandidate cand;
  if (c.analytic) {
    if (!bp.duopoly) throw InputError("--analytic needs the duopoly problem");
    cand = Input([&] { return DuopolyAnalyticSolution(*bp.duopoly).Candidate(); });
  } else {
    DrlcpSolveOptions o;
    o.starts = c.starts;
    o.seed = c.seed;
    o.tol = c.tol;
    o.max_iter = c.max_iter;
    if (bp.duopoly) o.x_box = DuopolyInteriorBox(*bp.duopoly);
    try {
      cand = SolveDrlcp(sys, o).candidate;
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return Output{"", false};
    }
  }
  const DrlcpResidual res = EvaluateDrlcpResidual(sys, cand);
  return Output{"# residual " + FormatDouble(res.norm) + "\n" + FormatCandidate(cand)};
}

Output RunDuopolyError(const RunConfig& c) {
  const BuiltinProblem bp = MakeBuiltin("duopoly", c.sigma[0]);
  ErrorExperimentOptions o;
  o.K_list = c.K;
  o.sigma_list = c.sigma;
  o.reps = c.reps;
  o.N = c.N;
  o.seed = c.seed;
  return Output{RunErrorExperiment(*bp.duopoly, o).ToCsv()};
}

Output RunVerify(const RunConfig& c) {
  const SystemFile sf = Input([&] { return ParseSystemText(ReadTextFile(c.system)); });
  const BuiltinProblem bp = Input([&] { return ResolveProblem(sf.problem, sf.sigma); });
  const DrlcpSystem sys = BuildSystem(bp, sf.samples);
  const DrlcpCandidate cand = Input([&] { return ParseCandidate(ReadTextFile(c.candidate)); });
  const int t = sys.amb().t();
  if (cand.x.size() != sys.prob().n() || cand.Lambda1.rows() != sys.prob().n() ||
      cand.Lambda1.cols() != t || cand.Lambda2.cols() != t) {
    throw InputError("candidate shape does not match the system (n=" +
                     std::to_string(sys.prob().n()) + ", t=" + std::to_string(t) + ")");
  }
  const DrlcpVerifyReport rep = VerifyDrlcp(sys, cand, c.tol);
  Output out{CsvRecord({"group", "max_violation", "tol", "pass"})};
  for (const DrlcpGroupReport& g : rep.groups) {
    out.body += CsvRecord({g.group, FormatDouble(g.max_violation), FormatDouble(c.tol),
                           g.max_violation <= c.tol ? "true" : "false"});
  }
  out.success = rep.pass;
  return out;
}

Output Dispatch(const RunConfig& c, std::ostream& err) {
  switch (c.command) {
    case Command::kSolve: return RunSolve(c);
    case Command::kPhm: return RunPhm(c, err);
    case Command::kRefine: return RunRefine(c);
    case Command::kDrlcp: return RunDrlcp(c, err);
    case Command::kDuopolyError: return RunDuopolyError(c);
    case Command::kVerify: return RunVerify(c);
  }
  return {};
}

}  // namespace

std::string CurrentTimestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string FormatSystemFile(const SystemFile& system) {
  std::string out = "# slcp drlcp system\n[system]\nproblem = " + system.problem +
                    "\nsigma = " + FormatDouble(system.sigma) + "\n[samples]\n";
  for (const Vector& xi : system.samples) {
    out += "xi =";
    for (int k = 0; k < xi.size(); ++k) out += (k ? ", " : " ") + FormatDouble(xi[k]);
    out += "\n";
  }
  return out;
}

SystemFile ParseSystemText(const std::string& text) {
  SystemFile out;
  bool have_problem = false;
  bool have_sigma = false;
  const auto fail = [](int line, const std::string& msg) {
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + msg);
  };
  for (const KeyValueLine& kv : ReadKeyValueLines(text)) {
    if (kv.section != "system" && kv.section != "samples") {
      fail(kv.line, "unknown section [" + kv.section + "]");
    }
    if (kv.key.empty()) continue;
    if (kv.section == "system" && kv.key == "problem" && !have_problem) {
      out.problem = kv.value;
      have_problem = true;
    } else if (kv.section == "system" && kv.key == "sigma" && !have_sigma) {
      const std::vector<double> s = ParseRealList("sigma", kv.value);
      if (s.size() != 1 || !(s[0] > 0.0)) fail(kv.line, "sigma must be one positive value");
      out.sigma = s[0];
      have_sigma = true;
    } else if (kv.section == "samples" && kv.key == "xi") {
      const std::vector<double> v = ParseRealList("xi", kv.value);
      if (!out.samples.empty() && static_cast<int>(v.size()) != out.samples.front().size()) {
        fail(kv.line, "sample dimension differs from the first sample");
      }
      out.samples.push_back(Eigen::Map<const Vector>(v.data(), static_cast<int>(v.size())));
    } else {
      fail(kv.line, "unexpected key '" + kv.key + "' in [" + kv.section + "]");
    }
  }
  if (!have_problem) throw Error(ErrorCode::kParseError, "system file: missing problem");
  if (out.samples.empty()) throw Error(ErrorCode::kParseError, "system file: no samples");
  return out;
}

int Run(const RunConfig& config, std::ostream& err) {
  return Run(config, err, CurrentTimestamp());
}

int Run(const RunConfig& config, std::ostream& err, const std::string& timestamp) {
  if (config.threads > 0) SetThreadCount(config.threads);
  Output out;
  try {
    out = Dispatch(config, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolverFailure;
  }
  const std::string text = FormatHeader(config, timestamp) + "\n" + out.body;
  if (config.output == "-") {
    std::cout << text << std::flush;
  } else {
    try {
      WriteFile(config.output, text);
    } catch (const InputError& e) {
      err << "error: " << e.what() << "\n";
      return kExitConfigError;
    }
  }
  return out.success ? kExitOk : kExitSolverFailure;
}

}  // namespace slcp::cli
