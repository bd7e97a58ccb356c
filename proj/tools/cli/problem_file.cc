#include "cli/problem_file.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <regex>
#include <vector>

#include "cli/config.h"
#include "slcp/common.h"

namespace slcp::cli {
namespace {

[[noreturn]] void Fail(const std::string& message) { throw Error(ErrorCode::kParseError, message); }

struct Entry {
  std::string value;
  int line = 0;
};

Matrix ToMatrix(const std::string& key, const Entry& e, int rows, int cols) {
  const std::vector<double> v = ParseRealList(key, e.value);
  if (static_cast<int>(v.size()) != rows * cols) {
    Fail("line " + std::to_string(e.line) + ": " + key + " needs " + std::to_string(rows * cols) +
         " values, got " + std::to_string(v.size()));
  }
  Matrix out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out(i, j) = v[static_cast<std::size_t>(i * cols + j)];
  }
  return out;
}

// Constant term plus one coefficient per xi coordinate; absent terms are zero.
std::vector<Matrix> AffineTerms(const std::map<std::string, Entry>& entries,
                                const std::string& base, int rows, int cols, int dim,
                                bool required) {
  std::vector<Matrix> terms(static_cast<std::size_t>(dim) + 1, Matrix::Zero(rows, cols));
  const auto it = entries.find(base);
  if (it != entries.end()) {
    terms[0] = ToMatrix(base, it->second, rows, cols);
  } else if (required) {
    Fail("problem file: missing key '" + base + "'");
  }
  for (int k = 1; k <= dim; ++k) {
    const std::string key = base + "." + std::to_string(k);
    if (const auto jt = entries.find(key); jt != entries.end()) {
      terms[static_cast<std::size_t>(k)] = ToMatrix(key, jt->second, rows, cols);
    }
  }
  return terms;
}

Matrix Evaluate(const std::vector<Matrix>& terms, const Vector& xi) {
  Matrix out = terms[0];
  for (int k = 0; k < xi.size(); ++k) out += xi[k] * terms[static_cast<std::size_t>(k) + 1];
  return out;
}

}  // namespace

BuiltinProblem ParseProblemText(const std::string& text, const std::string& name) {
  std::map<std::string, Entry> entries;
  for (const KeyValueLine& kv : ReadKeyValueLines(text)) {
    const std::string where = "line " + std::to_string(kv.line) + ": ";
    if (kv.section != "problem") Fail(where + "expected entries under [problem]");
    if (kv.key.empty()) continue;
    if (entries.contains(kv.key)) Fail(where + "duplicate key '" + kv.key + "'");
    entries[kv.key] = Entry{kv.value, kv.line};
  }
  static const std::regex kKnownKey(
      R"((n|m|support_lo|support_hi|density|sigma|A|q1|(B|M|N|q2)(\.[0-9]+)?))");
  for (const auto& [key, e] : entries) {
    if (!std::regex_match(key, kKnownKey)) {
      Fail("line " + std::to_string(e.line) + ": unknown key '" + key + "'");
    }
  }
  const auto get = [&](const std::string& key) -> const Entry& {
    const auto it = entries.find(key);
    if (it == entries.end()) Fail("problem file: missing key '" + key + "'");
    return it->second;
  };
  const int n = ParseCount("n", get("n").value);
  const int m = ParseCount("m", get("m").value);
  const std::vector<double> lo = ParseRealList("support_lo", get("support_lo").value);
  const std::vector<double> hi = ParseRealList("support_hi", get("support_hi").value);
  if (lo.size() != hi.size()) Fail("problem file: support_lo and support_hi differ in length");
  const int dim = static_cast<int>(lo.size());

  for (const auto& [key, e] : entries) {
    const std::size_t dot = key.find('.');
    if (dot != std::string::npos) {
      const int k = std::atoi(key.c_str() + dot + 1);
      if (k < 1 || k > dim || key.substr(dot + 1) != std::to_string(k)) {
        Fail("line " + std::to_string(e.line) + ": no parameter index for key '" + key + "'");
      }
    }
  }

  Box support;
  try {
    support = Box(Eigen::Map<const Vector>(lo.data(), dim), Eigen::Map<const Vector>(hi.data(), dim));
  } catch (const Error& e) {
    Fail(std::string("problem file: ") + e.what());
  }
  const Matrix A = ToMatrix("A", get("A"), n, n);
  const Vector q1 = ToMatrix("q1", get("q1"), n, 1).col(0);
  const auto B = AffineTerms(entries, "B", n, m, dim, true);
  const auto M = AffineTerms(entries, "M", m, m, dim, true);
  const auto N = AffineTerms(entries, "N", m, n, dim, true);
  const auto q2 = AffineTerms(entries, "q2", m, 1, dim, true);
  auto oracle = [B, M, N, q2](const Vector& xi) {
    return Coefficients{Evaluate(B, xi), Evaluate(M, xi), Evaluate(N, xi), Evaluate(q2, xi).col(0)};
  };

  std::string density_kind = "uniform";
  if (const auto it = entries.find("density"); it != entries.end()) density_kind = it->second.value;
  std::optional<Density> density;
  if (density_kind == "uniform") {
    if (entries.contains("sigma")) Fail("problem file: sigma needs density = normal");
    density = Density::Uniform(support);
  } else if (density_kind == "normal") {
    const std::vector<double> s = ParseRealList("sigma", get("sigma").value);
    if (s.size() != 1 || !(s[0] > 0.0)) Fail("problem file: sigma must be one positive value");
    density = Density::TruncatedNormal(support, s[0]);
  } else {
    Fail("problem file: density must be uniform or normal, got '" + density_kind + "'");
  }
  try {
    return BuiltinProblem{name, TwoStageProblem(A, q1, oracle, support), *density, std::nullopt,
                          std::nullopt};
  } catch (const Error& e) {
    Fail(std::string("problem file: ") + e.what());
  }
}

BuiltinProblem ResolveProblem(const std::string& source, double sigma) {
  const std::vector<std::string> names = BuiltinNames();
  if (std::find(names.begin(), names.end(), source) != names.end()) {
    return MakeBuiltin(source, sigma);
  }
  if (!std::filesystem::is_regular_file(source)) {
    std::string list;
    for (const std::string& s : names) list += (list.empty() ? "" : ", ") + s;
    Fail("problem '" + source + "' is neither a builtin (" + list + ") nor a readable file");
  }
  try {
    return ParseProblemText(ReadTextFile(source), source);
  } catch (const Error& e) {
    Fail(source + ": " + e.what());
  }
}

}  // namespace slcp::cli
