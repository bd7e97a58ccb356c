#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace slcp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ErrorCode {
  kDimensionMismatch,
  kInvalidArgument,
  kNotConverged,
  kNotMonotone,
  kNotMonotoneAt,
  kNoSolution,
  kSingularPivot,
  kDuplicateCenters,
  kEmptyCell,
  kPointOutsideSupport,
  kInvalidMultiplier,
  kScenarioFailure,
  kNoFeasiblePoint,
  kInvalidForExample,
  kConditionViolated,
  kDegenerateDeterminant,
  kParseError,
};

std::string_view ToString(ErrorCode code);

/// Base of every exception thrown by the library. The code identifies the
/// failure class; the message carries the instance detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

/// An iterative method stopped without reaching its tolerance.
class NotConvergedError : public Error {
 public:
  NotConvergedError(const std::string& message, int iterations,
                    double best_residual);
  int iterations() const { return iterations_; }
  double best_residual() const { return best_residual_; }

 private:
  int iterations_;
  double best_residual_;
};

/// Axis-aligned box [lo, hi] in R^l.
struct Box {
  Vector lo;
  Vector hi;

  Box() = default;
  Box(Vector lo_in, Vector hi_in);
  static Box Cube(int dim, double lo, double hi);

  int dim() const { return static_cast<int>(lo.size()); }
  bool Contains(const Vector& point, double slack = 0.0) const;
  Vector Center() const;
  double Diameter() const;
};

// Row-major flattening used by serialization and the DRLCP parameter vector.
std::vector<double> FlattenRowMajor(const Matrix& m);

// Non-fatal diagnostics (empty cells, indefinite blocks). The default sink
// writes "warning: <msg>" to stderr; tests may replace it.
using WarningSink = std::function<void(const std::string&)>;
void Warn(const std::string& message);
WarningSink SetWarningSink(WarningSink sink);

void CheckFinite(const Matrix& m, std::string_view what);
void CheckFinite(const Vector& v, std::string_view what);

}  // namespace slcp
