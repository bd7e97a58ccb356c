#include "slcp/common.h"

#include <cmath>
#include <iostream>
#include <mutex>

namespace slcp {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNotConverged: return "NotConverged";
    case ErrorCode::kNotMonotone: return "NotMonotone";
    case ErrorCode::kNotMonotoneAt: return "NotMonotoneAt";
    case ErrorCode::kNoSolution: return "NoSolution";
    case ErrorCode::kSingularPivot: return "SingularPivot";
    case ErrorCode::kDuplicateCenters: return "DuplicateCenters";
    case ErrorCode::kEmptyCell: return "EmptyCell";
    case ErrorCode::kPointOutsideSupport: return "PointOutsideSupport";
    case ErrorCode::kInvalidMultiplier: return "InvalidMultiplier";
    case ErrorCode::kScenarioFailure: return "ScenarioFailure";
    case ErrorCode::kNoFeasiblePoint: return "NoFeasiblePoint";
    case ErrorCode::kInvalidForExample: return "InvalidForExample";
    case ErrorCode::kConditionViolated: return "ConditionViolated";
    case ErrorCode::kDegenerateDeterminant: return "DegenerateDeterminant";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ToString(code)) + ": " + message),
      code_(code) {}

NotConvergedError::NotConvergedError(const std::string& message,
                                     int iterations, double best_residual)
    : Error(ErrorCode::kNotConverged,
            message + " (iterations=" + std::to_string(iterations) +
                ", best residual=" + std::to_string(best_residual) + ")"),
      iterations_(iterations),
      best_residual_(best_residual) {}

Box::Box(Vector lo_in, Vector hi_in) : lo(std::move(lo_in)), hi(std::move(hi_in)) {
  if (lo.size() != hi.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "box bounds differ in length");
  }
  if (lo.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "box must have dimension >= 1");
  }
  for (Eigen::Index k = 0; k < lo.size(); ++k) {
    if (!(lo[k] < hi[k])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "box requires lo < hi in every coordinate");
    }
  }
}

Box Box::Cube(int dim, double lo, double hi) {
  return Box(Vector::Constant(dim, lo), Vector::Constant(dim, hi));
}

bool Box::Contains(const Vector& point, double slack) const {
  if (point.size() != lo.size()) return false;
  for (Eigen::Index k = 0; k < lo.size(); ++k) {
    if (point[k] < lo[k] - slack || point[k] > hi[k] + slack) return false;
  }
  return true;
}

Vector Box::Center() const { return 0.5 * (lo + hi); }

double Box::Diameter() const { return (hi - lo).norm(); }

std::vector<double> FlattenRowMajor(const Matrix& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  }
  return out;
}

namespace {

std::mutex& SinkMutex() {
  static std::mutex mu;
  return mu;
}

WarningSink& Sink() {
  static WarningSink sink = [](const std::string& msg) {
    std::cerr << "warning: " << msg << "\n";
  };
  return sink;
}

}  // namespace

void Warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(SinkMutex());
  if (Sink()) Sink()(message);
}

WarningSink SetWarningSink(WarningSink sink) {
  std::lock_guard<std::mutex> lock(SinkMutex());
  std::swap(Sink(), sink);
  return sink;
}

void CheckFinite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " has non-finite entries");
  }
}

void CheckFinite(const Vector& v, std::string_view what) {
  if (!v.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " has non-finite entries");
  }
}

}  // namespace slcp
