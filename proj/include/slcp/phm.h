#pragma once

// Progressive hedging for the discretized two-stage SLCP. Each iteration
// solves K independent proximal scenario LCPs, averages the first-stage
// parts with the cell probabilities, and updates the first-stage
// multipliers so that sum_i p_i w_i stays zero.

#include <optional>
#include <string>
#include <vector>

#include "slcp/discretize.h"
#include "slcp/lcp.h"

namespace slcp {

struct PhmState {
  int nu = 0;
  double r = 1.0;
  std::vector<Vector> x;  // identical across scenarios after every step
  std::vector<Vector> y;
  std::vector<Vector> w;  // first-stage multipliers
  Vector x_bar;
};

struct PhmRecord {
  int nu = 0;
  double primal_change = 0.0;  // ||x_bar^{nu+1} - x_bar^nu||_inf
  double spread = 0.0;         // max_i ||x_hat_i - x_bar^{nu+1}||_inf
  double residual = 0.0;       // stacked residual at (x_bar, y_hat)
  double multiplier_sum = 0.0; // ||sum_i p_i w_i||_inf after the update
};

struct PhmTrace {
  std::vector<PhmRecord> records;
  std::string ToCsv() const;
};

struct PhmOptions {
  double r = 1.0;
  double tol = 1e-8;
  int max_iter = 1000;
  SolverOptions scenario;
};

// Tolerance for sum_i p_i w0_i = 0 on user-supplied multipliers.
inline constexpr double kMultiplierTol = 1e-12;

// Missing y0 or w0 default to zero. Throws Error(kInvalidMultiplier) when the
// weighted multiplier sum is not zero.
PhmState PhmInit(const DiscreteSLCP& d, double r, const Vector& x0,
                 const std::optional<std::vector<Vector>>& y0 = std::nullopt,
                 const std::optional<std::vector<Vector>>& w0 = std::nullopt);

// One iteration. Scenario failures raise Error(kScenarioFailure) naming the
// scenario.
PhmState PhmStep(const PhmState& state, const DiscreteSLCP& d,
                 const SolverOptions& scenario = {}, PhmRecord* record = nullptr);

struct PhmResult {
  DiscreteSolution solution;
  PhmTrace trace;
  PhmState state;
};

class PhmNotConvergedError : public NotConvergedError {
 public:
  PhmNotConvergedError(const std::string& message, PhmTrace trace);
  const PhmTrace& trace() const { return trace_; }

 private:
  PhmTrace trace_;
};

// Iterates from x0 (zero by default) until primal change and spread are both
// at most tol.
PhmResult PhmSolve(const DiscreteSLCP& d, const PhmOptions& opts = {},
                   const std::optional<Vector>& x0 = std::nullopt);

}  // namespace slcp
