#pragma once

// Distributionally robust LCP over a moment ambiguity set
//   { P : E_P[psi_j] = b_j (j < s),  E_P[psi_j] <= b_j (s <= j < t) },
// represented through its dual on a sample set xi^1..xi^K:
//   x >= 0,
//   -A x - B(xi^i) y_i - q1 - Lambda1 (psi(xi^i) - b) <= 0,
//   x' [A x + B(xi^i) y_i + q1 - Lambda2 (psi(xi^i) - b)] <= 0,
//   Lambda1, Lambda2 >= 0 in the inequality columns,
//   y_i solving the recourse LCP at (x, xi^i).

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "slcp/common.h"
#include "slcp/lcp.h"
#include "slcp/two_stage.h"

namespace slcp {

struct MomentAmbiguitySet {
  std::function<Vector(const Vector&)> psi;  // R^l -> R^t
  Vector b;                                  // t targets
  int s = 0;                                 // leading equality count

  int t() const { return static_cast<int>(b.size()); }
  void Validate() const;
  Vector Evaluate(const Vector& xi) const;
};

class DrlcpSystem {
 public:
  DrlcpSystem(TwoStageProblem prob, MomentAmbiguitySet amb, std::vector<Vector> samples);

  const TwoStageProblem& prob() const { return prob_; }
  const MomentAmbiguitySet& amb() const { return amb_; }
  const std::vector<Vector>& samples() const { return samples_; }
  int K() const { return static_cast<int>(samples_.size()); }
  // psi(xi^i) - b for every sample.
  const std::vector<Vector>& centered_moments() const { return centered_; }

 private:
  TwoStageProblem prob_;
  MomentAmbiguitySet amb_;
  std::vector<Vector> samples_;
  std::vector<Vector> centered_;
};

// Throws Error(kPointOutsideSupport) for samples outside the support.
DrlcpSystem AssembleDrlcp(const TwoStageProblem& prob, const MomentAmbiguitySet& amb,
                          const std::vector<Vector>& samples);

struct DrlcpCandidate {
  Vector x;
  Matrix Lambda1;  // n x t
  Matrix Lambda2;  // n x t
};

struct DrlcpResidual {
  // Violations, each clipped at zero except the second-stage natural residual.
  Vector x_sign;          // n
  Vector first_stage;     // K * n, sample-major
  Vector scalar_rows;     // K
  Vector lambda_sign;     // 2 * n * (t - s)
  Vector second_stage;    // K * m
  // Unclipped first-stage and scalar row values.
  Vector first_stage_raw;
  Vector scalar_rows_raw;
  std::vector<Vector> y;
  Vector stacked;
  double norm = 0.0;  // Euclidean norm of stacked
};

DrlcpResidual EvaluateDrlcpResidual(const DrlcpSystem& sys, const DrlcpCandidate& cand,
                                    const SolverOptions& lcp = {});

struct DrlcpSolveOptions {
  int starts = 10;
  std::uint64_t seed = 0;
  double tol = 1e-9;  // on the residual norm
  int max_iter = 300;
  // Search region for x. Without it x is kept nonnegative and random starts
  // draw x from [0, 1]^n.
  std::optional<Box> x_box;
  double lambda_range = 2.0;  // random starts draw Lambda from [-range, range]
  std::optional<DrlcpCandidate> warm_start;
  SolverOptions lcp;
};

struct DrlcpSolution {
  DrlcpCandidate candidate;
  std::vector<Vector> y;
  double residual = 0.0;
  int start = 0;  // -1 for the warm start
  int iterations = 0;
};

// Projected Levenberg-Marquardt on the squared residual from the projected
// origin and starts - 1 seeded random points. Throws Error(kNoFeasiblePoint)
// with the best residual when no start reaches tol.
DrlcpSolution SolveDrlcp(const DrlcpSystem& sys, const DrlcpSolveOptions& opts = {});

struct DrlcpGroupReport {
  std::string group;
  double max_violation = 0.0;
};

struct DrlcpVerifyReport {
  std::vector<DrlcpGroupReport> groups;  // x_sign, first_stage, scalar, lambda_sign, second_stage
  bool pass = false;
  std::string worst_group;
  double worst_violation = 0.0;
};

DrlcpVerifyReport VerifyDrlcp(const DrlcpSystem& sys, const DrlcpCandidate& cand, double tol,
                              const SolverOptions& lcp = {});

// Verification against an inclusive uniform grid over the support with at
// most max_points points.
DrlcpVerifyReport StressVerifyDrlcp(const DrlcpSystem& sys, const DrlcpCandidate& cand,
                                    double tol, int max_points = 10000);

// Flat text: '#' comment lines, then "x ...", "lambda1 ...", "lambda2 ..."
// with the matrices row-major.
std::string FormatCandidate(const DrlcpCandidate& cand);
DrlcpCandidate ParseCandidate(const std::string& text);

}  // namespace slcp
