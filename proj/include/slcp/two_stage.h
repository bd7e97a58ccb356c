#pragma once

// Two-stage stochastic LCP
//
//   0 <= x     _|_  A x + E[B(xi) y(xi)] + q1                >= 0
//   0 <= y(xi) _|_  N(xi) x + M(xi) y(xi) + q2(xi)           >= 0  a.e. xi
//
// over a compact box support.

#include <cstdint>
#include <functional>
#include <optional>

#include "slcp/common.h"
#include "slcp/density.h"
#include "slcp/lcp.h"
#include "slcp/quadrature.h"

namespace slcp {

struct Coefficients {
  Matrix B;  // n x m
  Matrix M;  // m x m
  Matrix N;  // m x n
  Vector q2;  // m
};

// Must be safe to call concurrently from several threads.
using CoefficientOracle = std::function<Coefficients(const Vector& xi)>;

class TwoStageProblem {
 public:
  // Validates shapes by evaluating the oracle at the support center.
  TwoStageProblem(Matrix A, Vector q1, CoefficientOracle oracle, Box support);

  int n() const { return static_cast<int>(q1_.size()); }
  int m() const { return m_; }
  const Matrix& A() const { return A_; }
  const Vector& q1() const { return q1_; }
  const Box& support() const { return support_; }
  int xi_dim() const { return support_.dim(); }

  // Oracle evaluation with shape and finiteness checks.
  Coefficients At(const Vector& xi) const;

 private:
  Matrix A_;
  Vector q1_;
  CoefficientOracle oracle_;
  Box support_;
  int m_ = 0;
};

struct SecondStageSolution {
  Vector y;
  Vector D;  // diagonal of the active-set indicator
  Matrix W;
};

// Slack for the semidefiniteness test of sym(M(xi)), relative to ||M||.
inline constexpr double kMonotoneSlack = 1e-12;

// Solves the recourse LCP at (x, xi). Throws Error(kNotMonotoneAt) if the
// symmetric part of M(xi) has a negative eigenvalue, and
// Error(kPointOutsideSupport) if xi is outside the support.
SecondStageSolution SolveSecondStage(const TwoStageProblem& prob, const Vector& x,
                                     const Vector& xi, const SolverOptions& opts = {});

// The recourse y alone, with the same checks. Unlike SolveSecondStage it
// does not need the solution operator, which is singular at some degenerate
// active sets.
Vector SecondStageY(const TwoStageProblem& prob, const Vector& x, const Vector& xi,
                    const SolverOptions& opts = {});

// min(x, A x + E^[B(xi) y(x, xi)] + q1) over the nodes of `quad`.
Vector ResidualF(const TwoStageProblem& prob, const Vector& x, const Density& density,
                 const QuadratureSpec& quad, const SolverOptions& opts = {});

struct MonotonicityReport {
  double kappa_min = 0.0;
  double kappa_mean = 0.0;
  Vector worst_xi;
  int sample_count = 0;
  bool strictly_monotone() const { return kappa_min > 0.0; }
};

// Smallest eigenvalue of sym([[A, B(xi)], [N(xi), M(xi)]]) at uniform samples
// of the support. A nonpositive kappa_min is logged as a warning.
MonotonicityReport ComputeMonotonicityReport(const TwoStageProblem& prob, int sample_count,
                                             std::uint64_t seed);

// lambda_min of the symmetric part of a square matrix.
double MinSymmetricEigenvalue(const Matrix& X);

}  // namespace slcp
