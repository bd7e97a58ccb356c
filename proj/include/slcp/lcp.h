#pragma once

// Dense linear complementarity problems
//
//   find z >= 0  with  w = M z + q >= 0  and  z' w = 0,
//
// together with the active-set calculus used to write LCP solutions in closed
// form: for a 0/1 diagonal D, the matrix (I - D(I - M))^{-1} D maps -q to the
// solution whenever D marks the rows where w_j <= z_j.

#include <optional>
#include <string>
#include <vector>

#include "slcp/common.h"

namespace slcp {

struct Lcp {
  Matrix M;
  Vector q;

  Lcp() = default;
  Lcp(Matrix M_in, Vector q_in);  // validates shape and finiteness
  int size() const { return static_cast<int>(q.size()); }
};

enum class LcpMethod { kNewton, kLemke, kBruteForce };

std::string_view ToString(LcpMethod method);

struct SolverOptions {
  double tol = 1e-10;  // infinity norm of the natural residual
  int max_iter = 200;
  LcpMethod method = LcpMethod::kNewton;
  // Newton failures fall through to Lemke, then to enumeration when the
  // problem is small enough.
  bool fallback = true;
  int brute_force_limit = 12;

  void Validate() const;
};

struct LcpSolution {
  Vector z;
  double residual_inf = 0.0;
  // J = { j : (Mz + q)_j <= z_j }, ascending.
  std::vector<int> active_set;
  int iterations = 0;
  LcpMethod method_used = LcpMethod::kNewton;
};

// min(z, Mz + q) componentwise.
Vector NaturalResidual(const Lcp& lcp, const Vector& z);
double NaturalResidualNorm(const Lcp& lcp, const Vector& z);

// Index set { j : w_j <= z_j } with w = Mz + q (ties belong to the set).
std::vector<int> ActiveSet(const Vector& z, const Vector& w);

// Solves with the configured method and fallbacks. Throws NotConvergedError
// when every method fails, or Error(kNotMonotone) when Newton meets a
// singular generalized Jacobian and fallbacks are disabled.
LcpSolution SolveLcp(const Lcp& lcp, const SolverOptions& opts = {},
                     const std::optional<Vector>& warm_start = std::nullopt);

// Semismooth Newton on the natural residual with Armijo backtracking.
LcpSolution SolveLcpNewton(const Lcp& lcp, const SolverOptions& opts,
                           const std::optional<Vector>& warm_start = std::nullopt);

// Lemke's complementary pivoting with covering vector (1, ..., 1).
LcpSolution SolveLcpLemke(const Lcp& lcp, const SolverOptions& opts);

// Enumerates all 2^m index sets in ascending size, then lexicographic order,
// and returns the first feasible candidate. m <= 20.
LcpSolution BruteForceLcp(const Lcp& lcp);

// Every solution found by enumeration, in enumeration order (m <= 20).
std::vector<Vector> EnumerateLcpSolutions(const Lcp& lcp);

// 0/1 diagonal of the index set.
Vector IndicatorDiagonal(int m, const std::vector<int>& J);

// (I - D_J (I - M))^{-1} D_J.
Matrix ActiveMatrixU(const Matrix& M, const std::vector<int>& J);

struct SolutionOperator {
  Matrix W;
  Vector D;  // diagonal of D, entries in {0, 1}
  Vector y;  // -W (N x + q2)
};

// Solves 0 <= y  _|_  M y + N x + q2 >= 0 and returns the closed-form
// operator of the solution's active set.
SolutionOperator SolutionOperatorW(const Matrix& M, const Matrix& N, const Vector& q2,
                                   const Vector& x, const SolverOptions& opts = {});

struct StabilityConstants {
  double beta = 0.0;
  double alpha = 0.0;
  Vector worst_D;  // diagonal attaining beta
};

// beta = max over 0/1 diagonal D of ||(I - D + D M)^{-1} D||_2 and
// alpha = beta / (1 - eta). m <= 20.
StabilityConstants ComputeStabilityConstants(const Matrix& M, double eta);

// Every principal minor strictly positive. m <= 20.
bool IsPMatrix(const Matrix& M);

}  // namespace slcp
