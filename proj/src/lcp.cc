#include "slcp/lcp.h"

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>

#include "lcp_internal.h"
#include "slcp/kernels.h"

namespace slcp {
namespace {

constexpr double kFeasibilitySlack = 1e-12;
constexpr int kMaxEnumerationSize = 20;

void CheckEnumerable(int m, std::string_view what) {
  if (m > kMaxEnumerationSize) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " enumerates 2^m sets and is limited to m <= 20");
  }
}

// Visits index sets by ascending size, lexicographic within a size.
template <typename Visit>
bool ForEachIndexSet(int m, Visit&& visit) {
  std::vector<int> J;
  for (int k = 0; k <= m; ++k) {
    J.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) J[static_cast<std::size_t>(i)] = i;
    for (;;) {
      if (visit(J)) return true;
      int pos = k - 1;
      while (pos >= 0 && J[static_cast<std::size_t>(pos)] == m - k + pos) --pos;
      if (pos < 0) break;
      ++J[static_cast<std::size_t>(pos)];
      for (int i = pos + 1; i < k; ++i) {
        J[static_cast<std::size_t>(i)] = J[static_cast<std::size_t>(i - 1)] + 1;
      }
    }
  }
  return false;
}

// z_J = -M_J^{-1} q_J, z elsewhere 0; nullopt when M_J is singular.
std::optional<Vector> ActiveSetCandidate(const Lcp& lcp, const std::vector<int>& J) {
  const int m = lcp.size();
  Vector z = Vector::Zero(m);
  if (J.empty()) return z;
  const auto k = static_cast<Eigen::Index>(J.size());
  Matrix MJ(k, k);
  Vector qJ(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    qJ[a] = lcp.q[J[static_cast<std::size_t>(a)]];
    for (Eigen::Index b = 0; b < k; ++b) {
      MJ(a, b) = lcp.M(J[static_cast<std::size_t>(a)], J[static_cast<std::size_t>(b)]);
    }
  }
  Eigen::FullPivLU<Matrix> lu(MJ);
  if (!lu.isInvertible()) return std::nullopt;
  const Vector zJ = lu.solve(-qJ);
  for (Eigen::Index a = 0; a < k; ++a) z[J[static_cast<std::size_t>(a)]] = zJ[a];
  return z;
}

bool IsFeasible(const Lcp& lcp, const Vector& z) {
  if ((z.array() < -kFeasibilitySlack).any()) return false;
  const Vector w = lcp.M * z + lcp.q;
  return !(w.array() < -kFeasibilitySlack).any();
}

std::string DiagonalString(const Vector& d) {
  std::ostringstream os;
  os << "diag(";
  for (Eigen::Index i = 0; i < d.size(); ++i) os << (i ? "," : "") << d[i];
  os << ")";
  return os.str();
}

}  // namespace

namespace internal {

Matrix NewtonJacobian(const Matrix& M, const Vector& z, const Vector& w) {
  const Eigen::Index m = z.size();
  Matrix J = Matrix::Identity(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (w[i] < z[i]) J.row(i) = M.row(i);
  }
  return J;
}

Vector PolishActiveSet(const Lcp& lcp, const Vector& z, double tol) {
  const Vector w = lcp.M * z + lcp.q;
  const Matrix J = NewtonJacobian(lcp.M, z, w);
  Eigen::PartialPivLU<Matrix> lu(J);
  if (!(lu.rcond() > kSingularRcond)) return z;
  const Vector F = z.cwiseMin(w);
  const Vector candidate = z - lu.solve(F);
  if ((candidate.array() < -tol).any()) return z;
  if (NaturalResidualNorm(lcp, candidate) <= NaturalResidualNorm(lcp, z)) return candidate;
  return z;
}

LcpSolution Finalize(const Lcp& lcp, Vector z, int iterations, LcpMethod method) {
  z = z.cwiseMax(0.0);
  LcpSolution sol;
  const Vector w = lcp.M * z + lcp.q;
  sol.residual_inf = NaturalResidualNorm(lcp, z);
  sol.active_set = ActiveSet(z, w);
  sol.z = std::move(z);
  sol.iterations = iterations;
  sol.method_used = method;
  return sol;
}

}  // namespace internal

Lcp::Lcp(Matrix M_in, Vector q_in) : M(std::move(M_in)), q(std::move(q_in)) {
  if (M.rows() != M.cols() || M.rows() != q.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "LCP requires square M matching q");
  }
  CheckFinite(M, "LCP matrix");
  CheckFinite(q, "LCP vector");
}

std::string_view ToString(LcpMethod method) {
  switch (method) {
    case LcpMethod::kNewton: return "newton";
    case LcpMethod::kLemke: return "lemke";
    case LcpMethod::kBruteForce: return "brute_force";
  }
  return "unknown";
}

void SolverOptions::Validate() const {
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "solver tol must be > 0");
  if (max_iter < 1) throw Error(ErrorCode::kInvalidArgument, "solver max_iter must be >= 1");
}

Vector NaturalResidual(const Lcp& lcp, const Vector& z) {
  if (z.size() != lcp.q.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "iterate length differs from LCP size");
  }
  const Vector w = lcp.M * z + lcp.q;
  Vector out(z.size());
  kernels::NaturalResidualMin(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())),
                              std::span<const double>(w.data(), static_cast<std::size_t>(w.size())),
                              std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

double NaturalResidualNorm(const Lcp& lcp, const Vector& z) {
  const Vector r = NaturalResidual(lcp, z);
  return r.size() == 0 ? 0.0 : r.cwiseAbs().maxCoeff();
}

std::vector<int> ActiveSet(const Vector& z, const Vector& w) {
  std::vector<int> J;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    if (w[j] <= z[j]) J.push_back(static_cast<int>(j));
  }
  return J;
}

LcpSolution SolveLcpNewton(const Lcp& lcp, const SolverOptions& opts,
                           const std::optional<Vector>& warm_start) {
  opts.Validate();
  const int m = lcp.size();
  Vector z = Vector::Zero(m);
  if (warm_start) {
    if (warm_start->size() != m) {
      throw Error(ErrorCode::kDimensionMismatch, "warm start length differs from LCP size");
    }
    z = *warm_start;
  }
  constexpr double kArmijo = 1e-4;
  Vector w = lcp.M * z + lcp.q;
  Vector F = z.cwiseMin(w);
  double best = F.size() ? F.cwiseAbs().maxCoeff() : 0.0;
  for (int it = 0; it < opts.max_iter; ++it) {
    if (best <= opts.tol) {
      z = internal::PolishActiveSet(lcp, z, opts.tol);
      return internal::Finalize(lcp, std::move(z), it, LcpMethod::kNewton);
    }
    const Matrix J = internal::NewtonJacobian(lcp.M, z, w);
    Eigen::PartialPivLU<Matrix> lu(J);
    if (!(lu.rcond() > internal::kSingularRcond)) {
      throw Error(ErrorCode::kNotMonotone,
                  "singular generalized Jacobian at Newton iteration " + std::to_string(it));
    }
    const Vector d = lu.solve(-F);
    const double theta0 = 0.5 * F.squaredNorm();
    double t = 1.0;
    for (;;) {
      const Vector zt = z + t * d;
      const Vector wt = lcp.M * zt + lcp.q;
      const Vector Ft = zt.cwiseMin(wt);
      if (0.5 * Ft.squaredNorm() <= (1.0 - 2.0 * kArmijo * t) * theta0) {
        z = zt;
        w = wt;
        F = Ft;
        break;
      }
      t *= 0.5;
      if (t < 1e-12) {
        throw NotConvergedError("Newton line search stagnated", it, best);
      }
    }
    best = F.cwiseAbs().maxCoeff();
  }
  if (best <= opts.tol) {
    z = internal::PolishActiveSet(lcp, z, opts.tol);
    return internal::Finalize(lcp, std::move(z), opts.max_iter, LcpMethod::kNewton);
  }
  throw NotConvergedError("Newton reached max_iter", opts.max_iter, best);
}

LcpSolution SolveLcp(const Lcp& lcp, const SolverOptions& opts,
                     const std::optional<Vector>& warm_start) {
  opts.Validate();
  switch (opts.method) {
    case LcpMethod::kBruteForce: {
      LcpSolution sol = BruteForceLcp(lcp);
      if (sol.residual_inf > opts.tol) {
        throw NotConvergedError("enumeration residual above tolerance", 0, sol.residual_inf);
      }
      return sol;
    }
    case LcpMethod::kLemke:
      return SolveLcpLemke(lcp, opts);
    case LcpMethod::kNewton:
      break;
  }

  if (!opts.fallback) return SolveLcpNewton(lcp, opts, warm_start);
  std::string failures;
  try {
    return SolveLcpNewton(lcp, opts, warm_start);
  } catch (const Error& e) {
    failures = e.what();
  }
  if (warm_start) {
    try {
      return SolveLcpNewton(lcp, opts);
    } catch (const Error& e) {
      failures += "; cold Newton: ";
      failures += e.what();
    }
  }
  double best = INFINITY;
  try {
    return SolveLcpLemke(lcp, opts);
  } catch (const NotConvergedError& e) {
    best = e.best_residual();
    failures += "; Lemke: ";
    failures += e.what();
  }
  if (lcp.size() <= opts.brute_force_limit) {
    try {
      LcpSolution sol = BruteForceLcp(lcp);
      if (sol.residual_inf <= opts.tol) return sol;
      best = std::min(best, sol.residual_inf);
    } catch (const Error& e) {
      failures += "; enumeration: ";
      failures += e.what();
    }
  }
  throw NotConvergedError("all LCP methods failed [" + failures + "]", opts.max_iter, best);
}

LcpSolution BruteForceLcp(const Lcp& lcp) {
  const int m = lcp.size();
  CheckEnumerable(m, "brute-force LCP");
  std::optional<Vector> found;
  ForEachIndexSet(m, [&](const std::vector<int>& J) {
    auto z = ActiveSetCandidate(lcp, J);
    if (z && IsFeasible(lcp, *z)) {
      found = std::move(z);
      return true;
    }
    return false;
  });
  if (!found) throw Error(ErrorCode::kNoSolution, "no index set yields a feasible point");
  return internal::Finalize(lcp, std::move(*found), 0, LcpMethod::kBruteForce);
}

std::vector<Vector> EnumerateLcpSolutions(const Lcp& lcp) {
  const int m = lcp.size();
  CheckEnumerable(m, "LCP enumeration");
  std::vector<Vector> out;
  ForEachIndexSet(m, [&](const std::vector<int>& J) {
    auto z = ActiveSetCandidate(lcp, J);
    if (z && IsFeasible(lcp, *z)) {
      const Vector clamped = z->cwiseMax(0.0);
      const bool seen = std::any_of(out.begin(), out.end(), [&](const Vector& v) {
        return (v - clamped).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + v.cwiseAbs().maxCoeff());
      });
      if (!seen) out.push_back(clamped);
    }
    return false;
  });
  return out;
}

Vector IndicatorDiagonal(int m, const std::vector<int>& J) {
  Vector d = Vector::Zero(m);
  for (int j : J) {
    if (j < 0 || j >= m) throw Error(ErrorCode::kInvalidArgument, "index set entry out of range");
    d[j] = 1.0;
  }
  return d;
}

Matrix ActiveMatrixU(const Matrix& M, const std::vector<int>& J) {
  if (M.rows() != M.cols()) throw Error(ErrorCode::kDimensionMismatch, "M must be square");
  const auto m = static_cast<int>(M.rows());
  const Vector d = IndicatorDiagonal(m, J);
  const Matrix I = Matrix::Identity(m, m);
  const Matrix T = I - d.asDiagonal() * (I - M);
  Eigen::PartialPivLU<Matrix> lu(T);
  if (!(lu.rcond() > internal::kSingularRcond)) {
    throw Error(ErrorCode::kSingularPivot,
                "I - D(I - M) is singular for D = " + DiagonalString(d));
  }
  return lu.solve(Matrix(d.asDiagonal()));
}

SolutionOperator SolutionOperatorW(const Matrix& M, const Matrix& N, const Vector& q2,
                                   const Vector& x, const SolverOptions& opts) {
  if (N.rows() != M.rows() || N.cols() != x.size() || q2.size() != M.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "solution operator operand shapes disagree");
  }
  const Vector q = N * x + q2;
  const LcpSolution sol = SolveLcp(Lcp(M, q), opts);
  SolutionOperator out;
  out.W = ActiveMatrixU(M, sol.active_set);
  out.D = IndicatorDiagonal(static_cast<int>(M.rows()), sol.active_set);
  out.y = -out.W * q;
  return out;
}

StabilityConstants ComputeStabilityConstants(const Matrix& M, double eta) {
  if (M.rows() != M.cols()) throw Error(ErrorCode::kDimensionMismatch, "M must be square");
  if (!(eta >= 0.0 && eta < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "eta must lie in [0, 1)");
  }
  const auto m = static_cast<int>(M.rows());
  CheckEnumerable(m, "stability constants");
  const Matrix I = Matrix::Identity(m, m);
  StabilityConstants out;
  out.worst_D = Vector::Zero(m);
  ForEachIndexSet(m, [&](const std::vector<int>& J) {
    const Vector d = IndicatorDiagonal(m, J);
    const Matrix T = I - Matrix(d.asDiagonal()) + d.asDiagonal() * M;
    Eigen::FullPivLU<Matrix> lu(T);
    if (!lu.isInvertible()) {
      throw Error(ErrorCode::kSingularPivot,
                  "I - D + D M is singular for D = " + DiagonalString(d));
    }
    const Matrix X = lu.solve(Matrix(d.asDiagonal()));
    const double norm =
        J.empty() ? 0.0 : Eigen::JacobiSVD<Matrix>(X).singularValues()(0);
    if (norm > out.beta) {
      out.beta = norm;
      out.worst_D = d;
    }
    return false;
  });
  out.alpha = out.beta / (1.0 - eta);
  return out;
}

bool IsPMatrix(const Matrix& M) {
  if (M.rows() != M.cols()) throw Error(ErrorCode::kDimensionMismatch, "M must be square");
  const auto m = static_cast<int>(M.rows());
  CheckEnumerable(m, "P-matrix test");
  const bool violated = ForEachIndexSet(m, [&](const std::vector<int>& J) {
    if (J.empty()) return false;
    const auto k = static_cast<Eigen::Index>(J.size());
    Matrix MJ(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) {
        MJ(a, b) = M(J[static_cast<std::size_t>(a)], J[static_cast<std::size_t>(b)]);
      }
    }
    // Hadamard's bound scales the zero test.
    double scale = 1.0;
    for (Eigen::Index a = 0; a < k; ++a) scale *= std::max(MJ.row(a).norm(), 1e-300);
    return !(MJ.fullPivLu().determinant() > 1e-13 * scale);
  });
  return !violated;
}

}  // namespace slcp
