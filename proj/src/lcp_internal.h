#pragma once

#include "slcp/lcp.h"

namespace slcp::internal {

// Exact solution of the affine piece selected by the active set of z: rows in
// J are solved as equations, the rest are pinned to zero. Returns the refined
// point when it is at least as good as z and nonnegative up to `tol`.
Vector PolishActiveSet(const Lcp& lcp, const Vector& z, double tol);

// Fills residual, active set, and clamps tiny negative entries to zero.
LcpSolution Finalize(const Lcp& lcp, Vector z, int iterations, LcpMethod method);

// Generalized Jacobian element of min(z, Mz+q): the identity row where
// z_j <= w_j (ties included), M's row elsewhere.
Matrix NewtonJacobian(const Matrix& M, const Vector& z, const Vector& w);

constexpr double kSingularRcond = 1e-14;

}  // namespace slcp::internal
