#pragma once

// Problem files describe a two-stage SLCP with coefficients affine in xi:
//
//   [problem]
//   n = 1
//   m = 1
//   support_lo = -1        ; one value per xi coordinate
//   support_hi = 1
//   density = uniform      ; or normal, with sigma = ...
//   A = 2                  ; n x n, row-major
//   q1 = -1
//   B = 1                  ; B(xi) = B + sum_k xi_k B.k
//   M = 2
//   M.1 = 1
//   N = 1
//   q2 = -1
//   q2.1 = 0.5

#include <string>

#include "slcp/problems.h"

namespace slcp::cli {

BuiltinProblem ParseProblemText(const std::string& text, const std::string& name);

// A builtin name, else a problem file path. Throws Error(kParseError).
BuiltinProblem ResolveProblem(const std::string& source, double sigma);

}  // namespace slcp::cli
