#pragma once

#include <optional>
#include <string>
#include <vector>

#include "slcp/density.h"
#include "slcp/drlcp.h"
#include "slcp/duopoly.h"
#include "slcp/two_stage.h"

namespace slcp {

// n = m = 1 on [-1, 1] with uniform xi: A = 2, q1 = -1, B = 1,
// M(xi) = 2 + xi, N = 1, q2(xi) = -1 + xi / 2.
TwoStageProblem Test1dProblem();

// Xi-independent data on [-1, 1] with skew first/second-stage coupling:
// A = [[3, 1], [-1, 2]], q1 = (-1, 0.5), B = I, N = -I,
// M = [[2, 0.5], [0.5, 1]], q2 = (-1, -0.5).
TwoStageProblem ConstantProblem();

struct BuiltinProblem {
  std::string name;
  TwoStageProblem problem;
  Density density;
  // Duopoly only.
  std::optional<MomentAmbiguitySet> ambiguity;
  std::optional<DuopolyParams> duopoly;
};

std::vector<std::string> BuiltinNames();

// Builtins: "duopoly" (table parameters, truncated normal with the given
// sigma), "test1d" and "constant" (uniform; sigma ignored). Throws
// Error(kInvalidArgument) for unknown names.
BuiltinProblem MakeBuiltin(const std::string& name, double sigma = 0.1);

}  // namespace slcp
