#include "slcp/problems.h"

namespace slcp {

TwoStageProblem Test1dProblem() {
  auto oracle = [](const Vector& xi) {
    const double s = xi[0];
    return Coefficients{Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 2.0 + s),
                        Matrix::Constant(1, 1, 1.0), Vector::Constant(1, -1.0 + 0.5 * s)};
  };
  return TwoStageProblem(Matrix::Constant(1, 1, 2.0), Vector::Constant(1, -1.0), oracle,
                         Box::Cube(1, -1.0, 1.0));
}

TwoStageProblem ConstantProblem() {
  Matrix A(2, 2);
  A << 3.0, 1.0, -1.0, 2.0;
  const Vector q1 = (Vector(2) << -1.0, 0.5).finished();
  Matrix M(2, 2);
  M << 2.0, 0.5, 0.5, 1.0;
  const Coefficients c{Matrix::Identity(2, 2), M, -Matrix::Identity(2, 2),
                       (Vector(2) << -1.0, -0.5).finished()};
  return TwoStageProblem(A, q1, [c](const Vector&) { return c; }, Box::Cube(1, -1.0, 1.0));
}

std::vector<std::string> BuiltinNames() { return {"duopoly", "test1d", "constant"}; }

BuiltinProblem MakeBuiltin(const std::string& name, double sigma) {
  if (name == "duopoly") {
    DuopolyParams p;
    p.sigma = sigma;
    auto [prob, amb] = BuildDuopolyDrlcp(p);
    return BuiltinProblem{name, std::move(prob), DuopolyDensity(sigma), std::move(amb), p};
  }
  if (name == "test1d") {
    TwoStageProblem prob = Test1dProblem();
    Density density = Density::Uniform(prob.support());
    return BuiltinProblem{name, std::move(prob), std::move(density), std::nullopt, std::nullopt};
  }
  if (name == "constant") {
    TwoStageProblem prob = ConstantProblem();
    Density density = Density::Uniform(prob.support());
    return BuiltinProblem{name, std::move(prob), std::move(density), std::nullopt, std::nullopt};
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown builtin problem '" + name + "'");
}

}  // namespace slcp
