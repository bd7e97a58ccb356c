#include <gtest/gtest.h>

#include <random>

#include "oracles.h"
#include "slcp/duopoly.h"
#include "slcp/problems.h"
#include "slcp/two_stage.h"

namespace slcp {
namespace {

double InfNorm(const Vector& v) { return v.lpNorm<Eigen::Infinity>(); }

class WarningCapture {
 public:
  WarningCapture()
      : saved_(SetWarningSink([this](const std::string& m) { messages.push_back(m); })) {}
  ~WarningCapture() { SetWarningSink(saved_); }
  std::vector<std::string> messages;

 private:
  WarningSink saved_;
};

TwoStageProblem ConstantOracleProblem(const Matrix& A, const Vector& q1, const Coefficients& c,
                                      int dim = 1) {
  return TwoStageProblem(A, q1, [c](const Vector&) { return c; }, Box::Cube(dim, -1.0, 1.0));
}

TEST(TwoStageProblemTest, ValidatesOracleShapes) {
  const Coefficients bad{Matrix::Zero(2, 3), Matrix::Identity(2, 2), Matrix::Zero(2, 2),
                         Vector::Zero(2)};
  EXPECT_THROW(ConstantOracleProblem(Matrix::Identity(2, 2), Vector::Zero(2), bad), Error);
  const Coefficients ok{Matrix::Zero(2, 2), Matrix::Identity(2, 2), Matrix::Zero(2, 2),
                        Vector::Zero(2)};
  EXPECT_THROW(TwoStageProblem(Matrix::Identity(2, 2), Vector::Zero(2),
                               [ok](const Vector&) { return ok; }, Box(Vector::Ones(1), Vector::Ones(1))),
               Error);
}

TEST(SecondStageTest, NonnegativeDataGivesZero) {
  const Coefficients c{Matrix::Zero(1, 2), Matrix::Identity(2, 2), Matrix::Zero(2, 1),
                       Vector::Constant(2, 0.5)};
  const TwoStageProblem prob = ConstantOracleProblem(Matrix::Identity(1, 1), Vector::Zero(1), c);
  for (double x : {0.0, 1.0, 7.5}) {
    const SecondStageSolution s =
        SolveSecondStage(prob, Vector::Constant(1, x), Vector::Constant(1, 0.3));
    EXPECT_EQ(s.y, Vector::Zero(2));
  }
}

TEST(SecondStageTest, DuopolyCapacitiesBindInTheInterior) {
  const DuopolyParams p;
  const TwoStageProblem prob = BuildDuopolyStochastic(p);
  const Vector x = DuopolyAnalyticSolution(p).z;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector xi = (Vector(2) << u(rng), u(rng)).finished();
    const SecondStageSolution s = SolveSecondStage(prob, x, xi);
    EXPECT_LE(InfNorm(s.y.head(2) - x), 1e-10);
    const Coefficients c = prob.At(xi);
    const auto ref = oracle::LcpSolutions(c.M, c.N * x + c.q2);
    ASSERT_EQ(ref.size(), 1u);
    EXPECT_LE(InfNorm(s.y - ref[0]), 1e-10);
    EXPECT_LE(InfNorm(s.y + s.W * (c.N * x + c.q2)), 1e-10);
  }
}

TEST(SecondStageTest, RandomMonotoneInstanceMatchesEnumeration) {
  std::mt19937_64 rng(17);
  Matrix M0, M1;
  Vector q0, q1v;
  oracle::RandomMonotoneLcp(rng, 3, M0, q0);
  oracle::RandomMonotoneLcp(rng, 3, M1, q1v);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix N = Matrix::Zero(3, 2);
  for (int i = 0; i < 3; ++i) N(i, 0) = g(rng), N(i, 1) = g(rng);
  // M(xi) = M0 + xi M1 / 10 stays positive definite for |xi| <= 1 with
  // high probability; the test checks it explicitly.
  auto oracle_fn = [=](const Vector& xi) {
    return Coefficients{Matrix::Zero(2, 3), M0 + 0.1 * xi[0] * M1, N, q0 + xi[0] * q1v};
  };
  const TwoStageProblem prob(Matrix::Identity(2, 2), Vector::Zero(2), oracle_fn,
                             Box::Cube(1, -1.0, 1.0));
  const Vector x = (Vector(2) << 0.4, -0.2).finished();
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector xi = Vector::Constant(1, u(rng));
    const Coefficients c = prob.At(xi);
    ASSERT_GT(MinSymmetricEigenvalue(c.M), 0.0);
    const auto ref = oracle::LcpSolutions(c.M, c.N * x + c.q2);
    ASSERT_EQ(ref.size(), 1u);
    EXPECT_LE(InfNorm(SolveSecondStage(prob, x, xi).y - ref[0]), 1e-10);
  }
}

TEST(SecondStageTest, Errors) {
  const Coefficients indefinite{Matrix::Zero(1, 1), -Matrix::Identity(1, 1), Matrix::Zero(1, 1),
                                Vector::Zero(1)};
  const TwoStageProblem prob =
      ConstantOracleProblem(Matrix::Identity(1, 1), Vector::Zero(1), indefinite);
  try {
    SolveSecondStage(prob, Vector::Zero(1), Vector::Zero(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotMonotoneAt);
  }
  const TwoStageProblem ok = Test1dProblem();
  try {
    SolveSecondStage(ok, Vector::Zero(1), Vector::Constant(1, 1.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPointOutsideSupport);
  }
}

TEST(SecondStageTest, RecourseOnlyMatchesAndSurvivesDegenerateSets) {
  const TwoStageProblem prob = BuildDuopolyStochastic(DuopolyParams{});
  const Vector xi = (Vector(2) << 0.2, 0.4).finished();
  const Vector x = (Vector(2) << 0.1, 0.3).finished();
  EXPECT_LE(InfNorm(SecondStageY(prob, x, xi) - SolveSecondStage(prob, x, xi).y), 1e-12);
  // At zero capacity the multiplier rows leave the operator singular.
  EXPECT_THROW(SolveSecondStage(prob, Vector::Zero(2), xi), Error);
  const Vector y = SecondStageY(prob, Vector::Zero(2), xi);
  EXPECT_LE(InfNorm(y.head(2)), 1e-12);
  EXPECT_NEAR(y[2], 10.0 + 0.4 - 1.0, 1e-10);
}

TEST(SecondStageTest, Deterministic) {
  const TwoStageProblem prob = BuildDuopolyStochastic(DuopolyParams{});
  const Vector x = (Vector(2) << 0.1, 0.3).finished();
  const Vector xi = (Vector(2) << 0.3, -0.7).finished();
  const SecondStageSolution a = SolveSecondStage(prob, x, xi);
  const SecondStageSolution b = SolveSecondStage(prob, x, xi);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.W, b.W);
}

TEST(SecondStageTest, LipschitzSpotCheck) {
  const TwoStageProblem prob = Test1dProblem();
  const MonotonicityReport rep = ComputeMonotonicityReport(prob, 200, 1);
  ASSERT_GT(rep.kappa_min, 0.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector xi = Vector::Constant(1, 0.5 * u(rng));
    const Vector x = Vector::Constant(1, u(rng));
    const Vector x2 = Vector::Constant(1, u(rng));
    const double L = prob.At(xi).N.norm() / rep.kappa_min + 10.0;
    EXPECT_LE(InfNorm(SolveSecondStage(prob, x, xi).y - SolveSecondStage(prob, x2, xi).y),
              L * InfNorm(x - x2));
  }
}

TEST(ResidualFTest, DecoupledProblem) {
  const Coefficients c{Matrix::Zero(2, 1), Matrix::Identity(1, 1), Matrix::Zero(1, 2),
                       Vector::Constant(1, -1.0)};
  Matrix A(2, 2);
  A << 2, 1, 0, 1;
  const Vector q1 = (Vector(2) << -1.0, 3.0).finished();
  const TwoStageProblem prob = ConstantOracleProblem(A, q1, c);
  const Density d = Density::Uniform(prob.support());
  const Vector x = (Vector(2) << 0.7, 0.2).finished();
  const Vector expected = x.cwiseMin(A * x + q1);
  EXPECT_LE(InfNorm(ResidualF(prob, x, d, {}) - expected), 1e-15);
  QuadratureSpec gl;
  gl.kind = QuadratureSpec::Kind::kGaussLegendre;
  EXPECT_LE(InfNorm(ResidualF(prob, x, d, gl) - expected), 1e-15);
}

TEST(ResidualFTest, ZeroAtTrivialOrigin) {
  const Coefficients c{Matrix::Ones(1, 1), Matrix::Identity(1, 1), Matrix::Zero(1, 1),
                       Vector::Constant(1, 2.0)};
  const TwoStageProblem prob =
      ConstantOracleProblem(Matrix::Identity(1, 1), Vector::Constant(1, 0.5), c);
  EXPECT_EQ(ResidualF(prob, Vector::Zero(1), Density::Uniform(prob.support()), {}),
            Vector::Zero(1));
}

TEST(ResidualFTest, DuopolyAnalyticPointIsASolution) {
  const DuopolyParams p;
  const TwoStageProblem prob = BuildDuopolyStochastic(p);
  QuadratureSpec gl;
  gl.kind = QuadratureSpec::Kind::kGaussLegendre;
  gl.order = 8;
  const Vector F = ResidualF(prob, DuopolyAnalyticSolution(p).z, DuopolyDensity(0.1), gl);
  EXPECT_LE(InfNorm(F), 1e-12);
  // The corner where capacities never bind also solves the continuous problem.
  const Vector corner = (Vector(2) << 5.0, 10.0).finished();
  EXPECT_LE(InfNorm(ResidualF(prob, corner, DuopolyDensity(0.1), {})), 1e-12);
}

TEST(MonotonicityTest, IdentityAndSkewCoupling) {
  const Coefficients diag{Matrix::Zero(2, 2), Matrix::Identity(2, 2), Matrix::Zero(2, 2),
                          Vector::Zero(2)};
  const MonotonicityReport a = ComputeMonotonicityReport(
      ConstantOracleProblem(Matrix::Identity(2, 2), Vector::Zero(2), diag), 10, 0);
  EXPECT_NEAR(a.kappa_min, 1.0, 1e-14);
  Matrix Nm(2, 2);
  Nm << 1, 2, -3, 4;
  const Coefficients skew{-Nm.transpose(), Matrix::Identity(2, 2), Nm, Vector::Zero(2)};
  const MonotonicityReport b = ComputeMonotonicityReport(
      ConstantOracleProblem(Matrix::Identity(2, 2), Vector::Zero(2), skew), 10, 0);
  EXPECT_NEAR(b.kappa_min, 1.0, 1e-12);
  EXPECT_LE(b.kappa_min, b.kappa_mean);
  EXPECT_EQ(b.sample_count, 10);
}

TEST(MonotonicityTest, Test1dIsStrictlyMonotone) {
  const MonotonicityReport r = ComputeMonotonicityReport(Test1dProblem(), 500, 0);
  EXPECT_TRUE(r.strictly_monotone());
  EXPECT_TRUE(Test1dProblem().support().Contains(r.worst_xi));
}

TEST(MonotonicityTest, DuopolyIsNotStrictlyMonotoneAndWarns) {
  WarningCapture capture;
  const MonotonicityReport r =
      ComputeMonotonicityReport(BuildDuopolyStochastic(DuopolyParams{}), 100, 0);
  EXPECT_LE(r.kappa_min, 0.0);
  EXPECT_FALSE(r.strictly_monotone());
  EXPECT_EQ(capture.messages.size(), 1u);
}

}  // namespace
}  // namespace slcp
