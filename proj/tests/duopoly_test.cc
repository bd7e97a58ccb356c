#include <gtest/gtest.h>

#include <algorithm>

#include "slcp/duopoly.h"
#include "slcp/random.h"
#include "slcp/two_stage.h"

namespace slcp {
namespace {

TEST(DuopolyBuildTest, TableParameters) {
  const DuopolyParams p;
  Eigen::Matrix2d expected;
  expected << 11, 5, 5, 12;
  EXPECT_EQ(DuopolyPi(p, 0.0), expected);
  const TwoStageProblem prob = BuildDuopolyStochastic(p);
  EXPECT_EQ(prob.q1(), (Vector(2) << -5, -5).finished());
  EXPECT_EQ(prob.n(), 2);
  EXPECT_EQ(prob.m(), 4);
  const Coefficients c = prob.At((Vector(2) << 0.5, -0.25).finished());
  EXPECT_EQ(c.N, c.B.transpose());
  EXPECT_DOUBLE_EQ(c.q2[0], -(10 - 0.25 - 1));
  EXPECT_EQ(c.q2.tail(2), Vector::Zero(2));
}

TEST(DuopolyBuildTest, RecourseMatrixIsSemidefinite) {
  const TwoStageProblem prob = BuildDuopolyStochastic(DuopolyParams{});
  for (int j = 0; j <= 100; ++j) {
    const double xi1 = -1.0 + 0.02 * j;
    const Matrix M = prob.At((Vector(2) << xi1, 0.0).finished()).M;
    EXPECT_GE(MinSymmetricEigenvalue(M), -1e-12);
    EXPECT_GT(std::abs(M.determinant()), 0.0);
  }
}

TEST(DuopolyBuildTest, DrlcpRequiresExampleParameters) {
  DuopolyParams p;
  p.zeta << 1.0, 2.0;
  try {
    BuildDuopolyDrlcp(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidForExample);
  }
  DuopolyParams q;
  q.beta << 5.0, 4.0;
  EXPECT_THROW(BuildDuopolyDrlcp(q), Error);
  DuopolyParams bad;
  bad.eta_bar << 0.5, 2.0;
  EXPECT_THROW(BuildDuopolyStochastic(bad), Error);
}

TEST(DuopolyAnalyticTest, TableValues) {
  const DuopolyAnalytic a = DuopolyAnalyticSolution(DuopolyParams{});
  Eigen::Matrix2d pi_hat;
  pi_hat << 10, 5, 5, 11.5;
  EXPECT_EQ(a.Pi_hat, pi_hat);
  EXPECT_EQ(a.rhs, Eigen::Vector2d(4, 4));
  // Cramer's rule on [[10, 5], [5, 11.5]] z = (4, 4): det = 90.
  EXPECT_NEAR(a.z[0], 26.0 / 90.0, 1e-15);
  EXPECT_NEAR(a.z[1], 20.0 / 90.0, 1e-15);
  EXPECT_NEAR(a.z[1], 0.2222, 5e-5);
  EXPECT_NEAR(a.mu_coeff(0, 0), 4.7111, 5e-5);
  EXPECT_NEAR(a.mu_coeff(1, 0), 4.8889, 5e-5);
  EXPECT_EQ(a.mu_coeff(0, 1), 1.0);
  EXPECT_EQ(a.mu_coeff(1, 1), 1.0);
  EXPECT_EQ(a.mu_coeff(0, 2), -a.z[0]);
  EXPECT_EQ(a.Lambda1, -a.Lambda2);
  EXPECT_EQ(a.Lambda1(0, 0), a.z[0]);
  EXPECT_EQ(a.Lambda1(1, 1), -1.0);
}

TEST(DuopolyAnalyticTest, SecondStageMatchesClosedForm) {
  const DuopolyParams p;
  const DuopolyAnalytic a = DuopolyAnalyticSolution(p);
  const TwoStageProblem prob = BuildDuopolyStochastic(p);
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector xi = (Vector(2) << rng.Uniform(-1, 1), rng.Uniform(-1, 1)).finished();
    const Vector y = SolveSecondStage(prob, a.z, xi).y;
    EXPECT_NEAR(y[0], a.z[0], 1e-12);
    EXPECT_NEAR(y[1], a.z[1], 1e-12);
    EXPECT_NEAR(y[2], a.Mu(0, xi), 1e-10);
    EXPECT_NEAR(y[3], a.Mu(1, xi), 1e-10);
    EXPECT_GE(std::min(y[2], y[3]), 0.0);
  }
}

TEST(DuopolyConditionTest, Cases) {
  EXPECT_TRUE(CheckExampleCondition(DuopolyParams{}));
  DuopolyParams flat;
  flat.beta << 9.0, 9.0;
  EXPECT_FALSE(CheckExampleCondition(flat));
  EXPECT_THROW(DuopolyAnalyticSolution(flat), Error);
  DuopolyParams steep;
  steep.gamma << 6.5, 0.5;
  try {
    CheckExampleCondition(steep);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateDeterminant);
  }
}

TEST(DuopolyInteriorBoxTest, ContainsAnalyticPoint) {
  const Box box = DuopolyInteriorBox(DuopolyParams{});
  EXPECT_TRUE(box.Contains(DuopolyAnalyticSolution({}).z.cast<double>()));
  EXPECT_NEAR(box.lo[0], 1e-3 * box.hi[0], 1e-18);
}

TEST(DuopolyDensityTest, SamplerMoments) {
  const Density narrow = DuopolyDensity(0.1);
  Rng rng(11);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) {
    const Vector xi = narrow.Sample(rng);
    ASSERT_TRUE(narrow.support().Contains(xi));
    mean += Eigen::Vector2d(xi);
  }
  mean /= kDraws;
  EXPECT_LE(mean.cwiseAbs().maxCoeff(), 4.0 * 0.1 / std::sqrt(kDraws));

  const Density wide = DuopolyDensity(10.0);
  std::vector<double> draws(kDraws);
  for (double& v : draws) v = wide.Sample(rng)[0];
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double F = (draws[i] + 1.0) / 2.0;
    ks = std::max({ks, std::abs(F - static_cast<double>(i) / kDraws),
                   std::abs(F - static_cast<double>(i + 1) / kDraws)});
  }
  EXPECT_LT(ks, 0.02);
}

TEST(ErrorExperimentTest, DeterministicAndShaped) {
  ErrorExperimentOptions o;
  o.K_list = {5, 20};
  o.sigma_list = {0.1, 10.0};
  o.reps = 4;
  o.N = 500;
  o.seed = 3;
  const ErrorTable a = RunErrorExperiment(DuopolyParams{}, o);
  const ErrorTable b = RunErrorExperiment(DuopolyParams{}, o);
  EXPECT_EQ(a.ToCsv(), b.ToCsv());
  ASSERT_EQ(a.rows.size(), 4u);
  EXPECT_EQ(a.rows[1].K, 5);
  EXPECT_EQ(a.rows[1].sigma, 10.0);
  EXPECT_EQ(a.ToCsv().substr(0, a.ToCsv().find('\n')), "K,sigma,error1,error2,reps,N,seed");
  o.reps = 0;
  EXPECT_THROW(RunErrorExperiment(DuopolyParams{}, o), Error);
}

TEST(ErrorExperimentTest, MatchesDirectEstimate) {
  // One replication recomputed by hand with the same stream layout.
  ErrorExperimentOptions o;
  o.K_list = {7};
  o.sigma_list = {0.5};
  o.reps = 1;
  o.N = 300;
  o.seed = 9;
  const ErrorTable t = RunErrorExperiment(DuopolyParams{}, o);
  const DuopolyAnalytic a = DuopolyAnalyticSolution({});
  const Density d = DuopolyDensity(0.5);
  Rng rng(9, {7, StreamKey(0.5), 0});
  std::vector<Vector> centers;
  for (int c = 0; c < 7; ++c) centers.push_back(d.Sample(rng));
  double e1 = 0.0;
  double e2 = 0.0;
  for (int j = 0; j < 300; ++j) {
    const Vector xi = d.Sample(rng);
    int best = 0;
    for (int c = 1; c < 7; ++c) {
      if ((xi - centers[c]).squaredNorm() < (xi - centers[best]).squaredNorm()) best = c;
    }
    e1 += std::abs(a.Mu(0, xi) - a.Mu(0, centers[best]));
    e2 += std::abs(a.Mu(1, xi) - a.Mu(1, centers[best]));
  }
  EXPECT_NEAR(t.rows[0].error1, e1 / 300, 1e-12);
  EXPECT_NEAR(t.rows[0].error2, e2 / 300, 1e-12);
}

}  // namespace
}  // namespace slcp
