#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.h"
#include "slcp/discretize.h"
#include "slcp/duopoly.h"
#include "slcp/problems.h"

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

Vector V(std::initializer_list<double> v) {
  Vector out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

double SumP(const Partition& part) {
  double s = 0.0;
  for (const CellData& c : part.cells()) s += c.p;
  return s;
}

TEST(UniformPartitionTest, Examples) {
  const PartitionSkeleton a = PartitionSkeleton::Uniform(Box::Cube(1, -1, 1), {2});
  ASSERT_EQ(a.size(), 2);
  EXPECT_DOUBLE_EQ(a.diameter(0), 1.0);
  EXPECT_DOUBLE_EQ(a.cell_box(0).hi[0], 0.0);
  const PartitionSkeleton b = PartitionSkeleton::Uniform(Box::Cube(2, -1, 1), {2, 2});
  ASSERT_EQ(b.size(), 4);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(b.diameter(i), std::sqrt(2.0));
  const PartitionSkeleton c = PartitionSkeleton::Uniform(Box::Cube(1, 0, 1), {4});
  double max_d = 0.0;
  for (int i = 0; i < c.size(); ++i) max_d = std::max(max_d, c.diameter(i));
  EXPECT_DOUBLE_EQ(max_d, 0.25);
  EXPECT_THROW(PartitionSkeleton::Uniform(Box::Cube(1, 0, 1), {0}), Error);
}

TEST(UniformPartitionTest, HalfOpenMembership) {
  const PartitionSkeleton s = PartitionSkeleton::Uniform(Box::Cube(1, -1, 1), {2});
  EXPECT_EQ(s.Locate(V({-0.3})), 0);
  EXPECT_EQ(s.Locate(V({0.0})), 1);
  EXPECT_EQ(s.Locate(V({1.0})), 1);
  EXPECT_EQ(s.Locate(V({-1.0})), 0);
  EXPECT_THROW(s.Locate(V({1.5})), Error);
}

TEST(VoronoiPartitionTest, SingleCenterAndMidpointSplit) {
  const Density d = Density::Uniform(Box::Cube(1, -1, 1));
  const TwoStageProblem prob = Test1dProblem();
  const PartitionSkeleton one = PartitionSkeleton::Voronoi(d.support(), {V({0.2})});
  const Partition p1 = ComputeCellMoments(prob, one, d);
  ASSERT_EQ(p1.K(), 1);
  EXPECT_DOUBLE_EQ(p1.cells()[0].p, 1.0);
  const PartitionSkeleton two = PartitionSkeleton::Voronoi(d.support(), {V({-0.5}), V({0.5})});
  EXPECT_DOUBLE_EQ(two.diameter(0), 1.0);
  EXPECT_DOUBLE_EQ(two.diameter(1), 1.0);
  EXPECT_EQ(two.Locate(V({-0.01})), 0);
  EXPECT_EQ(two.Locate(V({0.0})), 0);  // tie goes to the lower index
  EXPECT_EQ(two.Locate(V({0.01})), 1);
}

TEST(VoronoiPartitionTest, Errors) {
  const Box support = Box::Cube(2, -1, 1);
  try {
    PartitionSkeleton::Voronoi(support, {V({0.1, 0.1}), V({0.1, 0.1})});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateCenters);
  }
  try {
    PartitionSkeleton::Voronoi(support, {V({2.0, 0.0})});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPointOutsideSupport);
  }
}

TEST(VoronoiPartitionTest, MoreCentersShrinkDiameter) {
  const Density d = DuopolyDensity(0.5);
  const TwoStageProblem prob = BuildDuopolyStochastic(DuopolyParams{});
  const Partition p5 = ComputeCellMoments(prob, MakeSkeleton(PartitionKind::kVoronoi,
                                                             Density::Uniform(d.support()), 5, 3),
                                          d);
  const Partition p20 = ComputeCellMoments(
      prob, MakeSkeleton(PartitionKind::kVoronoi, Density::Uniform(d.support()), 20, 3), d);
  EXPECT_NEAR(SumP(p5), 1.0, 1e-12);
  EXPECT_NEAR(SumP(p20), 1.0, 1e-12);
  EXPECT_LT(p20.max_diameter(), p5.max_diameter());
}

TEST(VoronoiPartitionTest, MembershipMatchesBruteForce) {
  const Box support = Box::Cube(2, -1, 1);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vector> centers;
  for (int i = 0; i < 12; ++i) centers.push_back(V({u(rng), u(rng)}));
  const PartitionSkeleton s = PartitionSkeleton::Voronoi(support, centers, 0, 1000);
  for (int trial = 0; trial < 2000; ++trial) {
    const Vector xi = V({u(rng), u(rng)});
    int best = 0;
    for (int i = 1; i < 12; ++i) {
      if ((xi - centers[i]).squaredNorm() < (xi - centers[best]).squaredNorm()) best = i;
    }
    EXPECT_EQ(s.Locate(xi), best);
  }
}

TEST(CellMomentsTest, ConditionalMeanOnHalfInterval) {
  const TwoStageProblem prob = Test1dProblem();
  const Density d = Density::Uniform(prob.support());
  const Partition part =
      ComputeCellMoments(prob, PartitionSkeleton::Uniform(prob.support(), {2}), d);
  const CellData& right = part.cells()[1];
  EXPECT_DOUBLE_EQ(right.p, 0.5);
  // M = 2 + xi and q2 = -1 + xi / 2 with E[xi | [0, 1]] = 1/2.
  EXPECT_NEAR(right.EM(0, 0), 2.5, 1e-15);
  EXPECT_NEAR(right.Eq2[0], -0.75, 1e-15);
}

TEST(CellMomentsTest, ConstantsAreExact) {
  const TwoStageProblem prob = ConstantProblem();
  const Coefficients c = prob.At(prob.support().Center());
  MomentOptions mc;
  mc.method = MomentOptions::Method::kMonteCarlo;
  for (MomentOptions opts : {MomentOptions{}, mc}) {
    const Partition part = ComputeCellMoments(
        prob, PartitionSkeleton::Uniform(prob.support(), {7}), Density::Uniform(prob.support()), opts);
    for (const CellData& cell : part.cells()) {
      EXPECT_EQ(cell.EM, c.M);
      EXPECT_EQ(cell.EB, c.B);
      EXPECT_EQ(cell.EN, c.N);
      EXPECT_EQ(cell.Eq2, c.q2);
    }
  }
}

TEST(CellMomentsTest, DuopolyDiagonalShiftOnUpperHalf) {
  const TwoStageProblem prob = BuildDuopolyStochastic(DuopolyParams{});
  const Density d = Density::Uniform(prob.support());
  const Partition part =
      ComputeCellMoments(prob, PartitionSkeleton::Uniform(prob.support(), {2, 1}), d);
  const CellData& upper = part.cells()[1];
  EXPECT_NEAR(upper.EM(0, 0), 11.0 + 0.5, 1e-14);
  EXPECT_NEAR(upper.EM(1, 1), 12.0 + 0.5, 1e-14);
  EXPECT_NEAR(upper.EM(0, 1), 5.0, 1e-14);
}

TEST(CellMomentsTest, ProbabilitiesSumToOneAndSeedDeterminism) {
  const TwoStageProblem prob = BuildDuopolyStochastic(DuopolyParams{});
  const Density d = DuopolyDensity(0.5);
  const PartitionSkeleton sk = MakeSkeleton(PartitionKind::kVoronoi, d, 10, 4);
  MomentOptions o;
  o.seed = 5;
  const Partition a = ComputeCellMoments(prob, sk, d, o);
  const Partition b = ComputeCellMoments(prob, sk, d, o);
  EXPECT_NEAR(SumP(a), 1.0, 1e-10);
  for (int i = 0; i < a.K(); ++i) {
    EXPECT_EQ(a.cells()[i].p, b.cells()[i].p);
    EXPECT_EQ(a.cells()[i].EM, b.cells()[i].EM);
  }
  const Partition u = ComputeCellMoments(prob, MakeSkeleton(PartitionKind::kUniformBox, d, 9, 0), d);
  EXPECT_NEAR(SumP(u), 1.0, 1e-12);
}

TEST(CellMomentsTest, EmptyCellIsDroppedWithWarning) {
  const TwoStageProblem prob = BuildDuopolyStochastic(DuopolyParams{});
  const Density d = DuopolyDensity(0.05);
  const PartitionSkeleton sk =
      PartitionSkeleton::Voronoi(d.support(), {V({0.0, 0.0}), V({0.99, 0.99})});
  WarningCapture capture;
  MomentOptions o;
  o.mc_budget = 2000;
  const Partition part = ComputeCellMoments(prob, sk, d, o);
  EXPECT_EQ(part.K(), 1);
  EXPECT_EQ(capture.messages.size(), 1u);
  EXPECT_DOUBLE_EQ(part.cells()[0].p, 1.0);
  EXPECT_EQ(part.Locate(V({0.9, 0.9})), 0);
}

TEST(DiscreteTest, StackedDimensionAndConstantReduction) {
  const BuiltinProblem duo = MakeBuiltin("duopoly", 0.1);
  const Partition part =
      ComputeCellMoments(duo.problem, MakeSkeleton(PartitionKind::kVoronoi, duo.density, 5, 0),
                         duo.density);
  EXPECT_EQ(DiscreteSLCP(duo.problem, part).stacked_size(), 22);

  const TwoStageProblem prob = ConstantProblem();
  const Density d = Density::Uniform(prob.support());
  const Coefficients c = prob.At(prob.support().Center());
  const Partition one = ComputeCellMoments(prob, PartitionSkeleton::Uniform(prob.support(), {1}), d);
  const DiscreteSolution s1 = SolveDiscreteDirect(DiscreteSLCP(prob, one));
  // K = 1 is the deterministic LCP in (x, y).
  Matrix big(4, 4);
  big << prob.A(), c.B, c.N, c.M;
  const Vector q = (Vector(4) << prob.q1(), c.q2).finished();
  const auto ref = oracle::LcpSolutions(big, q);
  ASSERT_EQ(ref.size(), 1u);
  EXPECT_LE(InfNorm(ref[0].head(2) - s1.x), 1e-12);
  EXPECT_LE(InfNorm(ref[0].tail(2) - s1.y[0]), 1e-12);

  const Partition many = ComputeCellMoments(prob, PartitionSkeleton::Uniform(prob.support(), {9}), d);
  const DiscreteSolution s9 = SolveDiscreteDirect(DiscreteSLCP(prob, many));
  for (const Vector& y : s9.y) EXPECT_LE(InfNorm(y - s9.y[0]), 1e-12);
}

TEST(DiscreteTest, DecoupledProblem) {
  const Coefficients c{Matrix::Zero(1, 1), Matrix::Identity(1, 1), Matrix::Zero(1, 1),
                       Vector::Constant(1, -1.0)};
  auto oracle_fn = [c](const Vector& xi) {
    Coefficients out = c;
    out.q2[0] = -1.0 + xi[0];
    return out;
  };
  const TwoStageProblem prob(Matrix::Constant(1, 1, 2.0), Vector::Constant(1, -1.0), oracle_fn,
                             Box::Cube(1, -1, 1));
  const Density d = Density::Uniform(prob.support());
  const Partition part = ComputeCellMoments(prob, PartitionSkeleton::Uniform(prob.support(), {4}), d);
  const DiscreteSolution s = SolveDiscreteDirect(DiscreteSLCP(prob, part));
  EXPECT_NEAR(s.x[0], 0.5, 1e-12);
  for (int i = 0; i < part.K(); ++i) {
    EXPECT_NEAR(s.y[i][0], std::max(0.0, -part.cells()[i].Eq2[0]), 1e-12);
  }
}

TEST(DiscreteTest, FrozenDuopolyMatchesEnumeration) {
  const BuiltinProblem duo = MakeBuiltin("duopoly", 0.1);
  const Partition part = ComputeCellMoments(
      duo.problem, PartitionSkeleton::Uniform(duo.problem.support(), {1, 1}), duo.density);
  const DiscreteSLCP d(duo.problem, part);
  const DiscreteSolution s = SolveDiscreteDirect(d);
  const Lcp stacked = d.Stacked();
  const auto all = oracle::LcpSolutions(stacked.M, stacked.q, 1e-9);
  ASSERT_FALSE(all.empty());
  const Vector z = d.Pack(s.x, s.y);
  double best = 1e300;
  for (const Vector& ref : all) best = std::min(best, InfNorm(ref - z));
  EXPECT_LE(best, 1e-9);
}

TEST(DiscreteTest, BlockSolverMatchesDenseAndPerCellEquivalence) {
  const TwoStageProblem prob = Test1dProblem();
  const Density d = Density::Uniform(prob.support());
  const Partition part = ComputeCellMoments(prob, PartitionSkeleton::Uniform(prob.support(), {16}), d);
  const DiscreteSLCP disc(prob, part);
  const DiscreteSolution s = SolveDiscreteDirect(disc);
  const LcpSolution dense = SolveLcp(disc.Stacked(true));
  EXPECT_LE(InfNorm(dense.z - disc.Pack(s.x, s.y)), 1e-10);
  Vector first = prob.A() * s.x + prob.q1();
  for (int i = 0; i < part.K(); ++i) {
    const CellData& c = part.cells()[i];
    const Vector yi = SolveLcp(Lcp(c.EM, c.EN * s.x + c.Eq2)).z;
    EXPECT_LE(InfNorm(yi - s.y[i]), 1e-8);
    first += c.p * c.EB * yi;
  }
  EXPECT_LE(InfNorm(s.x.cwiseMin(first)), 1e-8);
  EXPECT_LE(DiscreteResidual(disc, s.x, s.y), 1e-10);
}

TEST(DiscreteTest, DuopolyCoarseSolveNearFineReference) {
  const BuiltinProblem duo = MakeBuiltin("duopoly", 0.1);
  const auto solve = [&](int K) {
    const Partition part = ComputeCellMoments(
        duo.problem, MakeSkeleton(PartitionKind::kVoronoi, duo.density, K, 0), duo.density);
    return SolveDiscreteDirect(DiscreteSLCP(duo.problem, part)).x;
  };
  EXPECT_LE(InfNorm(solve(5) - solve(4096)), 5e-2);
}

TEST(ReconstructPolicyTest, CellLookup) {
  const TwoStageProblem prob = Test1dProblem();
  const Density d = Density::Uniform(prob.support());
  const Partition one = ComputeCellMoments(prob, PartitionSkeleton::Uniform(prob.support(), {1}), d);
  const DiscreteSolution s1 = SolveDiscreteDirect(DiscreteSLCP(prob, one));
  EXPECT_EQ(ReconstructPolicy(s1, one, V({0.7})), s1.y[0]);
  const Partition two = ComputeCellMoments(prob, PartitionSkeleton::Uniform(prob.support(), {2}), d);
  const DiscreteSolution s2 = SolveDiscreteDirect(DiscreteSLCP(prob, two));
  EXPECT_EQ(ReconstructPolicy(s2, two, V({-0.3})), s2.y[0]);
  EXPECT_EQ(ReconstructPolicy(s2, two, V({0.0})), s2.y[1]);
  EXPECT_THROW(ReconstructPolicy(s2, two, V({1.2})), Error);
}

TEST(RefineStudyTest, ConstantProblemHasNoError) {
  const BuiltinProblem c = MakeBuiltin("constant");
  RefineOptions o;
  o.schedule = {1, 4, 16};
  o.reference_K = 64;
  const ConvergenceTable t = RefineStudy(c.problem, c.density, o);
  for (const ConvergenceRow& r : t.rows) {
    EXPECT_LE(r.x_err, 1e-14);
    EXPECT_LE(r.y_err_L2, 1e-14);
  }
  EXPECT_EQ(t.ToCsv().substr(0, 31), "K,max_delta,x_err,y_err_L2,seed");
}

TEST(RefineStudyTest, Test1dRateAndMonotonicity) {
  const BuiltinProblem t1 = MakeBuiltin("test1d");
  RefineOptions o;
  o.schedule = {4, 16, 64, 256};
  o.reference_K = 4096;
  const ConvergenceTable t = RefineStudy(t1.problem, t1.density, o);
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_LE(t.rows[i].x_err, t.rows[i - 1].x_err);
  EXPECT_GE(t.x_slope, 0.8);
}

TEST(RefineStudyTest, RejectsBadSchedules) {
  const BuiltinProblem t1 = MakeBuiltin("test1d");
  RefineOptions o;
  o.schedule = {16, 4};
  EXPECT_THROW(RefineStudy(t1.problem, t1.density, o), Error);
  o.schedule = {};
  EXPECT_THROW(RefineStudy(t1.problem, t1.density, o), Error);
}

TEST(LogLogSlopeTest, PowerLaw) {
  EXPECT_NEAR(LogLogSlope({1, 0.5, 0.25}, {3, 0.75, 0.1875}), 2.0, 1e-12);
}

}  // namespace
}  // namespace slcp
