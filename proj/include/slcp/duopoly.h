#pragma once

// Two-player capacity game. Capacities x are chosen before the shock
// xi = (xi1, xi2) is revealed; productions y <= x follow, and the capacity
// multipliers mu feed back into the first-stage conditions.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "slcp/common.h"
#include "slcp/density.h"
#include "slcp/drlcp.h"
#include "slcp/two_stage.h"

namespace slcp {

struct DuopolyParams {
  Eigen::Vector2d alpha{3.0, 3.0};   // fixed capacity cost (inert)
  Eigen::Vector2d beta{5.0, 5.0};    // linear capacity cost
  Eigen::Vector2d gamma{1.0, 0.5};   // quadratic capacity cost
  Eigen::Vector2d s{2.0, 2.0};       // fixed production cost (inert)
  Eigen::Vector2d zeta{1.0, 1.0};    // linear production cost
  Eigen::Vector2d eta_bar{1.0, 2.0}; // quadratic production cost at xi1 = 0
  double a = 10.0;                   // demand intercept
  double b = 5.0;                    // demand slope
  double sigma = 0.1;                // pre-truncation normal standard deviation

  void Validate() const;
};

// Pi(xi1) = [[2b + eta_bar_1 + xi1, b], [b, 2b + eta_bar_2 + xi1]].
Eigen::Matrix2d DuopolyPi(const DuopolyParams& p, double xi1);

// n = 2, m = 4 problem on [-1, 1]^2 with y = (productions, capacity
// multipliers): A = diag(gamma), q1 = -beta, B = [0 I], N = B',
// M = [[Pi, I], [-I, 0]], q2 = -(a + xi2 - zeta, 0).
TwoStageProblem BuildDuopolyStochastic(const DuopolyParams& p);

// The problem plus psi(xi) = xi, b = 0, s = t = 2. Throws
// Error(kInvalidForExample) unless zeta = (1, 1) and beta_1 = beta_2.
std::pair<TwoStageProblem, MomentAmbiguitySet> BuildDuopolyDrlcp(const DuopolyParams& p);

struct DuopolyAnalytic {
  Eigen::Matrix2d Pi_hat;
  Eigen::Vector2d rhs;  // a - beta - 1
  Eigen::Vector2d z;
  // Row i: (constant, xi2 coefficient, xi1 coefficient) of mu_i(z, xi).
  Eigen::Matrix<double, 2, 3> mu_coeff;
  Eigen::Matrix2d Lambda1;
  Eigen::Matrix2d Lambda2;

  DrlcpCandidate Candidate() const;
  double Mu(int i, const Vector& xi) const;
};

// Pi_hat z = (a - beta - 1), capacity multipliers affine in xi, and the
// dual matrices Lambda1 = -Lambda2 = [[z1, -1], [z2, -1]]. Throws
// Error(kConditionViolated) when CheckExampleCondition fails or z <= 0.
DuopolyAnalytic DuopolyAnalyticSolution(const DuopolyParams& p);

// (a - 2)(eta_bar_i + 1 + b) / ((a - beta_i - 1)(eta_bar_i + b - gamma_i))
//   >= det Pi(1) / det Pi_hat   for i = 1, 2.
// False when a - beta_i - 1 <= 0. Throws Error(kDegenerateDeterminant) when
// eta_bar_i + b - gamma_i <= 0 or a determinant is not positive.
bool CheckExampleCondition(const DuopolyParams& p);

// Box in which the analytic point is the only capacity vector with both
// capacities binding: hi_i = inf over the support of the unconstrained
// production Pi(xi1)^{-1}(a + xi2 - zeta), lo = 1e-3 hi.
Box DuopolyInteriorBox(const DuopolyParams& p);

// Independent truncated normals on [-1, 1]^2, sampled by inverse CDF.
Density DuopolyDensity(double sigma);

struct ErrorExperimentOptions {
  std::vector<int> K_list{5, 10, 20, 40, 60, 100};
  std::vector<double> sigma_list{0.1, 0.5, 1.0, 10.0};
  int reps = 100;
  int N = 5000;
  std::uint64_t seed = 0;
};

struct ErrorRow {
  int K = 0;
  double sigma = 0.0;
  double error1 = 0.0;
  double error2 = 0.0;
  int reps = 0;
  int N = 0;
  std::uint64_t seed = 0;
};

struct ErrorTable {
  std::vector<ErrorRow> rows;  // K-major, then sigma
  std::string ToCsv() const;
};

// For each (K, sigma) and replication: K Voronoi centers and N fresh samples
// from the truncated normal, piecewise-constant multipliers from the centers,
// and the sample mean of |mu_i(xi) - mu_i(center(xi))|; averaged over reps.
// Replication streams derive from (seed, K, sigma, rep).
ErrorTable RunErrorExperiment(const DuopolyParams& p, const ErrorExperimentOptions& opts);

}  // namespace slcp
