// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "oracles.h"
#include "slcp/discretize.h"
#include "slcp/drlcp.h"
#include "slcp/duopoly.h"
#include "slcp/lcp.h"
#include "slcp/phm.h"
#include "slcp/problems.h"
#include "slcp/random.h"
#include "slcp/two_stage.h"

namespace {

using slcp::Matrix;
using slcp::Vector;

double InfNorm(const Vector& v) { return v.lpNorm<Eigen::Infinity>(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

bool RunCriterion(int id, const std::string& name, double limit_s,
                  const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_s > 0.0 && secs >= limit_s) {
    o.pass = false;
    o.detail += " (over time limit)";
  }
  std::printf("%s criterion %d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str(), secs);
  std::fflush(stdout);
  return o.pass;
}

std::string Fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

Outcome LcpOracle() {
  std::mt19937_64 rng(20260101);
  std::uniform_int_distribution<int> dim(2, 8);
  slcp::SolverOptions o;
  o.method = slcp::LcpMethod::kNewton;
  o.fallback = false;
  int ok = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = dim(rng);
    Matrix M;
    Vector q;
    oracle::RandomMonotoneLcp(rng, m, M, q);
    const auto ref = oracle::LcpSolutions(M, q);
    if (ref.size() != 1) continue;
    const Vector z = slcp::SolveLcp(slcp::Lcp(M, q), o).z;
    const double err = InfNorm(z - ref[0]);
    worst = std::max(worst, err);
    if (err <= 1e-8) ++ok;
  }
  return {ok == 200, Fmt("%.0f/200 within 1e-8, worst %.3g", ok, worst)};
}

Outcome WOperator() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const slcp::TwoStageProblem duo = slcp::BuildDuopolyStochastic(slcp::DuopolyParams{});
  const slcp::TwoStageProblem t1 = slcp::Test1dProblem();
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const bool use_duo = trial % 2 == 0;
    const slcp::TwoStageProblem& prob = use_duo ? duo : t1;
    Vector xi(prob.xi_dim());
    for (int k = 0; k < xi.size(); ++k) xi[k] = u(rng);
    Vector x(prob.n());
    for (int k = 0; k < x.size(); ++k) x[k] = use_duo ? 0.6 * (u(rng) + 1.0) : 2.0 * u(rng);
    const slcp::Coefficients c = prob.At(xi);
    const Vector y = slcp::SecondStageY(prob, x, xi);
    const Matrix W = slcp::SolveSecondStage(prob, x, xi).W;
    worst = std::max(worst, InfNorm(y + W * (c.N * x + c.q2)));
  }
  return {worst <= 1e-10, Fmt("worst %.3g over 100 instances", worst)};
}

Outcome RefineRate() {
  slcp::RefineOptions o;
  o.kind = slcp::PartitionKind::kUniformBox;
  for (int K = 4; K <= 256; K *= 2) o.schedule.push_back(K);
  o.reference_K = 4096;
  const slcp::BuiltinProblem bp = slcp::MakeBuiltin("test1d");
  const slcp::ConvergenceTable t = slcp::RefineStudy(bp.problem, bp.density, o);
  std::vector<double> delta;
  std::vector<double> err;
  bool monotone = true;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    delta.push_back(t.rows[i].max_delta);
    err.push_back(t.rows[i].x_err);
    if (i > 0 && t.rows[i].x_err > t.rows[i - 1].x_err) monotone = false;
  }
  // Independent least-squares slope.
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < err.size(); ++i) mx += std::log(delta[i]), my += std::log(err[i]);
  mx /= err.size();
  my /= err.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    sxy += (std::log(delta[i]) - mx) * (std::log(err[i]) - my);
    sxx += (std::log(delta[i]) - mx) * (std::log(delta[i]) - mx);
  }
  const double slope = sxy / sxx;
  return {slope >= 0.8 && monotone && std::abs(slope - t.x_slope) < 1e-9,
          Fmt("slope %.4f, monotone %.0f", slope, monotone ? 1.0 : 0.0)};
}

slcp::DiscreteSLCP DuopolyK20() {
  const slcp::BuiltinProblem bp = slcp::MakeBuiltin("duopoly", 0.1);
  const slcp::Partition part = slcp::ComputeCellMoments(
      bp.problem, slcp::MakeSkeleton(slcp::PartitionKind::kVoronoi, bp.density, 20, 0),
      bp.density);
  return slcp::DiscreteSLCP(bp.problem, part);
}

Outcome PhmCrossValidation() {
  const slcp::DiscreteSLCP d = DuopolyK20();
  const slcp::DiscreteSolution direct = slcp::SolveDiscreteDirect(d);
  double worst_dx = 0.0;
  double worst_inv = 0.0;
  for (double r : {0.1, 1.0, 10.0}) {
    slcp::PhmOptions o;
    o.r = r;
    o.tol = 1e-10;
    o.max_iter = 20000;
    const slcp::PhmResult res = slcp::PhmSolve(d, o);
    worst_dx = std::max(worst_dx, InfNorm(res.solution.x - direct.x));
    slcp::PhmState s = slcp::PhmInit(d, r, Vector::Zero(d.n()));
    for (std::size_t it = 0; it < res.trace.records.size(); ++it) {
      s = slcp::PhmStep(s, d);
      Vector sum = Vector::Zero(d.n());
      for (int i = 0; i < d.K(); ++i) sum += d.cells()[i].p * s.w[i];
      worst_inv = std::max(worst_inv, InfNorm(sum));
    }
    worst_dx = std::max(worst_dx, InfNorm(s.x_bar - res.solution.x));
  }
  return {worst_dx <= 1e-6 && worst_inv <= 1e-12,
          Fmt("max |dx| %.3g, max |sum p w| %.3g", worst_dx, worst_inv)};
}

Outcome DuopolyAnalytic() {
  const slcp::DuopolyParams p;
  auto [prob, amb] = slcp::BuildDuopolyDrlcp(p);
  const slcp::Density density = slcp::DuopolyDensity(0.1);
  slcp::Rng rng(5);
  std::vector<Vector> samples;
  for (int i = 0; i < 50; ++i) samples.push_back(density.Sample(rng));
  const slcp::DrlcpSystem sys = slcp::AssembleDrlcp(prob, amb, samples);
  const slcp::DuopolyAnalytic a = slcp::DuopolyAnalyticSolution(p);
  const double analytic_res = slcp::EvaluateDrlcpResidual(sys, a.Candidate()).norm;
  slcp::DrlcpSolveOptions o;
  o.starts = 10;
  o.x_box = slcp::DuopolyInteriorBox(p);
  const slcp::DrlcpSolution s = slcp::SolveDrlcp(sys, o);
  const Vector y0 = slcp::SolveSecondStage(prob, s.candidate.x, Vector::Zero(2)).y;
  const bool ok = analytic_res <= 1e-10 && std::abs(s.candidate.x[1] - 0.2222) <= 1e-4 &&
                  std::abs(s.candidate.x[0] - 26.0 / 90.0) <= 1e-4 &&
                  std::abs(y0[2] - 4.7111) <= 1e-3 && std::abs(y0[3] - 4.8889) <= 1e-3;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "analytic residual %.3g, x = (%.6f, %.6f), mu0 = (%.4f, %.4f)",
                analytic_res, s.candidate.x[0], s.candidate.x[1], y0[2], y0[3]);
  return {ok, buf};
}

Outcome ErrorDecay() {
  slcp::ErrorExperimentOptions o;
  o.K_list = {5, 10, 20, 40, 60, 100};
  o.sigma_list = {0.1, 10.0};
  o.reps = 20;
  o.N = 5000;
  o.seed = 0;
  const slcp::ErrorTable t = slcp::RunErrorExperiment(slcp::DuopolyParams{}, o);
  bool decreasing = true;
  const slcp::ErrorRow* prev = nullptr;
  double at40_small = 0, at40_wide = 0;
  for (const slcp::ErrorRow& r : t.rows) {
    if (r.sigma == 0.1) {
      if (prev && !(r.error1 < prev->error1 && r.error2 < prev->error2)) decreasing = false;
      prev = &r;
    }
    if (r.K == 40) (r.sigma == 0.1 ? at40_small : at40_wide) = r.error1 + r.error2;
  }
  return {decreasing && at40_small < at40_wide,
          Fmt("decreasing %.0f, K=40 total error %.4g (sigma 0.1) vs %.4g (sigma 10)",
              decreasing ? 1.0 : 0.0, at40_small, at40_wide)};
}

Outcome ConstantExactness() {
  const slcp::BuiltinProblem bp = slcp::MakeBuiltin("constant");
  const slcp::TwoStageProblem& prob = bp.problem;
  const slcp::Coefficients c = prob.At(Vector::Zero(1));
  const int n = prob.n(), m = prob.m();
  Matrix big(n + m, n + m);
  big << prob.A(), c.B, c.N, c.M;
  Vector q(n + m);
  q << prob.q1(), c.q2;
  const auto ref = oracle::LcpSolutions(big, q);
  if (ref.size() != 1) return {false, "oracle found no unique solution"};
  double worst = 0.0;
  for (int K : {1, 4, 16}) {
    const slcp::Partition part = slcp::ComputeCellMoments(
        prob, slcp::MakeSkeleton(slcp::PartitionKind::kUniformBox, bp.density, K, 0), bp.density);
    const slcp::DiscreteSolution s = slcp::SolveDiscreteDirect(slcp::DiscreteSLCP(prob, part));
    worst = std::max(worst, InfNorm(s.x - ref[0].head(n)));
    for (const Vector& y : s.y) worst = std::max(worst, InfNorm(y - ref[0].tail(m)));
  }
  return {worst <= 1e-12, Fmt("max deviation from the stacked oracle %.3g", worst)};
}

Outcome StabilityIdentity() {
  bool ok = true;
  for (int m = 1; m <= 6; ++m) {
    const slcp::StabilityConstants s =
        slcp::ComputeStabilityConstants(Matrix::Identity(m, m), 0.5);
    if (s.beta != 1.0) ok = false;
  }
  return {ok, ok ? "beta == 1 for m = 1..6" : "beta != 1"};
}

}  // namespace

int main() {
  bool all = true;
  all &= RunCriterion(1, "lcp-oracle-equivalence", 10.0, LcpOracle);
  all &= RunCriterion(2, "w-operator-identity", 0.0, WOperator);
  all &= RunCriterion(3, "discretization-rate", 120.0, RefineRate);
  all &= RunCriterion(4, "phm-cross-validation", 60.0, PhmCrossValidation);
  all &= RunCriterion(5, "duopoly-analytic", 120.0, DuopolyAnalytic);
  all &= RunCriterion(6, "error-decay", 180.0, ErrorDecay);
  all &= RunCriterion(7, "constant-exactness", 0.0, ConstantExactness);
  all &= RunCriterion(8, "stability-identity", 0.0, StabilityIdentity);
  return all ? 0 : 1;
}
