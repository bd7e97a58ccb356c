#include "slcp/two_stage.h"

#include <algorithm>
#include <sstream>

#include "slcp/parallel.h"
#include "slcp/random.h"

namespace slcp {
namespace {

std::string PointString(const Vector& xi) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (Eigen::Index k = 0; k < xi.size(); ++k) os << (k ? "," : "") << xi[k];
  os << ")";
  return os.str();
}

}  // namespace

TwoStageProblem::TwoStageProblem(Matrix A, Vector q1, CoefficientOracle oracle, Box support)
    : A_(std::move(A)), q1_(std::move(q1)), oracle_(std::move(oracle)),
      support_(std::move(support)) {
  if (A_.rows() != A_.cols() || A_.rows() != q1_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "A must be n x n with n = len(q1)");
  }
  CheckFinite(A_, "A");
  CheckFinite(q1_, "q1");
  if (!oracle_) throw Error(ErrorCode::kInvalidArgument, "coefficient oracle is empty");
  const Coefficients c = oracle_(support_.Center());
  m_ = static_cast<int>(c.M.rows());
  At(support_.Center());
}

Coefficients TwoStageProblem::At(const Vector& xi) const {
  if (xi.size() != support_.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "xi dimension differs from the support");
  }
  Coefficients c = oracle_(xi);
  const int n = this->n();
  if (c.B.rows() != n || c.B.cols() != m_ || c.M.rows() != m_ || c.M.cols() != m_ ||
      c.N.rows() != m_ || c.N.cols() != n || c.q2.size() != m_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "oracle returned inconsistent shapes at xi = " + PointString(xi));
  }
  if (!c.B.allFinite() || !c.M.allFinite() || !c.N.allFinite() || !c.q2.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument,
                "oracle returned non-finite coefficients at xi = " + PointString(xi));
  }
  return c;
}

double MinSymmetricEigenvalue(const Matrix& X) {
  const Matrix S = 0.5 * (X + X.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

namespace {

Coefficients CheckedCoefficients(const TwoStageProblem& prob, const Vector& x, const Vector& xi) {
  if (x.size() != prob.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "x length differs from n");
  }
  if (!prob.support().Contains(xi, 1e-12)) {
    throw Error(ErrorCode::kPointOutsideSupport, "xi = " + PointString(xi));
  }
  Coefficients c = prob.At(xi);
  const double scale = std::max(1.0, c.M.norm());
  if (MinSymmetricEigenvalue(c.M) < -kMonotoneSlack * scale) {
    throw Error(ErrorCode::kNotMonotoneAt,
                "symmetric part of M is indefinite at xi = " + PointString(xi));
  }
  return c;
}

}  // namespace

SecondStageSolution SolveSecondStage(const TwoStageProblem& prob, const Vector& x,
                                     const Vector& xi, const SolverOptions& opts) {
  const Coefficients c = CheckedCoefficients(prob, x, xi);
  SolutionOperator op = SolutionOperatorW(c.M, c.N, c.q2, x, opts);
  return SecondStageSolution{std::move(op.y), std::move(op.D), std::move(op.W)};
}

Vector SecondStageY(const TwoStageProblem& prob, const Vector& x, const Vector& xi,
                    const SolverOptions& opts) {
  const Coefficients c = CheckedCoefficients(prob, x, xi);
  return SolveLcp(Lcp(c.M, c.N * x + c.q2), opts).z;
}

Vector ResidualF(const TwoStageProblem& prob, const Vector& x, const Density& density,
                 const QuadratureSpec& quad, const SolverOptions& opts) {
  const NodeSet nodes = SupportNodes(density, quad);
  std::vector<Vector> terms(nodes.points.size());
  ParallelFor(nodes.points.size(), [&](std::size_t j) {
    const Vector& xi = nodes.points[j];
    const Coefficients c = prob.At(xi);
    const Vector y = SecondStageY(prob, x, xi, opts);
    terms[j] = nodes.weights[j] * (c.B * y);
  });
  Vector expectation = Vector::Zero(prob.n());
  for (const Vector& t : terms) expectation += t;
  return x.cwiseMin(prob.A() * x + expectation + prob.q1());
}

MonotonicityReport ComputeMonotonicityReport(const TwoStageProblem& prob, int sample_count,
                                             std::uint64_t seed) {
  if (sample_count < 1) throw Error(ErrorCode::kInvalidArgument, "sample_count must be >= 1");
  const int n = prob.n();
  const int m = prob.m();
  const Box& box = prob.support();
  std::vector<Vector> xis(static_cast<std::size_t>(sample_count));
  Rng rng(seed, {0x4d4f4e4fULL});
  for (auto& xi : xis) {
    xi.resize(box.dim());
    for (int k = 0; k < box.dim(); ++k) xi[k] = rng.Uniform(box.lo[k], box.hi[k]);
  }
  std::vector<double> kappa(xis.size());
  ParallelFor(xis.size(), [&](std::size_t j) {
    const Coefficients c = prob.At(xis[j]);
    Matrix block(n + m, n + m);
    block << prob.A(), c.B, c.N, c.M;
    kappa[j] = MinSymmetricEigenvalue(block);
  });
  MonotonicityReport report;
  report.sample_count = sample_count;
  report.kappa_min = kappa[0];
  report.worst_xi = xis[0];
  double sum = 0.0;
  for (std::size_t j = 0; j < kappa.size(); ++j) {
    sum += kappa[j];
    if (kappa[j] < report.kappa_min) {
      report.kappa_min = kappa[j];
      report.worst_xi = xis[j];
    }
  }
  report.kappa_mean =
      std::max(report.kappa_min, sum / static_cast<double>(kappa.size()));
  if (report.kappa_min <= 0.0) {
    Warn("monotonicity modulus is not positive: kappa_min = " +
         std::to_string(report.kappa_min) + " at xi = " + PointString(report.worst_xi));
  }
  return report;
}

}  // namespace slcp
