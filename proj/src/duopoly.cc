#include "slcp/duopoly.h"

#include <algorithm>
#include <cmath>

#include "slcp/csv.h"
#include "slcp/kernels.h"
#include "slcp/parallel.h"
#include "slcp/random.h"

namespace slcp {
namespace {

Box DuopolySupport() { return Box::Cube(2, -1.0, 1.0); }

}  // namespace

void DuopolyParams::Validate() const {
  if (!(b > 0.0)) throw Error(ErrorCode::kInvalidArgument, "demand slope b must be > 0");
  if (!(gamma.array() > 0.0).all()) throw Error(ErrorCode::kInvalidArgument, "gamma must be > 0");
  if (!(eta_bar.array() >= 1.0).all()) {
    throw Error(ErrorCode::kInvalidArgument, "eta_bar must be >= 1");
  }
  if (!(sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma must be > 0");
}

Eigen::Matrix2d DuopolyPi(const DuopolyParams& p, double xi1) {
  Eigen::Matrix2d Pi;
  Pi << 2.0 * p.b + p.eta_bar[0] + xi1, p.b, p.b, 2.0 * p.b + p.eta_bar[1] + xi1;
  return Pi;
}

TwoStageProblem BuildDuopolyStochastic(const DuopolyParams& p) {
  p.Validate();
  const Matrix A = p.gamma.asDiagonal();
  const Vector q1 = -p.beta;
  Matrix B = Matrix::Zero(2, 4);
  B(0, 2) = 1.0;
  B(1, 3) = 1.0;
  const Matrix N = B.transpose();
  auto oracle = [p, B, N](const Vector& xi) {
    Matrix M = Matrix::Zero(4, 4);
    M.topLeftCorner(2, 2) = DuopolyPi(p, xi[0]);
    M.topRightCorner(2, 2).setIdentity();
    M.bottomLeftCorner(2, 2) = -Matrix::Identity(2, 2);
    Vector q2 = Vector::Zero(4);
    q2[0] = -(p.a + xi[1] - p.zeta[0]);
    q2[1] = -(p.a + xi[1] - p.zeta[1]);
    return Coefficients{B, std::move(M), N, std::move(q2)};
  };
  return TwoStageProblem(A, q1, oracle, DuopolySupport());
}

std::pair<TwoStageProblem, MomentAmbiguitySet> BuildDuopolyDrlcp(const DuopolyParams& p) {
  if (p.zeta[0] != 1.0 || p.zeta[1] != 1.0) {
    throw Error(ErrorCode::kInvalidForExample, "the DRLCP example needs zeta = (1, 1)");
  }
  if (p.beta[0] != p.beta[1]) {
    throw Error(ErrorCode::kInvalidForExample, "the DRLCP example needs beta_1 = beta_2");
  }
  MomentAmbiguitySet amb;
  amb.psi = [](const Vector& xi) { return Vector(xi); };
  amb.b = Vector::Zero(2);
  amb.s = 2;
  return {BuildDuopolyStochastic(p), std::move(amb)};
}

bool CheckExampleCondition(const DuopolyParams& p) {
  Eigen::Matrix2d Pi_hat = DuopolyPi(p, 0.0);
  Pi_hat.diagonal() -= p.gamma;
  const double det_hat = Pi_hat.determinant();
  const double det_one = DuopolyPi(p, 1.0).determinant();
  if (!(det_hat > 0.0) || !(det_one > 0.0)) {
    throw Error(ErrorCode::kDegenerateDeterminant, "det Pi_hat and det Pi(1) must be positive");
  }
  for (int i = 0; i < 2; ++i) {
    const double denom = p.eta_bar[i] + p.b - p.gamma[i];
    if (!(denom > 0.0)) {
      throw Error(ErrorCode::kDegenerateDeterminant,
                  "eta_bar_i + b - gamma_i must be positive for player " + std::to_string(i + 1));
    }
  }
  for (int i = 0; i < 2; ++i) {
    const double margin = p.a - p.beta[i] - 1.0;
    if (!(margin > 0.0)) return false;
    const double lhs = (p.a - 2.0) * (p.eta_bar[i] + 1.0 + p.b) /
                       (margin * (p.eta_bar[i] + p.b - p.gamma[i]));
    if (!(lhs >= det_one / det_hat)) return false;
  }
  return true;
}

DrlcpCandidate DuopolyAnalytic::Candidate() const {
  return DrlcpCandidate{Vector(z), Matrix(Lambda1), Matrix(Lambda2)};
}

double DuopolyAnalytic::Mu(int i, const Vector& xi) const {
  return mu_coeff(i, 0) + mu_coeff(i, 1) * xi[1] + mu_coeff(i, 2) * xi[0];
}

DuopolyAnalytic DuopolyAnalyticSolution(const DuopolyParams& p) {
  p.Validate();
  if (!CheckExampleCondition(p)) {
    throw Error(ErrorCode::kConditionViolated, "the interior-capacity condition does not hold");
  }
  DuopolyAnalytic out;
  out.Pi_hat = DuopolyPi(p, 0.0);
  out.Pi_hat.diagonal() -= p.gamma;
  out.rhs = Eigen::Vector2d::Constant(p.a - 1.0) - p.beta;
  out.z = out.Pi_hat.partialPivLu().solve(out.rhs);
  if (!(out.z.array() > 0.0).all()) {
    throw Error(ErrorCode::kConditionViolated, "capacities must be positive");
  }
  for (int i = 0; i < 2; ++i) {
    const int other = 1 - i;
    out.mu_coeff(i, 0) = p.a - 1.0 - (2.0 * p.b + p.eta_bar[i]) * out.z[i] - p.b * out.z[other];
    out.mu_coeff(i, 1) = 1.0;
    out.mu_coeff(i, 2) = -out.z[i];
    out.Lambda1(i, 0) = out.z[i];
    out.Lambda1(i, 1) = -1.0;
  }
  out.Lambda2 = -out.Lambda1;
  return out;
}

Box DuopolyInteriorBox(const DuopolyParams& p) {
  p.Validate();
  constexpr int kGrid = 2001;
  Vector hi = Vector::Constant(2, std::numeric_limits<double>::infinity());
  for (int j = 0; j < kGrid; ++j) {
    const double xi1 = j + 1 == kGrid ? 1.0 : -1.0 + 2.0 * j / (kGrid - 1);
    const Eigen::Matrix2d Pi = DuopolyPi(p, xi1);
    for (double xi2 : {-1.0, 1.0}) {
      const Eigen::Vector2d demand = Eigen::Vector2d::Constant(p.a + xi2) - p.zeta;
      const Eigen::Vector2d y = Pi.partialPivLu().solve(demand);
      hi = hi.cwiseMin(Vector(y));
    }
  }
  if (!(hi.array() > 0.0).all()) {
    throw Error(ErrorCode::kConditionViolated, "unconstrained production is not positive");
  }
  return Box(1e-3 * hi, hi);
}

Density DuopolyDensity(double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma must be > 0");
  return Density::TruncatedNormal(DuopolySupport(), sigma);
}

std::string ErrorTable::ToCsv() const {
  std::string out = CsvRecord({"K", "sigma", "error1", "error2", "reps", "N", "seed"});
  for (const ErrorRow& r : rows) {
    out += CsvRecord({std::to_string(r.K), FormatDouble(r.sigma), FormatDouble(r.error1),
                      FormatDouble(r.error2), std::to_string(r.reps), std::to_string(r.N),
                      std::to_string(r.seed)});
  }
  return out;
}

ErrorTable RunErrorExperiment(const DuopolyParams& p, const ErrorExperimentOptions& opts) {
  if (opts.reps < 1 || opts.N < 1) throw Error(ErrorCode::kInvalidArgument, "reps and N must be >= 1");
  if (opts.K_list.empty() || opts.sigma_list.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "K and sigma lists must be nonempty");
  }
  for (int K : opts.K_list) {
    if (K < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  }
  const DuopolyAnalytic analytic = DuopolyAnalyticSolution(p);
  const auto N = static_cast<std::size_t>(opts.N);
  ErrorTable table;
  for (int K : opts.K_list) {
    for (double sigma : opts.sigma_list) {
      const Density density = DuopolyDensity(sigma);
      std::vector<Eigen::Vector2d> per_rep(static_cast<std::size_t>(opts.reps));
      ParallelFor(per_rep.size(), [&](std::size_t rep) {
        Rng rng(opts.seed, {static_cast<std::uint64_t>(K), StreamKey(sigma),
                            static_cast<std::uint64_t>(rep)});
        PointSet centers(2, static_cast<std::size_t>(K));
        for (std::size_t c = 0; c < centers.size(); ++c) centers.Set(c, density.Sample(rng));
        PointSet samples(2, N);
        for (std::size_t j = 0; j < N; ++j) samples.Set(j, density.Sample(rng));
        std::vector<int> index(N);
        std::vector<double> dist2(N);
        kernels::NearestCenter(samples, centers, index, dist2);
        // mu_i(xi) - mu_i(c) = (xi2 - c2) - z_i (xi1 - c1).
        Eigen::Vector2d err;
        std::vector<double> values(N);
        std::vector<double> center_values(centers.size());
        for (int i = 0; i < 2; ++i) {
          const double zi = analytic.z[i];
          for (std::size_t j = 0; j < N; ++j) {
            values[j] = samples.at(j, 1) - zi * samples.at(j, 0);
          }
          for (std::size_t c = 0; c < centers.size(); ++c) {
            center_values[c] = centers.at(c, 1) - zi * centers.at(c, 0);
          }
          err[i] = kernels::SumAbsGatheredDiff(values, center_values, index) /
                   static_cast<double>(N);
        }
        per_rep[rep] = err;
      });
      Eigen::Vector2d mean = Eigen::Vector2d::Zero();
      for (const auto& e : per_rep) mean += e;
      mean /= static_cast<double>(opts.reps);
      table.rows.push_back(ErrorRow{K, sigma, mean[0], mean[1], opts.reps, opts.N, opts.seed});
    }
  }
  return table;
}

}  // namespace slcp
