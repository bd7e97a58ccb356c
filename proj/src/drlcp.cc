#include "slcp/drlcp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "slcp/csv.h"
#include "slcp/parallel.h"
#include "slcp/random.h"

namespace slcp {
namespace {

int ParameterCount(int n, int t) { return n + 2 * n * t; }

Vector ToParameters(const DrlcpCandidate& c) {
  const auto n = c.x.size();
  const auto t = c.Lambda1.cols();
  Vector theta(ParameterCount(static_cast<int>(n), static_cast<int>(t)));
  theta.head(n) = c.x;
  Eigen::Index k = n;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < t; ++j) theta[k++] = c.Lambda1(i, j);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < t; ++j) theta[k++] = c.Lambda2(i, j);
  }
  return theta;
}

DrlcpCandidate FromParameters(const Vector& theta, int n, int t) {
  DrlcpCandidate c;
  c.x = theta.head(n);
  c.Lambda1.resize(n, t);
  c.Lambda2.resize(n, t);
  Eigen::Index k = n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < t; ++j) c.Lambda1(i, j) = theta[k++];
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < t; ++j) c.Lambda2(i, j) = theta[k++];
  }
  return c;
}

void CheckCandidate(const DrlcpSystem& sys, const DrlcpCandidate& c) {
  const int n = sys.prob().n();
  const int t = sys.amb().t();
  if (c.x.size() != n || c.Lambda1.rows() != n || c.Lambda1.cols() != t ||
      c.Lambda2.rows() != n || c.Lambda2.cols() != t) {
    throw Error(ErrorCode::kDimensionMismatch, "candidate shapes differ from the system");
  }
}

double MaxOrZero(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct Bounds {
  Vector lo;
  Vector hi;
};

Bounds ParameterBounds(const DrlcpSystem& sys, const DrlcpSolveOptions& opts) {
  const int n = sys.prob().n();
  const int t = sys.amb().t();
  const int s = sys.amb().s;
  const int dim = ParameterCount(n, t);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  Bounds b{Vector::Constant(dim, -kInf), Vector::Constant(dim, kInf)};
  if (opts.x_box) {
    b.lo.head(n) = opts.x_box->lo.cwiseMax(0.0);
    b.hi.head(n) = opts.x_box->hi;
  } else {
    b.lo.head(n).setZero();
  }
  for (int block = 0; block < 2; ++block) {
    for (int i = 0; i < n; ++i) {
      for (int j = s; j < t; ++j) b.lo[n + block * n * t + i * t + j] = 0.0;
    }
  }
  return b;
}

struct LmResult {
  Vector theta;
  double norm = 0.0;
  int iterations = 0;
};

LmResult ProjectedLevenbergMarquardt(const std::function<Vector(const Vector&)>& residual,
                                     Vector theta, const Bounds& bounds, double tol,
                                     int max_iter) {
  auto project = [&](const Vector& v) { return v.cwiseMax(bounds.lo).cwiseMin(bounds.hi); };
  theta = project(theta);
  Vector r = residual(theta);
  double f = r.squaredNorm();
  double lambda = 1e-3;
  const auto dim = theta.size();
  int it = 0;
  for (; it < max_iter && std::sqrt(f) > tol; ++it) {
    Matrix J(r.size(), dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      double h = 1e-7 * std::max(1.0, std::abs(theta[k]));
      if (theta[k] + h > bounds.hi[k]) h = -h;
      Vector tp = theta;
      tp[k] += h;
      const Vector rp = residual(tp);
      J.col(k) = rp.size() == r.size() ? Vector((rp - r) / h) : Vector::Zero(r.size());
    }
    const Matrix JtJ = J.transpose() * J;
    const Vector g = J.transpose() * r;
    bool accepted = false;
    while (lambda <= 1e12) {
      Matrix H = JtJ;
      H.diagonal().array() += lambda;
      const Vector step = H.ldlt().solve(-g);
      const Vector trial = project(theta + step);
      const Vector rt = residual(trial);
      const double ft = rt.squaredNorm();
      if (ft < f) {
        theta = trial;
        r = rt;
        f = ft;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) break;
  }
  return LmResult{std::move(theta), std::sqrt(f), it};
}

DrlcpVerifyReport Report(const DrlcpResidual& r, double tol) {
  DrlcpVerifyReport rep;
  rep.groups = {{"x_sign", MaxOrZero(r.x_sign)},
                {"first_stage", MaxOrZero(r.first_stage)},
                {"scalar", MaxOrZero(r.scalar_rows)},
                {"lambda_sign", MaxOrZero(r.lambda_sign)},
                {"second_stage", MaxOrZero(r.second_stage)}};
  rep.pass = true;
  for (const DrlcpGroupReport& g : rep.groups) {
    if (g.max_violation > tol) rep.pass = false;
    if (rep.worst_group.empty() || g.max_violation > rep.worst_violation) {
      rep.worst_violation = g.max_violation;
      rep.worst_group = g.group;
    }
  }
  return rep;
}

}  // namespace

void MomentAmbiguitySet::Validate() const {
  if (s < 0 || s > t()) throw Error(ErrorCode::kInvalidArgument, "need 0 <= s <= t");
  if (t() > 0 && !psi) throw Error(ErrorCode::kInvalidArgument, "moment functions are missing");
  CheckFinite(b, "moment targets");
}

Vector MomentAmbiguitySet::Evaluate(const Vector& xi) const {
  if (t() == 0) return Vector::Zero(0);
  Vector v = psi(xi);
  if (v.size() != t()) {
    throw Error(ErrorCode::kDimensionMismatch, "psi returned the wrong number of moments");
  }
  CheckFinite(v, "moment function value");
  return v;
}

DrlcpSystem::DrlcpSystem(TwoStageProblem prob, MomentAmbiguitySet amb,
                         std::vector<Vector> samples)
    : prob_(std::move(prob)), amb_(std::move(amb)), samples_(std::move(samples)) {
  amb_.Validate();
  if (samples_.empty()) throw Error(ErrorCode::kInvalidArgument, "DRLCP needs K >= 1 samples");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!prob_.support().Contains(samples_[i])) {
      throw Error(ErrorCode::kPointOutsideSupport,
                  "sample " + std::to_string(i) + " lies outside the support");
    }
    centered_.push_back(amb_.Evaluate(samples_[i]) - amb_.b);
  }
}

DrlcpSystem AssembleDrlcp(const TwoStageProblem& prob, const MomentAmbiguitySet& amb,
                          const std::vector<Vector>& samples) {
  return DrlcpSystem(prob, amb, samples);
}

DrlcpResidual EvaluateDrlcpResidual(const DrlcpSystem& sys, const DrlcpCandidate& cand,
                                    const SolverOptions& lcp) {
  CheckCandidate(sys, cand);
  const TwoStageProblem& prob = sys.prob();
  const int n = prob.n();
  const int m = prob.m();
  const int t = sys.amb().t();
  const int s = sys.amb().s;
  const auto K = static_cast<std::size_t>(sys.K());

  DrlcpResidual r;
  r.x_sign = (-cand.x).cwiseMax(0.0);
  r.y.resize(K);
  r.first_stage_raw.resize(static_cast<Eigen::Index>(K) * n);
  r.scalar_rows_raw.resize(static_cast<Eigen::Index>(K));
  r.second_stage.resize(static_cast<Eigen::Index>(K) * m);
  const Vector Ax = prob.A() * cand.x;
  std::vector<std::string> failure(K);
  ParallelFor(K, [&](std::size_t i) {
    const Vector& xi = sys.samples()[i];
    try {
      const Coefficients c = prob.At(xi);
      Vector y = SecondStageY(prob, cand.x, xi, lcp);
      const Vector base = Ax + c.B * y + prob.q1();
      const Vector& centered = sys.centered_moments()[i];
      const auto row = static_cast<Eigen::Index>(i);
      r.first_stage_raw.segment(row * n, n) = -base - cand.Lambda1 * centered;
      r.scalar_rows_raw[row] = cand.x.dot(base - cand.Lambda2 * centered);
      r.second_stage.segment(row * m, m) = y.cwiseMin(c.M * y + c.N * cand.x + c.q2);
      r.y[i] = std::move(y);
    } catch (const Error& e) {
      failure[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < K; ++i) {
    if (!failure[i].empty()) {
      throw Error(ErrorCode::kScenarioFailure,
                  "second stage at sample " + std::to_string(i) + ": " + failure[i]);
    }
  }
  r.first_stage = r.first_stage_raw.cwiseMax(0.0);
  r.scalar_rows = r.scalar_rows_raw.cwiseMax(0.0);
  r.lambda_sign.resize(2 * n * (t - s));
  Eigen::Index k = 0;
  for (const Matrix* L : {&cand.Lambda1, &cand.Lambda2}) {
    for (int i = 0; i < n; ++i) {
      for (int j = s; j < t; ++j) r.lambda_sign[k++] = std::max(0.0, -(*L)(i, j));
    }
  }
  r.stacked.resize(r.x_sign.size() + r.first_stage.size() + r.scalar_rows.size() +
                   r.lambda_sign.size() + r.second_stage.size());
  r.stacked << r.x_sign, r.first_stage, r.scalar_rows, r.lambda_sign, r.second_stage;
  r.norm = r.stacked.norm();
  return r;
}

DrlcpSolution SolveDrlcp(const DrlcpSystem& sys, const DrlcpSolveOptions& opts) {
  if (opts.starts < 1) throw Error(ErrorCode::kInvalidArgument, "starts must be >= 1");
  if (!(opts.tol > 0.0) || opts.max_iter < 1) {
    throw Error(ErrorCode::kInvalidArgument, "invalid DRLCP tolerance or iteration cap");
  }
  const int n = sys.prob().n();
  const int t = sys.amb().t();
  const int s = sys.amb().s;
  if (opts.x_box && opts.x_box->dim() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "x box dimension differs from n");
  }

  auto finish = [&](const DrlcpCandidate& c, int start, int iterations) {
    DrlcpResidual r = EvaluateDrlcpResidual(sys, c, opts.lcp);
    return DrlcpSolution{c, std::move(r.y), r.norm, start, iterations};
  };

  if (opts.warm_start) {
    CheckCandidate(sys, *opts.warm_start);
    DrlcpSolution warm = finish(*opts.warm_start, -1, 0);
    if (warm.residual <= opts.tol) return warm;
  }

  const Bounds bounds = ParameterBounds(sys, opts);
  const auto residual = [&](const Vector& theta) {
    try {
      return EvaluateDrlcpResidual(sys, FromParameters(theta, n, t), opts.lcp).stacked;
    } catch (const Error&) {
      // Parameter points whose recourse cannot be solved are rejected by
      // the line search.
      return Vector(Vector::Constant(1, std::numeric_limits<double>::infinity()));
    }
  };

  std::vector<Vector> starts;
  if (opts.warm_start) starts.push_back(ToParameters(*opts.warm_start));
  const Vector x_lo = opts.x_box ? Vector(opts.x_box->lo.cwiseMax(0.0)) : Vector::Zero(n);
  const Vector x_hi = opts.x_box ? opts.x_box->hi : Vector::Ones(n);
  {
    Vector origin = Vector::Zero(ParameterCount(n, t));
    starts.push_back(origin.cwiseMax(bounds.lo).cwiseMin(bounds.hi));
  }
  for (int k = 1; k < opts.starts; ++k) {
    Rng rng(opts.seed, {0x44524c4350ULL, static_cast<std::uint64_t>(k)});
    Vector theta(ParameterCount(n, t));
    for (int i = 0; i < n; ++i) theta[i] = rng.Uniform(x_lo[i], x_hi[i]);
    for (int block = 0; block < 2; ++block) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < t; ++j) {
          const double lo = j < s ? -opts.lambda_range : 0.0;
          theta[n + block * n * t + i * t + j] = rng.Uniform(lo, opts.lambda_range);
        }
      }
    }
    starts.push_back(std::move(theta));
  }

  std::vector<LmResult> results(starts.size());
  ParallelFor(starts.size(), [&](std::size_t k) {
    results[k] = ProjectedLevenbergMarquardt(residual, starts[k], bounds, opts.tol, opts.max_iter);
  });
  std::size_t best = 0;
  for (std::size_t k = 1; k < results.size(); ++k) {
    if (results[k].norm < results[best].norm) best = k;
  }
  const int start_index = static_cast<int>(best) - (opts.warm_start ? 1 : 0);
  DrlcpSolution sol =
      finish(FromParameters(results[best].theta, n, t), start_index, results[best].iterations);
  if (!(sol.residual <= opts.tol)) {
    throw Error(ErrorCode::kNoFeasiblePoint,
                "no start reached the tolerance; best residual " + FormatDouble(sol.residual));
  }
  return sol;
}

DrlcpVerifyReport VerifyDrlcp(const DrlcpSystem& sys, const DrlcpCandidate& cand, double tol,
                              const SolverOptions& lcp) {
  return Report(EvaluateDrlcpResidual(sys, cand, lcp), tol);
}

DrlcpVerifyReport StressVerifyDrlcp(const DrlcpSystem& sys, const DrlcpCandidate& cand,
                                    double tol, int max_points) {
  const Box& box = sys.prob().support();
  const int dim = box.dim();
  const int per_axis =
      std::max(2, static_cast<int>(std::floor(std::pow(max_points, 1.0 / dim) + 1e-9)));
  std::size_t total = 1;
  for (int k = 0; k < dim; ++k) total *= static_cast<std::size_t>(per_axis);
  std::vector<Vector> grid;
  grid.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Vector p(dim);
    std::size_t rest = flat;
    for (int k = 0; k < dim; ++k) {
      const auto j = static_cast<double>(rest % static_cast<std::size_t>(per_axis));
      rest /= static_cast<std::size_t>(per_axis);
      p[k] = j + 1 == per_axis ? box.hi[k]
                               : box.lo[k] + (box.hi[k] - box.lo[k]) * j / (per_axis - 1);
    }
    grid.push_back(std::move(p));
  }
  return VerifyDrlcp(DrlcpSystem(sys.prob(), sys.amb(), std::move(grid)), cand, tol);
}

std::string FormatCandidate(const DrlcpCandidate& cand) {
  std::ostringstream os;
  os << "# drlcp candidate n=" << cand.x.size() << " t=" << cand.Lambda1.cols() << "\n";
  auto line = [&](const char* key, const std::vector<double>& values) {
    os << key;
    for (double v : values) os << ' ' << FormatDouble(v);
    os << '\n';
  };
  line("x", std::vector<double>(cand.x.data(), cand.x.data() + cand.x.size()));
  line("lambda1", FlattenRowMajor(cand.Lambda1));
  line("lambda2", FlattenRowMajor(cand.Lambda2));
  return os.str();
}

DrlcpCandidate ParseCandidate(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  std::optional<std::vector<double>> x, l1, l2;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::istringstream ls(raw);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    std::vector<double> values;
    std::string token;
    while (ls >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size()) {
        throw Error(ErrorCode::kParseError,
                    "line " + std::to_string(line_no) + ": bad number '" + token + "'");
      }
      values.push_back(v);
    }
    auto* slot = key == "x" ? &x : key == "lambda1" ? &l1 : key == "lambda2" ? &l2 : nullptr;
    if (!slot) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (*slot) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    *slot = std::move(values);
  }
  if (!x || !l1 || !l2) throw Error(ErrorCode::kParseError, "candidate needs x, lambda1, lambda2");
  const auto n = x->size();
  if (n == 0 || l1->size() % n != 0 || l2->size() != l1->size()) {
    throw Error(ErrorCode::kParseError, "lambda lengths must be equal multiples of len(x)");
  }
  const auto t = l1->size() / n;
  DrlcpCandidate c;
  c.x = Eigen::Map<const Vector>(x->data(), static_cast<Eigen::Index>(n));
  c.Lambda1.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t));
  c.Lambda2.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < t; ++j) {
      c.Lambda1(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*l1)[i * t + j];
      c.Lambda2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*l2)[i * t + j];
    }
  }
  return c;
}

}  // namespace slcp
