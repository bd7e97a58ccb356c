#include "slcp/phm.h"

#include <algorithm>

#include "slcp/csv.h"
#include "slcp/parallel.h"

namespace slcp {
namespace {

Vector WeightedSum(const DiscreteSLCP& d, const std::vector<Vector>& v) {
  Vector sum = Vector::Zero(v.front().size());
  for (std::size_t i = 0; i < v.size(); ++i) sum += d.cells()[i].p * v[i];
  return sum;
}

double InfNorm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

std::string PhmTrace::ToCsv() const {
  std::string out = CsvRecord({"nu", "primal_change", "spread", "residual"});
  for (const PhmRecord& r : records) {
    out += CsvRecord({std::to_string(r.nu), FormatDouble(r.primal_change), FormatDouble(r.spread),
                      FormatDouble(r.residual)});
  }
  return out;
}

PhmNotConvergedError::PhmNotConvergedError(const std::string& message, PhmTrace trace)
    : NotConvergedError(message, static_cast<int>(trace.records.size()),
                        trace.records.empty()
                            ? 0.0
                            : std::max(trace.records.back().primal_change,
                                       trace.records.back().spread)),
      trace_(std::move(trace)) {}

PhmState PhmInit(const DiscreteSLCP& d, double r, const Vector& x0,
                 const std::optional<std::vector<Vector>>& y0,
                 const std::optional<std::vector<Vector>>& w0) {
  if (!(r > 0.0)) throw Error(ErrorCode::kInvalidArgument, "penalty r must be > 0");
  if (x0.size() != d.n()) throw Error(ErrorCode::kDimensionMismatch, "x0 length differs from n");
  const auto K = static_cast<std::size_t>(d.K());
  PhmState s;
  s.r = r;
  s.x_bar = x0;
  s.x.assign(K, x0);
  s.y.assign(K, Vector::Zero(d.m()));
  s.w.assign(K, Vector::Zero(d.n()));
  if (y0) {
    if (y0->size() != K) throw Error(ErrorCode::kDimensionMismatch, "y0 needs one vector per cell");
    for (const Vector& v : *y0) {
      if (v.size() != d.m()) throw Error(ErrorCode::kDimensionMismatch, "y0 entry length differs from m");
    }
    s.y = *y0;
  }
  if (w0) {
    if (w0->size() != K) throw Error(ErrorCode::kDimensionMismatch, "w0 needs one vector per cell");
    for (const Vector& v : *w0) {
      if (v.size() != d.n()) throw Error(ErrorCode::kDimensionMismatch, "w0 entry length differs from n");
    }
    const double sum = InfNorm(WeightedSum(d, *w0));
    if (sum > kMultiplierTol) {
      throw Error(ErrorCode::kInvalidMultiplier,
                  "sum_i p_i w0_i must vanish, got infinity norm " + FormatDouble(sum));
    }
    s.w = *w0;
  }
  return s;
}

PhmState PhmStep(const PhmState& state, const DiscreteSLCP& d, const SolverOptions& scenario,
                 PhmRecord* record) {
  const int n = d.n();
  const int m = d.m();
  const auto K = static_cast<std::size_t>(d.K());
  const double r = state.r;
  std::vector<Vector> x_hat(K);
  std::vector<Vector> y_hat(K);
  std::vector<std::string> failure(K);
  ParallelFor(K, [&](std::size_t i) {
    const CellData& c = d.cells()[i];
    Matrix G(n + m, n + m);
    G << d.A() + r * Matrix::Identity(n, n), c.EB, c.EN, c.EM + r * Matrix::Identity(m, m);
    Vector q(n + m);
    q << d.q1() + state.w[i] - r * state.x[i], c.Eq2 - r * state.y[i];
    Vector warm(n + m);
    warm << state.x[i], state.y[i];
    try {
      const LcpSolution sol = SolveLcp(Lcp(std::move(G), std::move(q)), scenario, warm);
      x_hat[i] = sol.z.head(n);
      y_hat[i] = sol.z.tail(m);
    } catch (const Error& e) {
      failure[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < K; ++i) {
    if (!failure[i].empty()) {
      throw Error(ErrorCode::kScenarioFailure,
                  "scenario " + std::to_string(i) + " at iteration " + std::to_string(state.nu) +
                      ": " + failure[i]);
    }
  }

  PhmState next;
  next.nu = state.nu + 1;
  next.r = r;
  next.x_bar = WeightedSum(d, x_hat);
  next.x.assign(K, next.x_bar);
  next.y = std::move(y_hat);
  next.w.resize(K);
  double spread = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    next.w[i] = state.w[i] + r * (x_hat[i] - next.x_bar);
    spread = std::max(spread, InfNorm(x_hat[i] - next.x_bar));
  }
  // Remove the rounding drift of the weighted multiplier sum.
  const Vector drift = WeightedSum(d, next.w);
  for (Vector& w : next.w) w -= drift;

  if (record) {
    record->nu = next.nu;
    record->primal_change = InfNorm(next.x_bar - state.x_bar);
    record->spread = spread;
    record->residual = DiscreteResidual(d, next.x_bar, next.y);
    record->multiplier_sum = InfNorm(WeightedSum(d, next.w));
  }
  return next;
}

PhmResult PhmSolve(const DiscreteSLCP& d, const PhmOptions& opts,
                   const std::optional<Vector>& x0) {
  if (!(opts.tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "PHM tol must be > 0");
  if (opts.max_iter < 1) throw Error(ErrorCode::kInvalidArgument, "PHM max_iter must be >= 1");
  PhmState state = PhmInit(d, opts.r, x0 ? *x0 : Vector::Zero(d.n()));
  PhmTrace trace;
  for (int it = 0; it < opts.max_iter; ++it) {
    PhmRecord rec;
    state = PhmStep(state, d, opts.scenario, &rec);
    trace.records.push_back(rec);
    if (std::max(rec.primal_change, rec.spread) <= opts.tol) {
      DiscreteSolution sol;
      sol.x = state.x_bar;
      sol.y = state.y;
      sol.residual_inf = rec.residual;
      sol.iterations = state.nu;
      return PhmResult{std::move(sol), std::move(trace), std::move(state)};
    }
  }
  throw PhmNotConvergedError("PHM reached max_iter", std::move(trace));
}

}  // namespace slcp
