#include "slcp/discretize.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lcp_internal.h"
#include "slcp/csv.h"
#include "slcp/parallel.h"
#include "slcp/quadrature.h"
#include "slcp/random.h"

namespace slcp {
namespace {

constexpr int kDenseFallbackLimit = 1500;

// Weighted mean of oracle values accumulated as offsets from the first node,
// so constant data reproduce the constant exactly.
struct MomentAccumulator {
  bool started = false;
  Coefficients base;
  Coefficients sum;
  double weight = 0.0;

  void Add(const Coefficients& c, double w) {
    if (!started) {
      base = c;
      sum = Coefficients{Matrix::Zero(c.B.rows(), c.B.cols()), Matrix::Zero(c.M.rows(), c.M.cols()),
                         Matrix::Zero(c.N.rows(), c.N.cols()), Vector::Zero(c.q2.size())};
      started = true;
    }
    sum.B += w * (c.B - base.B);
    sum.M += w * (c.M - base.M);
    sum.N += w * (c.N - base.N);
    sum.q2 += w * (c.q2 - base.q2);
    weight += w;
  }

  void Fill(CellData& cell) const {
    cell.EB = base.B + sum.B / weight;
    cell.EM = base.M + sum.M / weight;
    cell.EN = base.N + sum.N / weight;
    cell.Eq2 = base.q2 + sum.q2 / weight;
  }
};

std::vector<Vector> BoxCorners(const Box& box) {
  const int dim = box.dim();
  std::vector<Vector> corners;
  for (unsigned mask = 0; mask < (1u << dim); ++mask) {
    Vector c(dim);
    for (int k = 0; k < dim; ++k) c[k] = (mask >> k) & 1u ? box.hi[k] : box.lo[k];
    corners.push_back(std::move(c));
  }
  return corners;
}

// Evaluation nodes with equal weights for policy errors: a midpoint grid in
// probability coordinates for dimension 1 and 2, Monte Carlo beyond.
std::vector<Vector> PolicyErrorNodes(const Density& density, std::uint64_t seed) {
  const int dim = density.dim();
  std::vector<Vector> nodes;
  if (dim <= 2) {
    const int per_axis = dim == 1 ? 2048 : 128;
    const std::size_t total = dim == 1 ? 2048u : 128u * 128u;
    Vector unit(dim);
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rest = flat;
      for (int k = 0; k < dim; ++k) {
        unit[k] = (static_cast<double>(rest % per_axis) + 0.5) / per_axis;
        rest /= per_axis;
      }
      nodes.push_back(density.MapFromUnit(unit, density.support()));
    }
    return nodes;
  }
  Rng rng(seed, {0x59455252ULL});
  for (int j = 0; j < 10000; ++j) nodes.push_back(density.Sample(rng));
  return nodes;
}

struct StackedResidual {
  Vector wx;
  std::vector<Vector> wy;
  Vector Fx;
  std::vector<Vector> Fy;
  double merit = 0.0;  // 0.5 ||F||^2
  double inf = 0.0;
};

StackedResidual EvaluateStacked(const DiscreteSLCP& d, const Vector& x,
                                const std::vector<Vector>& y) {
  StackedResidual r;
  const auto K = static_cast<std::size_t>(d.K());
  r.wx = d.A() * x + d.q1();
  r.wy.resize(K);
  r.Fy.resize(K);
  for (std::size_t i = 0; i < K; ++i) {
    const CellData& c = d.cells()[i];
    r.wx += c.p * (c.EB * y[i]);
    r.wy[i] = c.EN * x + c.EM * y[i] + c.Eq2;
  }
  r.Fx = x.cwiseMin(r.wx);
  r.merit = 0.5 * r.Fx.squaredNorm();
  r.inf = r.Fx.size() ? r.Fx.cwiseAbs().maxCoeff() : 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    r.Fy[i] = y[i].cwiseMin(r.wy[i]);
    r.merit += 0.5 * r.Fy[i].squaredNorm();
    if (r.Fy[i].size()) r.inf = std::max(r.inf, r.Fy[i].cwiseAbs().maxCoeff());
  }
  return r;
}

// One semismooth Newton direction through the block-arrow structure.
void BlockNewtonDirection(const DiscreteSLCP& d, const Vector& x, const std::vector<Vector>& y,
                          const StackedResidual& r, Vector& dx, std::vector<Vector>& dy) {
  const int n = d.n();
  const int m = d.m();
  const auto K = static_cast<std::size_t>(d.K());
  std::vector<Matrix> G(K);
  std::vector<Vector> g(K);
  std::vector<int> singular(K, 0);
  ParallelFor(K, [&](std::size_t i) {
    const CellData& c = d.cells()[i];
    Matrix Jyy = Matrix::Identity(m, m);
    Matrix Jyx = Matrix::Zero(m, n);
    for (int j = 0; j < m; ++j) {
      if (r.wy[i][j] < y[i][j]) {
        Jyy.row(j) = c.EM.row(j);
        Jyx.row(j) = c.EN.row(j);
      }
    }
    Eigen::PartialPivLU<Matrix> lu(Jyy);
    if (!(lu.rcond() > internal::kSingularRcond)) {
      singular[i] = 1;
      return;
    }
    G[i] = lu.solve(Jyx);
    g[i] = lu.solve(r.Fy[i]);
  });
  for (std::size_t i = 0; i < K; ++i) {
    if (singular[i]) {
      throw Error(ErrorCode::kNotMonotone,
                  "singular recourse Jacobian block in cell " + std::to_string(i));
    }
  }
  Matrix S = Matrix::Identity(n, n);
  Vector rhs = -r.Fx;
  for (int j = 0; j < n; ++j) {
    if (!(r.wx[j] < x[j])) continue;
    S.row(j) = d.A().row(j);
    for (std::size_t i = 0; i < K; ++i) {
      const CellData& c = d.cells()[i];
      const auto row = c.p * c.EB.row(j);
      S.row(j) -= row * G[i];
      rhs[j] += row.dot(g[i]);
    }
  }
  Eigen::PartialPivLU<Matrix> lu(S);
  if (!(lu.rcond() > internal::kSingularRcond)) {
    throw Error(ErrorCode::kNotMonotone, "singular first-stage Schur complement");
  }
  dx = lu.solve(rhs);
  dy.resize(K);
  for (std::size_t i = 0; i < K; ++i) dy[i] = -g[i] - G[i] * dx;
}

DiscreteSolution SolveBlockNewton(const DiscreteSLCP& d, const SolverOptions& opts,
                                  Vector x, std::vector<Vector> y) {
  constexpr double kArmijo = 1e-4;
  const auto K = static_cast<std::size_t>(d.K());
  StackedResidual r = EvaluateStacked(d, x, y);
  bool polished = false;
  for (int it = 0; it <= opts.max_iter; ++it) {
    if (r.inf <= opts.tol) {
      if (!polished) {
        // One exact step on the identified active set.
        polished = true;
        Vector dx;
        std::vector<Vector> dy;
        try {
          BlockNewtonDirection(d, x, y, r, dx, dy);
          Vector xp = x + dx;
          std::vector<Vector> yp(K);
          for (std::size_t i = 0; i < K; ++i) yp[i] = y[i] + dy[i];
          const StackedResidual rp = EvaluateStacked(d, xp, yp);
          if (rp.inf <= r.inf) {
            x = std::move(xp);
            y = std::move(yp);
            r = rp;
          }
        } catch (const Error&) {
        }
      }
      x = x.cwiseMax(0.0);
      for (auto& yi : y) yi = yi.cwiseMax(0.0);
      r = EvaluateStacked(d, x, y);
      return DiscreteSolution{std::move(x), std::move(y), r.inf, it};
    }
    if (it == opts.max_iter) break;
    Vector dx;
    std::vector<Vector> dy;
    BlockNewtonDirection(d, x, y, r, dx, dy);
    double t = 1.0;
    for (;;) {
      Vector xt = x + t * dx;
      std::vector<Vector> yt(K);
      for (std::size_t i = 0; i < K; ++i) yt[i] = y[i] + t * dy[i];
      StackedResidual rt = EvaluateStacked(d, xt, yt);
      if (rt.merit <= (1.0 - 2.0 * kArmijo * t) * r.merit) {
        x = std::move(xt);
        y = std::move(yt);
        r = std::move(rt);
        break;
      }
      t *= 0.5;
      if (t < 1e-12) throw NotConvergedError("block Newton line search stagnated", it, r.inf);
    }
  }
  throw NotConvergedError("block Newton reached max_iter", opts.max_iter, r.inf);
}

}  // namespace

std::string_view ToString(PartitionKind kind) {
  switch (kind) {
    case PartitionKind::kUniformBox: return "uniform";
    case PartitionKind::kVoronoi: return "voronoi";
  }
  return "unknown";
}

PartitionSkeleton PartitionSkeleton::Uniform(const Box& support, std::vector<int> counts) {
  if (static_cast<int>(counts.size()) != support.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "one cell count per support dimension");
  }
  PartitionSkeleton s;
  s.kind_ = PartitionKind::kUniformBox;
  s.support_ = support;
  std::size_t total = 1;
  for (int k = 0; k < support.dim(); ++k) {
    const int c = counts[static_cast<std::size_t>(k)];
    if (c < 1) throw Error(ErrorCode::kInvalidArgument, "cell counts must be >= 1");
    std::vector<double> e(static_cast<std::size_t>(c) + 1);
    const double lo = support.lo[k];
    const double hi = support.hi[k];
    for (int j = 0; j < c; ++j) e[static_cast<std::size_t>(j)] = lo + (hi - lo) * j / c;
    e[static_cast<std::size_t>(c)] = hi;
    s.edges_.push_back(std::move(e));
    total *= static_cast<std::size_t>(c);
  }
  s.counts_ = std::move(counts);
  s.centers_ = PointSet(support.dim(), total);
  s.diameters_.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    const Box cell = s.cell_box(static_cast<int>(i));
    s.centers_.Set(i, cell.Center());
    s.diameters_[i] = cell.Diameter();
  }
  return s;
}

PartitionSkeleton PartitionSkeleton::Voronoi(const Box& support,
                                             const std::vector<Vector>& centers,
                                             std::uint64_t seed, int probes) {
  if (centers.empty()) throw Error(ErrorCode::kInvalidArgument, "Voronoi partition needs centers");
  if (probes < 0) throw Error(ErrorCode::kInvalidArgument, "probe count must be >= 0");
  for (std::size_t i = 0; i < centers.size(); ++i) {
    if (!support.Contains(centers[i])) {
      throw Error(ErrorCode::kPointOutsideSupport,
                  "Voronoi center " + std::to_string(i) + " lies outside the support");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (centers[i] == centers[j]) {
        throw Error(ErrorCode::kDuplicateCenters,
                    "centers " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
      }
    }
  }
  PartitionSkeleton s;
  s.kind_ = PartitionKind::kVoronoi;
  s.support_ = support;
  s.centers_ = PointSet::FromPoints(centers);

  std::vector<Vector> probe_points = BoxCorners(support);
  Rng rng(seed, {0x50524f4245ULL});
  for (int j = 0; j < probes; ++j) {
    Vector p(support.dim());
    for (int k = 0; k < support.dim(); ++k) p[k] = rng.Uniform(support.lo[k], support.hi[k]);
    probe_points.push_back(std::move(p));
  }
  const PointSet probe_set = PointSet::FromPoints(probe_points);
  std::vector<int> index(probe_set.size());
  std::vector<double> dist2(probe_set.size());
  kernels::NearestCenter(probe_set, s.centers_, index, dist2);
  std::vector<double> max2(centers.size(), 0.0);
  for (std::size_t j = 0; j < index.size(); ++j) {
    auto& v = max2[static_cast<std::size_t>(index[j])];
    v = std::max(v, dist2[j]);
  }
  s.diameters_.resize(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) s.diameters_[i] = 2.0 * std::sqrt(max2[i]);
  return s;
}

Box PartitionSkeleton::cell_box(int i) const {
  if (kind_ != PartitionKind::kUniformBox) {
    throw Error(ErrorCode::kInvalidArgument, "Voronoi cells have no box geometry");
  }
  if (i < 0 || i >= size()) throw Error(ErrorCode::kInvalidArgument, "cell index out of range");
  const int dim = support_.dim();
  Vector lo(dim);
  Vector hi(dim);
  int rest = i;
  for (int k = 0; k < dim; ++k) {
    const int c = counts_[static_cast<std::size_t>(k)];
    const auto j = static_cast<std::size_t>(rest % c);
    rest /= c;
    lo[k] = edges_[static_cast<std::size_t>(k)][j];
    hi[k] = edges_[static_cast<std::size_t>(k)][j + 1];
  }
  return Box(std::move(lo), std::move(hi));
}

int PartitionSkeleton::Locate(const Vector& xi) const {
  if (!support_.Contains(xi)) {
    throw Error(ErrorCode::kPointOutsideSupport, "point lies outside the partition support");
  }
  if (kind_ == PartitionKind::kUniformBox) {
    int flat = 0;
    int stride = 1;
    for (int k = 0; k < support_.dim(); ++k) {
      const auto& e = edges_[static_cast<std::size_t>(k)];
      const int c = counts_[static_cast<std::size_t>(k)];
      int j = static_cast<int>(std::upper_bound(e.begin(), e.end(), xi[k]) - e.begin()) - 1;
      j = std::clamp(j, 0, c - 1);
      flat += j * stride;
      stride *= c;
    }
    return flat;
  }
  const PointSet point = PointSet::FromPoints({xi});
  int index = 0;
  double dist2 = 0.0;
  kernels::NearestCenter(point, centers_, std::span<int>(&index, 1), std::span<double>(&dist2, 1));
  return index;
}

Partition::Partition(PartitionSkeleton skeleton, std::vector<CellData> cells)
    : skeleton_(std::move(skeleton)), cells_(std::move(cells)) {
  if (cells_.empty()) throw Error(ErrorCode::kEmptyCell, "partition has no cells");
  cell_of_skeleton_.assign(static_cast<std::size_t>(skeleton_.size()), -1);
  std::vector<Vector> kept;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const int s = cells_[i].skeleton_index;
    if (s < 0 || s >= skeleton_.size()) {
      throw Error(ErrorCode::kInvalidArgument, "cell refers to a missing skeleton cell");
    }
    cell_of_skeleton_[static_cast<std::size_t>(s)] = static_cast<int>(i);
    kept.push_back(cells_[i].center);
  }
  kept_centers_ = PointSet::FromPoints(kept);
}

double Partition::max_diameter() const {
  double best = 0.0;
  for (const CellData& c : cells_) best = std::max(best, c.diameter);
  return best;
}

int Partition::Locate(const Vector& xi) const {
  const int s = skeleton_.Locate(xi);
  const int i = cell_of_skeleton_[static_cast<std::size_t>(s)];
  if (i >= 0) return i;
  const PointSet point = PointSet::FromPoints({xi});
  int index = 0;
  double dist2 = 0.0;
  kernels::NearestCenter(point, kept_centers_, std::span<int>(&index, 1),
                         std::span<double>(&dist2, 1));
  return index;
}

Partition ComputeCellMoments(const TwoStageProblem& prob, const PartitionSkeleton& skeleton,
                             const Density& density, const MomentOptions& opts) {
  if (density.dim() != prob.xi_dim() || skeleton.support().dim() != prob.xi_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "density, skeleton and problem dimensions differ");
  }
  if (opts.mc_budget < 1 || opts.min_per_cell < 1 || opts.gl_order < 1) {
    throw Error(ErrorCode::kInvalidArgument, "moment budgets and orders must be >= 1");
  }
  const bool box_cells = skeleton.kind() == PartitionKind::kUniformBox;
  bool quadrature = false;
  switch (opts.method) {
    case MomentOptions::Method::kAutomatic:
      quadrature = box_cells && density.dim() <= 3;
      break;
    case MomentOptions::Method::kQuadrature:
      if (!box_cells || density.dim() > 3) {
        throw Error(ErrorCode::kInvalidArgument,
                    "quadrature moments need box cells of dimension <= 3");
      }
      quadrature = true;
      break;
    case MomentOptions::Method::kMonteCarlo:
      break;
  }

  const auto count = static_cast<std::size_t>(skeleton.size());
  std::vector<CellData> all(count);
  std::vector<int> keep(count, 1);

  if (box_cells) {
    ParallelFor(count, [&](std::size_t i) {
      const Box cell = skeleton.cell_box(static_cast<int>(i));
      CellData& data = all[i];
      data.center = cell.Center();
      data.diameter = skeleton.diameter(static_cast<int>(i));
      data.skeleton_index = static_cast<int>(i);
      data.p = density.Probability(cell);
      if (!(data.p > 0.0)) {
        keep[i] = 0;
        return;
      }
      NodeSet nodes;
      if (quadrature) {
        nodes = CellGaussNodes(density, cell, opts.gl_order);
      } else {
        const double share = std::ceil(opts.mc_budget * data.p);
        const int samples = std::max(opts.min_per_cell, static_cast<int>(share));
        Rng rng(opts.seed, {static_cast<std::uint64_t>(i)});
        nodes = CellMonteCarloNodes(density, cell, samples, rng);
      }
      MomentAccumulator acc;
      for (std::size_t j = 0; j < nodes.points.size(); ++j) {
        acc.Add(prob.At(nodes.points[j]), nodes.weights[j]);
      }
      acc.Fill(data);
    });
  } else {
    Rng rng(opts.seed, {0x564f524f4e4f49ULL});
    std::vector<Vector> samples(static_cast<std::size_t>(opts.mc_budget));
    for (auto& s : samples) s = density.Sample(rng);
    const PointSet sample_set = PointSet::FromPoints(samples);
    std::vector<int> index(samples.size());
    std::vector<double> dist2(samples.size());
    kernels::NearestCenter(sample_set, skeleton.centers(), index, dist2);
    std::vector<std::vector<std::size_t>> members(count);
    for (std::size_t j = 0; j < samples.size(); ++j) {
      members[static_cast<std::size_t>(index[j])].push_back(j);
    }
    ParallelFor(count, [&](std::size_t i) {
      CellData& data = all[i];
      data.center = skeleton.center(static_cast<int>(i));
      data.diameter = skeleton.diameter(static_cast<int>(i));
      data.skeleton_index = static_cast<int>(i);
      data.p = static_cast<double>(members[i].size()) / static_cast<double>(samples.size());
      if (members[i].empty()) {
        keep[i] = 0;
        return;
      }
      MomentAccumulator acc;
      for (std::size_t j : members[i]) acc.Add(prob.At(samples[j]), 1.0);
      acc.Fill(data);
    });
  }

  std::vector<CellData> cells;
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    if (!keep[i]) {
      Warn("cell " + std::to_string(i) + " has zero sampled mass and was dropped");
      continue;
    }
    total += all[i].p;
    cells.push_back(std::move(all[i]));
  }
  if (cells.empty()) throw Error(ErrorCode::kEmptyCell, "every cell has zero mass");
  for (CellData& c : cells) c.p /= total;
  return Partition(skeleton, std::move(cells));
}

DiscreteSLCP::DiscreteSLCP(const TwoStageProblem& prob, const Partition& part)
    : A_(prob.A()), q1_(prob.q1()), m_(prob.m()), cells_(part.cells()) {}

Lcp DiscreteSLCP::Stacked(bool row_scaled) const {
  const int n = this->n();
  const int dim = stacked_size();
  Matrix G = Matrix::Zero(dim, dim);
  Vector q(dim);
  G.topLeftCorner(n, n) = A_;
  q.head(n) = q1_;
  for (int i = 0; i < K(); ++i) {
    const CellData& c = cells_[static_cast<std::size_t>(i)];
    const int off = n + i * m_;
    const double s = row_scaled ? c.p : 1.0;
    G.block(0, off, n, m_) = c.p * c.EB;
    G.block(off, 0, m_, n) = s * c.EN;
    G.block(off, off, m_, m_) = s * c.EM;
    q.segment(off, m_) = s * c.Eq2;
  }
  return Lcp(std::move(G), std::move(q));
}

Vector DiscreteSLCP::Pack(const Vector& x, const std::vector<Vector>& y) const {
  if (x.size() != n() || static_cast<int>(y.size()) != K()) {
    throw Error(ErrorCode::kDimensionMismatch, "stacked point has the wrong shape");
  }
  Vector z(stacked_size());
  z.head(n()) = x;
  for (int i = 0; i < K(); ++i) {
    if (y[static_cast<std::size_t>(i)].size() != m_) {
      throw Error(ErrorCode::kDimensionMismatch, "recourse vector has the wrong length");
    }
    z.segment(n() + i * m_, m_) = y[static_cast<std::size_t>(i)];
  }
  return z;
}

DiscreteSolution UnpackStacked(const DiscreteSLCP& d, const Vector& z) {
  if (z.size() != d.stacked_size()) {
    throw Error(ErrorCode::kDimensionMismatch, "stacked vector has the wrong length");
  }
  DiscreteSolution sol;
  sol.x = z.head(d.n());
  for (int i = 0; i < d.K(); ++i) sol.y.push_back(z.segment(d.n() + i * d.m(), d.m()));
  sol.residual_inf = DiscreteResidual(d, sol.x, sol.y);
  return sol;
}

double DiscreteResidual(const DiscreteSLCP& d, const Vector& x, const std::vector<Vector>& y) {
  if (x.size() != d.n() || static_cast<int>(y.size()) != d.K()) {
    throw Error(ErrorCode::kDimensionMismatch, "discrete point has the wrong shape");
  }
  return EvaluateStacked(d, x, y).inf;
}

DiscreteSolution SolveDiscreteDirect(const DiscreteSLCP& d, const SolverOptions& opts,
                                     const std::optional<Vector>& warm_start) {
  opts.Validate();
  Vector x0 = Vector::Zero(d.n());
  std::vector<Vector> y0(static_cast<std::size_t>(d.K()), Vector::Zero(d.m()));
  if (warm_start) {
    const DiscreteSolution w = UnpackStacked(d, *warm_start);
    x0 = w.x;
    y0 = w.y;
  }
  try {
    return SolveBlockNewton(d, opts, x0, y0);
  } catch (const Error& e) {
    if (!opts.fallback || d.stacked_size() > kDenseFallbackLimit) throw;
    Warn(std::string("block Newton failed, using the dense solver chain: ") + e.what());
  }
  const LcpSolution sol = SolveLcp(d.Stacked(true), opts, d.Pack(x0, y0));
  DiscreteSolution out = UnpackStacked(d, sol.z);
  out.iterations = sol.iterations;
  if (out.residual_inf > opts.tol) {
    throw NotConvergedError("stacked residual above tolerance after rescaling", sol.iterations,
                            out.residual_inf);
  }
  return out;
}

Vector ReconstructPolicy(const DiscreteSolution& sol, const Partition& part, const Vector& xi) {
  if (static_cast<int>(sol.y.size()) != part.K()) {
    throw Error(ErrorCode::kDimensionMismatch, "solution and partition differ in K");
  }
  return sol.y[static_cast<std::size_t>(part.Locate(xi))];
}

std::string ConvergenceTable::ToCsv() const {
  std::string out = CsvRecord({"K", "max_delta", "x_err", "y_err_L2", "seed"});
  for (const ConvergenceRow& r : rows) {
    out += CsvRecord({std::to_string(r.K), FormatDouble(r.max_delta), FormatDouble(r.x_err),
                      FormatDouble(r.y_err_L2), std::to_string(seed)});
  }
  return out;
}

PartitionSkeleton MakeSkeleton(PartitionKind kind, const Density& density, int K,
                               std::uint64_t seed) {
  if (K < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  const int dim = density.dim();
  if (kind == PartitionKind::kUniformBox) {
    const int per_axis = static_cast<int>(std::lround(std::pow(K, 1.0 / dim)));
    long long total = 1;
    for (int k = 0; k < dim; ++k) total *= per_axis;
    if (total != K) {
      throw Error(ErrorCode::kInvalidArgument,
                  "uniform partitions need K to be a perfect power of the dimension");
    }
    return PartitionSkeleton::Uniform(density.support(),
                                      std::vector<int>(static_cast<std::size_t>(dim), per_axis));
  }
  Rng rng(seed, {0x43454e54ULL, static_cast<std::uint64_t>(K)});
  std::vector<Vector> centers;
  for (int i = 0; i < K; ++i) centers.push_back(density.Sample(rng));
  return PartitionSkeleton::Voronoi(density.support(), centers, seed);
}

double LogLogSlope(const std::vector<double>& delta, const std::vector<double>& err) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < std::min(delta.size(), err.size()); ++i) {
    if (delta[i] > 0.0 && err[i] > 0.0) {
      lx.push_back(std::log(delta[i]));
      ly.push_back(std::log(err[i]));
    }
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

ConvergenceTable RefineStudy(const TwoStageProblem& prob, const Density& density,
                             const RefineOptions& opts) {
  if (opts.schedule.empty()) throw Error(ErrorCode::kInvalidArgument, "refine needs a K schedule");
  for (std::size_t i = 0; i < opts.schedule.size(); ++i) {
    if (opts.schedule[i] < 1 || (i && opts.schedule[i] <= opts.schedule[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "K schedule must be positive and ascending");
    }
  }
  if (opts.reference_K <= opts.schedule.back()) {
    throw Error(ErrorCode::kInvalidArgument, "reference K must exceed the schedule");
  }
  struct Run {
    Partition part;
    DiscreteSolution sol;
  };
  auto solve = [&](int K) {
    const PartitionSkeleton skeleton = MakeSkeleton(opts.kind, density, K, opts.seed);
    MomentOptions mo = opts.moments;
    mo.seed = opts.seed;
    Partition part = ComputeCellMoments(prob, skeleton, density, mo);
    DiscreteSolution sol = SolveDiscreteDirect(DiscreteSLCP(prob, part), opts.solver);
    return Run{std::move(part), std::move(sol)};
  };

  ConvergenceTable table;
  table.reference_K = opts.reference_K;
  table.seed = opts.seed;
  table.x_reference = solve(opts.reference_K).sol.x;

  const std::vector<Vector> nodes = PolicyErrorNodes(density, opts.seed);
  std::vector<Vector> y_true(nodes.size());
  ParallelFor(nodes.size(), [&](std::size_t j) {
    y_true[j] = SecondStageY(prob, table.x_reference, nodes[j], opts.solver);
  });

  std::vector<double> deltas;
  std::vector<double> x_errs;
  std::vector<double> y_errs;
  for (int K : opts.schedule) {
    const Run run = solve(K);
    ConvergenceRow row;
    row.K = K;
    row.max_delta = run.part.max_diameter();
    row.x_err = (run.sol.x - table.x_reference).norm();
    std::vector<double> sq(nodes.size());
    ParallelFor(nodes.size(), [&](std::size_t j) {
      sq[j] = (ReconstructPolicy(run.sol, run.part, nodes[j]) - y_true[j]).squaredNorm();
    });
    double sum = 0.0;
    for (double v : sq) sum += v;
    row.y_err_L2 = std::sqrt(sum / static_cast<double>(nodes.size()));
    table.rows.push_back(row);
    deltas.push_back(row.max_delta);
    x_errs.push_back(row.x_err);
    y_errs.push_back(row.y_err_L2);
  }
  table.x_slope = LogLogSlope(deltas, x_errs);
  table.y_slope = LogLogSlope(deltas, y_errs);
  return table;
}

}  // namespace slcp
