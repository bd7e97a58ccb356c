#pragma once

// Partition-based discretization of a two-stage SLCP: each cell carries its
// probability and the conditional expectations of the recourse coefficients,
// and the continuous problem is replaced by one recourse vector per cell.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slcp/common.h"
#include "slcp/density.h"
#include "slcp/kernels.h"
#include "slcp/lcp.h"
#include "slcp/two_stage.h"

namespace slcp {

enum class PartitionKind { kUniformBox, kVoronoi };

std::string_view ToString(PartitionKind kind);

// Cell geometry without moments. Uniform cells are half-open [lo, hi) per
// axis with the last cell closed; Voronoi cells assign each point to its
// nearest center, lowest index on ties.
class PartitionSkeleton {
 public:
  static PartitionSkeleton Uniform(const Box& support, std::vector<int> counts);
  // Diameters are 2 * max distance from a probe to its center, over
  // `probes` uniform points plus the corners of the support.
  static PartitionSkeleton Voronoi(const Box& support, const std::vector<Vector>& centers,
                                   std::uint64_t seed = 0, int probes = 100000);

  PartitionKind kind() const { return kind_; }
  const Box& support() const { return support_; }
  int size() const { return static_cast<int>(diameters_.size()); }
  const std::vector<int>& counts() const { return counts_; }
  Vector center(int i) const { return centers_.Point(static_cast<std::size_t>(i)); }
  const PointSet& centers() const { return centers_; }
  double diameter(int i) const { return diameters_[static_cast<std::size_t>(i)]; }
  // Uniform kind only.
  Box cell_box(int i) const;

  // Cell index of xi. Throws Error(kPointOutsideSupport).
  int Locate(const Vector& xi) const;

 private:
  PartitionKind kind_ = PartitionKind::kUniformBox;
  Box support_;
  std::vector<int> counts_;
  std::vector<std::vector<double>> edges_;  // per axis, counts_[k] + 1 values
  PointSet centers_;
  std::vector<double> diameters_;
};

struct CellData {
  Vector center;
  double p = 0.0;
  Matrix EB;
  Matrix EM;
  Matrix EN;
  Vector Eq2;
  double diameter = 0.0;
  int skeleton_index = 0;
};

class Partition {
 public:
  Partition(PartitionSkeleton skeleton, std::vector<CellData> cells);

  PartitionKind kind() const { return skeleton_.kind(); }
  int K() const { return static_cast<int>(cells_.size()); }
  const std::vector<CellData>& cells() const { return cells_; }
  const PartitionSkeleton& skeleton() const { return skeleton_; }
  double max_diameter() const;

  // Index into cells() of the cell containing xi. Points of a dropped cell
  // go to the nearest remaining center.
  int Locate(const Vector& xi) const;

 private:
  PartitionSkeleton skeleton_;
  std::vector<CellData> cells_;
  std::vector<int> cell_of_skeleton_;  // -1 for dropped cells
  PointSet kept_centers_;
};

struct MomentOptions {
  enum class Method { kAutomatic, kQuadrature, kMonteCarlo };
  // Automatic uses tensor Gauss-Legendre in probability coordinates on box
  // cells of dimension <= 3 and Monte Carlo otherwise.
  Method method = Method::kAutomatic;
  int gl_order = 4;
  int mc_budget = 20000;
  int min_per_cell = 100;
  std::uint64_t seed = 0;
};

// Cell probabilities and conditional moments. Cells with zero mass are
// dropped with a warning and the remaining probabilities renormalized;
// Error(kEmptyCell) if nothing is left.
Partition ComputeCellMoments(const TwoStageProblem& prob, const PartitionSkeleton& skeleton,
                             const Density& density, const MomentOptions& opts = {});

class DiscreteSLCP {
 public:
  DiscreteSLCP(const TwoStageProblem& prob, const Partition& part);

  int n() const { return static_cast<int>(q1_.size()); }
  int m() const { return m_; }
  int K() const { return static_cast<int>(cells_.size()); }
  int stacked_size() const { return n() + K() * m(); }
  const Matrix& A() const { return A_; }
  const Vector& q1() const { return q1_; }
  const std::vector<CellData>& cells() const { return cells_; }

  // Monolithic LCP in (x, y_1, ..., y_K):
  //   [[A, p_1 EB_1, ..., p_K EB_K], [EN_i, EM_i on the diagonal]].
  // With row_scaled the rows of cell i are multiplied by p_i, which leaves
  // the solution set unchanged and keeps the matrix monotone.
  Lcp Stacked(bool row_scaled = false) const;
  Vector Pack(const Vector& x, const std::vector<Vector>& y) const;

 private:
  Matrix A_;
  Vector q1_;
  int m_ = 0;
  std::vector<CellData> cells_;
};

struct DiscreteSolution {
  Vector x;
  std::vector<Vector> y;
  double residual_inf = 0.0;
  int iterations = 0;
};

DiscreteSolution UnpackStacked(const DiscreteSLCP& d, const Vector& z);

// Infinity norm of the stacked natural residual.
double DiscreteResidual(const DiscreteSLCP& d, const Vector& x, const std::vector<Vector>& y);

// Semismooth Newton on the stacked system, eliminating each cell's recourse
// block through a Schur complement on the first stage. Falls back to the
// dense solver chain (stacked dimension <= 1500) if the block method fails.
DiscreteSolution SolveDiscreteDirect(const DiscreteSLCP& d, const SolverOptions& opts = {},
                                     const std::optional<Vector>& warm_start = std::nullopt);

// y of the cell containing xi.
Vector ReconstructPolicy(const DiscreteSolution& sol, const Partition& part, const Vector& xi);

struct ConvergenceRow {
  int K = 0;
  double max_delta = 0.0;
  double x_err = 0.0;
  double y_err_L2 = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  int reference_K = 0;
  Vector x_reference;
  // Least-squares slopes of log error against log max_delta over rows with
  // positive error (NaN when fewer than two such rows exist).
  double x_slope = 0.0;
  double y_slope = 0.0;
  std::uint64_t seed = 0;

  std::string ToCsv() const;
};

struct RefineOptions {
  PartitionKind kind = PartitionKind::kUniformBox;
  std::vector<int> schedule;
  int reference_K = 4096;
  MomentOptions moments;
  SolverOptions solver;
  std::uint64_t seed = 0;
};

// Skeleton with K cells: a uniform grid with K^(1/l) cells per axis (K must
// be a perfect l-th power) or K Voronoi centers drawn from the density.
PartitionSkeleton MakeSkeleton(PartitionKind kind, const Density& density, int K,
                               std::uint64_t seed);

// Solves the discretized problem for every K in the schedule and compares
// with the reference_K solution. The y error is the L2(P) distance between
// the piecewise-constant policy and the recourse at the reference x.
ConvergenceTable RefineStudy(const TwoStageProblem& prob, const Density& density,
                             const RefineOptions& opts);

double LogLogSlope(const std::vector<double>& delta, const std::vector<double>& err);

}  // namespace slcp
