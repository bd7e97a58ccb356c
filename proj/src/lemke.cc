#include <algorithm>
#include <cmath>

#include "lcp_internal.h"
#include "slcp/lcp.h"

namespace slcp {
namespace {

constexpr double kPivotTol = 1e-12;

// Tableau columns: w (0..m-1), z (m..2m-1), z0 (2m), rhs (2m+1).
class LemkeTableau {
 public:
  explicit LemkeTableau(const Lcp& lcp) : m_(lcp.size()), T_(m_, 2 * m_ + 2), basis_(m_) {
    T_.setZero();
    T_.leftCols(m_).setIdentity();
    T_.middleCols(m_, m_) = -lcp.M;
    T_.col(2 * m_).setConstant(-1.0);
    T_.col(2 * m_ + 1) = lcp.q;
    for (int i = 0; i < m_; ++i) basis_[static_cast<std::size_t>(i)] = i;
  }

  int z0() const { return 2 * m_; }
  int rhs() const { return 2 * m_ + 1; }

  void Pivot(int row, int col) {
    T_.row(row) /= T_(row, col);
    for (int i = 0; i < m_; ++i) {
      if (i != row && T_(i, col) != 0.0) T_.row(i) -= T_(i, col) * T_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  // Lexicographic minimum ratio test; z0 leaves whenever it ties. -1 on a ray.
  int LeavingRow(int col) const {
    std::vector<int> rows;
    double best = INFINITY;
    for (int i = 0; i < m_; ++i) {
      if (T_(i, col) > kPivotTol) {
        const double ratio = T_(i, rhs()) / T_(i, col);
        if (rows.empty() || ratio < best - 1e-12 * (1.0 + std::abs(best))) {
          best = ratio;
          rows.assign(1, i);
        } else if (ratio <= best + 1e-12 * (1.0 + std::abs(best))) {
          rows.push_back(i);
        }
      }
    }
    if (rows.empty()) return -1;
    for (int i : rows) {
      if (basis_[static_cast<std::size_t>(i)] == z0()) return i;
    }
    int pick = rows.front();
    for (std::size_t a = 1; a < rows.size(); ++a) {
      const int i = rows[a];
      for (int k = 0; k < m_; ++k) {
        const double lhs = T_(i, k) / T_(i, col);
        const double cur = T_(pick, k) / T_(pick, col);
        if (lhs < cur - 1e-14) {
          pick = i;
          break;
        }
        if (lhs > cur + 1e-14) break;
      }
    }
    return pick;
  }

  Vector Z() const {
    Vector z = Vector::Zero(m_);
    for (int i = 0; i < m_; ++i) {
      const int v = basis_[static_cast<std::size_t>(i)];
      if (v >= m_ && v < 2 * m_) z[v - m_] = T_(i, rhs());
    }
    return z;
  }

  double rhs_value(int row) const { return T_(row, rhs()); }
  int basic(int row) const { return basis_[static_cast<std::size_t>(row)]; }

 private:
  int m_;
  Matrix T_;
  std::vector<int> basis_;
};

}  // namespace

LcpSolution SolveLcpLemke(const Lcp& lcp, const SolverOptions& opts) {
  opts.Validate();
  const int m = lcp.size();
  if (m == 0 || lcp.q.minCoeff() >= 0.0) {
    return internal::Finalize(lcp, Vector::Zero(m), 0, LcpMethod::kLemke);
  }
  LemkeTableau tab(lcp);
  Eigen::Index start = 0;
  lcp.q.minCoeff(&start);
  tab.Pivot(static_cast<int>(start), tab.z0());
  int entering = static_cast<int>(start) + m;  // complement of the leaving w
  const int cap = std::max(opts.max_iter, 10 * m);
  for (int it = 1; it <= cap; ++it) {
    const int row = tab.LeavingRow(entering);
    if (row < 0) {
      Vector z = tab.Z();
      throw NotConvergedError("Lemke terminated on a secondary ray", it,
                              NaturalResidualNorm(lcp, z.cwiseMax(0.0)));
    }
    const int leaving = tab.basic(row);
    tab.Pivot(row, entering);
    if (leaving == tab.z0()) {
      Vector z = tab.Z();
      if (NaturalResidualNorm(lcp, z.cwiseMax(0.0)) > opts.tol) {
        z = internal::PolishActiveSet(lcp, z.cwiseMax(0.0), opts.tol);
      }
      LcpSolution sol = internal::Finalize(lcp, std::move(z), it, LcpMethod::kLemke);
      if (sol.residual_inf > opts.tol) {
        throw NotConvergedError("Lemke solution misses tolerance", it, sol.residual_inf);
      }
      return sol;
    }
    entering = leaving < m ? leaving + m : leaving - m;
  }
  throw NotConvergedError("Lemke reached its pivot cap", cap,
                          NaturalResidualNorm(lcp, tab.Z().cwiseMax(0.0)));
}

}  // namespace slcp
