#include "slcp/quadrature.h"

#include <cmath>
#include <numbers>

namespace slcp {

GaussRule GaussLegendre01(int order) {
  if (order < 1) throw Error(ErrorCode::kInvalidArgument, "quadrature order must be >= 1");
  GaussRule rule;
  if (order == 1) {
    rule.nodes = {0.5};
    rule.weights = {1.0};
    return rule;
  }
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton iteration on P_order; the i-th root from the top.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // x is descending in i; store ascending on [0, 1].
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(order - 1 - i);
    rule.nodes[lo] = 0.5 * (1.0 - x);
    rule.nodes[hi] = 0.5 * (1.0 + x);
    rule.weights[lo] = 0.5 * w;
    rule.weights[hi] = 0.5 * w;
  }
  return rule;
}

NodeSet CellGaussNodes(const Density& density, const Box& cell, int order) {
  const int dim = density.dim();
  if (cell.dim() != dim) throw Error(ErrorCode::kDimensionMismatch, "cell and density dimension differ");
  const GaussRule rule = GaussLegendre01(order);
  std::size_t total = 1;
  for (int k = 0; k < dim; ++k) total *= rule.nodes.size();

  NodeSet out;
  out.points.reserve(total);
  out.weights.reserve(total);
  std::vector<std::size_t> digit(static_cast<std::size_t>(dim), 0);
  Vector unit(dim);
  for (std::size_t flat = 0; flat < total; ++flat) {
    double w = 1.0;
    for (int k = 0; k < dim; ++k) {
      unit[k] = rule.nodes[digit[static_cast<std::size_t>(k)]];
      w *= rule.weights[digit[static_cast<std::size_t>(k)]];
    }
    out.points.push_back(density.MapFromUnit(unit, cell));
    out.weights.push_back(w);
    for (int k = 0; k < dim; ++k) {
      auto& d = digit[static_cast<std::size_t>(k)];
      if (++d < rule.nodes.size()) break;
      d = 0;
    }
  }
  return out;
}

NodeSet CellMonteCarloNodes(const Density& density, const Box& cell, int count,
                            Rng& rng) {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "Monte Carlo count must be >= 1");
  NodeSet out;
  out.points.reserve(static_cast<std::size_t>(count));
  out.weights.assign(static_cast<std::size_t>(count), 1.0 / count);
  for (int j = 0; j < count; ++j) out.points.push_back(density.SampleIn(rng, cell));
  return out;
}

NodeSet SupportNodes(const Density& density, const QuadratureSpec& spec) {
  if (spec.kind == QuadratureSpec::Kind::kGaussLegendre) {
    if (density.dim() > 3) {
      throw Error(ErrorCode::kInvalidArgument,
                  "tensor Gauss-Legendre is limited to dimension <= 3");
    }
    return CellGaussNodes(density, density.support(), spec.order);
  }
  Rng rng(spec.seed, {0x5155414455ull});
  return CellMonteCarloNodes(density, density.support(), spec.count, rng);
}

}  // namespace slcp
