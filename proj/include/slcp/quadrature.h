#pragma once

#include <cstdint>
#include <vector>

#include "slcp/common.h"
#include "slcp/density.h"

namespace slcp {

// Gauss-Legendre rule with `order` nodes on [0, 1]; weights sum to 1.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule GaussLegendre01(int order);

// Weighted node set approximating the conditional law of a density on a cell.
struct NodeSet {
  std::vector<Vector> points;
  std::vector<double> weights;  // nonnegative, sum to 1
};

// Tensor Gauss-Legendre rule applied in probability coordinates: each axis is
// pushed through the cell's conditional quantile, so the rule integrates
// against the density restricted to the cell.
NodeSet CellGaussNodes(const Density& density, const Box& cell, int order);

// Equal-weight Monte Carlo nodes drawn from the density restricted to a cell.
NodeSet CellMonteCarloNodes(const Density& density, const Box& cell, int count,
                            Rng& rng);

// Quadrature specification for expectations over the whole support.
struct QuadratureSpec {
  enum class Kind { kGaussLegendre, kMonteCarlo };
  Kind kind = Kind::kMonteCarlo;
  int order = 8;          // Gauss-Legendre nodes per dimension (dim <= 3)
  int count = 10000;      // Monte Carlo nodes
  std::uint64_t seed = 0;
};

NodeSet SupportNodes(const Density& density, const QuadratureSpec& spec);

}  // namespace slcp
