#pragma once

// Data-parallel inner loops with a scalar reference implementation and
// SIMD variants chosen at runtime. Every variant of NearestCenter and
// NaturalResidualMin is bitwise identical to the scalar path; reductions
// (SumAbsGatheredDiff) agree to rounding.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "slcp/common.h"

namespace slcp {

// Structure-of-arrays point storage: coordinate k of point j lives at
// data[k * size + j], so one coordinate of consecutive points is contiguous.
class PointSet {
 public:
  PointSet() = default;
  PointSet(int dim, std::size_t count);
  static PointSet FromPoints(const std::vector<Vector>& points);

  int dim() const { return dim_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  double* coord(int k) { return data_.data() + static_cast<std::size_t>(k) * size_; }
  const double* coord(int k) const {
    return data_.data() + static_cast<std::size_t>(k) * size_;
  }
  double at(std::size_t j, int k) const { return coord(k)[j]; }
  void Set(std::size_t j, const Vector& point);
  Vector Point(std::size_t j) const;

 private:
  int dim_ = 0;
  std::size_t size_ = 0;
  std::vector<double> data_;
};

namespace kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view ToString(Isa isa);
bool IsaAvailable(Isa isa);
// Widest available instruction set; SLCP_SIMD=scalar forces the reference.
Isa BestIsa();

// For each point, the index of the nearest center (squared Euclidean
// distance, lowest index on ties) and that squared distance.
void NearestCenter(const PointSet& points, const PointSet& centers,
                   std::span<int> index, std::span<double> dist2,
                   Isa isa = BestIsa());

// out = min(z, w) componentwise; returns max |out|.
double NaturalResidualMin(std::span<const double> z, std::span<const double> w,
                          std::span<double> out, Isa isa = BestIsa());

// sum_j |values[j] - center_values[index[j]]|.
double SumAbsGatheredDiff(std::span<const double> values,
                          std::span<const double> center_values,
                          std::span<const int> index, Isa isa = BestIsa());

}  // namespace kernels
}  // namespace slcp
