#include <cstdlib>
#include <cstring>

#include "kernels_impl.h"
#include "slcp/kernels.h"

namespace slcp {

PointSet::PointSet(int dim, std::size_t count)
    : dim_(dim), size_(count), data_(static_cast<std::size_t>(dim) * count, 0.0) {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "point dimension must be >= 1");
}

PointSet PointSet::FromPoints(const std::vector<Vector>& points) {
  if (points.empty()) throw Error(ErrorCode::kInvalidArgument, "empty point list");
  PointSet set(static_cast<int>(points.front().size()), points.size());
  for (std::size_t j = 0; j < points.size(); ++j) set.Set(j, points[j]);
  return set;
}

void PointSet::Set(std::size_t j, const Vector& point) {
  if (point.size() != dim_) throw Error(ErrorCode::kDimensionMismatch, "point dimension mismatch");
  for (int k = 0; k < dim_; ++k) coord(k)[j] = point[k];
}

Vector PointSet::Point(std::size_t j) const {
  Vector p(dim_);
  for (int k = 0; k < dim_; ++k) p[k] = at(j, k);
  return p;
}

namespace kernels {

std::string_view ToString(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
  }
  return "unknown";
}

bool IsaAvailable(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(__x86_64__) || defined(__i386__)
      return detail::avx2::Compiled() && __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa BestIsa() {
  static const Isa best = [] {
    const char* env = std::getenv("SLCP_SIMD");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return Isa::kScalar;
    return IsaAvailable(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
  }();
  return best;
}

namespace {

Isa Resolve(Isa requested) { return IsaAvailable(requested) ? requested : Isa::kScalar; }

}  // namespace

void NearestCenter(const PointSet& points, const PointSet& centers,
                   std::span<int> index, std::span<double> dist2, Isa isa) {
  if (centers.empty()) throw Error(ErrorCode::kInvalidArgument, "no centers");
  if (points.dim() != centers.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "points and centers differ in dimension");
  }
  if (index.size() != points.size() || dist2.size() != points.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "output spans must match the point count");
  }
  if (points.empty()) return;
  const detail::NearestArgs args{points.dim(), points.size(), centers.size(),
                                 points.coord(0), centers.coord(0), index.data(),
                                 dist2.data()};
  if (Resolve(isa) == Isa::kAvx2) {
    detail::avx2::NearestCenter(args);
  } else {
    detail::scalar::NearestCenter(args, 0, points.size());
  }
}

double NaturalResidualMin(std::span<const double> z, std::span<const double> w,
                          std::span<double> out, Isa isa) {
  if (z.size() != w.size() || out.size() != z.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "natural residual operands differ in length");
  }
  if (Resolve(isa) == Isa::kAvx2) {
    return detail::avx2::NaturalResidualMin(z.data(), w.data(), out.data(), z.size());
  }
  return detail::scalar::NaturalResidualMin(z.data(), w.data(), out.data(), z.size());
}

double SumAbsGatheredDiff(std::span<const double> values,
                          std::span<const double> center_values,
                          std::span<const int> index, Isa isa) {
  if (values.size() != index.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "values and index differ in length");
  }
  for (int c : index) {
    if (c < 0 || static_cast<std::size_t>(c) >= center_values.size()) {
      throw Error(ErrorCode::kInvalidArgument, "center index out of range");
    }
  }
  if (Resolve(isa) == Isa::kAvx2) {
    return detail::avx2::SumAbsGatheredDiff(values.data(), center_values.data(), index.data(),
                                            values.size());
  }
  return detail::scalar::SumAbsGatheredDiff(values.data(), center_values.data(), index.data(),
                                            values.size());
}

}  // namespace kernels
}  // namespace slcp
