#pragma once

#include <cstddef>

namespace slcp::kernels::detail {

struct NearestArgs {
  int dim;
  std::size_t num_points;
  std::size_t num_centers;
  const double* points;   // SoA, stride num_points
  const double* centers;  // SoA, stride num_centers
  int* index;
  double* dist2;
};

namespace scalar {
void NearestCenter(const NearestArgs& args, std::size_t begin, std::size_t end);
double NaturalResidualMin(const double* z, const double* w, double* out, std::size_t n);
double SumAbsGatheredDiff(const double* values, const double* center_values,
                          const int* index, std::size_t n);
}  // namespace scalar

namespace avx2 {
bool Compiled();
void NearestCenter(const NearestArgs& args);
double NaturalResidualMin(const double* z, const double* w, double* out, std::size_t n);
double SumAbsGatheredDiff(const double* values, const double* center_values,
                          const int* index, std::size_t n);
}  // namespace avx2

}  // namespace slcp::kernels::detail
