#include <cmath>

#include "kernels_impl.h"

namespace slcp::kernels::detail::scalar {

void NearestCenter(const NearestArgs& args, std::size_t begin, std::size_t end) {
  for (std::size_t j = begin; j < end; ++j) {
    double best = INFINITY;
    int best_index = 0;
    for (std::size_t c = 0; c < args.num_centers; ++c) {
      double d = 0.0;
      for (int k = 0; k < args.dim; ++k) {
        const double diff = args.points[static_cast<std::size_t>(k) * args.num_points + j] -
                            args.centers[static_cast<std::size_t>(k) * args.num_centers + c];
        const double sq = diff * diff;
        d = d + sq;
      }
      if (d < best) {
        best = d;
        best_index = static_cast<int>(c);
      }
    }
    args.index[j] = best_index;
    args.dist2[j] = best;
  }
}

double NaturalResidualMin(const double* z, const double* w, double* out, std::size_t n) {
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // Matches the vector min: returns w unless z < w.
    const double v = z[i] < w[i] ? z[i] : w[i];
    out[i] = v;
    const double a = std::fabs(v);
    norm = a > norm ? a : norm;
  }
  return norm;
}

double SumAbsGatheredDiff(const double* values, const double* center_values,
                          const int* index, std::size_t n) {
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += std::fabs(values[j] - center_values[index[j]]);
  return sum;
}

}  // namespace slcp::kernels::detail::scalar
