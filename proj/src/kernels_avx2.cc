#include "kernels_impl.h"

#if defined(__AVX2__)
#include <immintrin.h>

#include <cmath>
#endif

namespace slcp::kernels::detail::avx2 {

#if defined(__AVX2__)

bool Compiled() { return true; }

void NearestCenter(const NearestArgs& args) {
  const std::size_t n = args.num_points;
  const std::size_t full = n - n % 4;
  for (std::size_t j = 0; j < full; j += 4) {
    __m256d best = _mm256_set1_pd(INFINITY);
    __m256d best_index = _mm256_setzero_pd();
    for (std::size_t c = 0; c < args.num_centers; ++c) {
      __m256d d = _mm256_setzero_pd();
      for (int k = 0; k < args.dim; ++k) {
        const __m256d p = _mm256_loadu_pd(args.points + static_cast<std::size_t>(k) * n + j);
        const __m256d q = _mm256_set1_pd(
            args.centers[static_cast<std::size_t>(k) * args.num_centers + c]);
        const __m256d diff = _mm256_sub_pd(p, q);
        // Separate multiply and add: same rounding as the scalar loop.
        d = _mm256_add_pd(d, _mm256_mul_pd(diff, diff));
      }
      const __m256d closer = _mm256_cmp_pd(d, best, _CMP_LT_OQ);
      best = _mm256_blendv_pd(best, d, closer);
      best_index = _mm256_blendv_pd(best_index, _mm256_set1_pd(static_cast<double>(c)), closer);
    }
    alignas(32) double idx[4];
    _mm256_store_pd(idx, best_index);
    _mm256_storeu_pd(args.dist2 + j, best);
    for (int l = 0; l < 4; ++l) args.index[j + static_cast<std::size_t>(l)] = static_cast<int>(idx[l]);
  }
  scalar::NearestCenter(args, full, n);
}

double NaturalResidualMin(const double* z, const double* w, double* out, std::size_t n) {
  const std::size_t full = n - n % 4;
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d norm = _mm256_setzero_pd();
  for (std::size_t i = 0; i < full; i += 4) {
    const __m256d a = _mm256_loadu_pd(z + i);
    const __m256d b = _mm256_loadu_pd(w + i);
    // _mm256_min_pd returns the second operand unless a < b.
    const __m256d v = _mm256_min_pd(a, b);
    _mm256_storeu_pd(out + i, v);
    norm = _mm256_max_pd(norm, _mm256_andnot_pd(sign_mask, v));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, norm);
  double result = lanes[0];
  for (int l = 1; l < 4; ++l) result = lanes[l] > result ? lanes[l] : result;
  const double tail = scalar::NaturalResidualMin(z + full, w + full, out + full, n - full);
  return tail > result ? tail : result;
}

double SumAbsGatheredDiff(const double* values, const double* center_values,
                          const int* index, std::size_t n) {
  const std::size_t full = n - n % 4;
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t j = 0; j < full; j += 4) {
    const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(index + j));
    const __m256d c = _mm256_i32gather_pd(center_values, idx, 8);
    const __m256d v = _mm256_loadu_pd(values + j);
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, _mm256_sub_pd(v, c)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  const double head = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  return head + scalar::SumAbsGatheredDiff(values + full, center_values, index + full, n - full);
}

#else

bool Compiled() { return false; }
void NearestCenter(const NearestArgs& args) { scalar::NearestCenter(args, 0, args.num_points); }
double NaturalResidualMin(const double* z, const double* w, double* out, std::size_t n) {
  return scalar::NaturalResidualMin(z, w, out, n);
}
double SumAbsGatheredDiff(const double* values, const double* center_values,
                          const int* index, std::size_t n) {
  return scalar::SumAbsGatheredDiff(values, center_values, index, n);
}

#endif

}  // namespace slcp::kernels::detail::avx2
