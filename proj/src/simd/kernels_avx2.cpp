#include "rlab/simd/kernels.hpp"

#if RLAB_HAVE_AVX2_KERNELS

#include <immintrin.h>

#include <cmath>

#define RLAB_AVX2 __attribute__((target("avx2,fma")))

namespace rlab::simd::avx2 {

namespace {

RLAB_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

}  // namespace

RLAB_AVX2 double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + 4), _mm256_loadu_pd(b.data() + i + 4),
                           acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

RLAB_AVX2 void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y.data() + i);
    _mm256_storeu_pd(y.data() + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x.data() + i), vy));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

RLAB_AVX2 double max_abs(std::span<const double> x) {
  const std::size_t n = x.size();
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(x.data() + i)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
  for (; i < n; ++i) r = std::fmax(r, std::fabs(x[i]));
  return r;
}

// Counting thresholds below v is the same nearest-code rule as the scalar
// path; division keeps the normalized values bit-identical to it.
RLAB_AVX2 void bucketize(std::span<const double> x, double scale,
                         std::span<const double> thresholds, std::span<std::uint8_t> codes) {
  const std::size_t n = x.size();
  const __m256d vscale = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_div_pd(_mm256_loadu_pd(x.data() + i), vscale);
    __m256i count = _mm256_setzero_si256();
    for (double t : thresholds) {
      const __m256d lt = _mm256_cmp_pd(_mm256_set1_pd(t), v, _CMP_LT_OQ);
      count = _mm256_sub_epi64(count, _mm256_castpd_si256(lt));
    }
    alignas(32) std::int64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), count);
    for (int k = 0; k < 4; ++k) codes[i + static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(lanes[k]);
  }
  for (; i < n; ++i) {
    const double v = x[i] / scale;
    std::uint8_t code = 0;
    for (double t : thresholds) code += static_cast<std::uint8_t>(t < v);
    codes[i] = code;
  }
}

}  // namespace rlab::simd::avx2

#endif
