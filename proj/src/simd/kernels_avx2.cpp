// Compiled with -mavx2 -mfma; only called after a runtime CPU check.

#include <immintrin.h>

#include <cstdint>

#include "invbq/simd/kernels.hpp"

namespace invbq::simd::avx2 {
namespace {

// exp(x) by Cody-Waite reduction x = n ln2 + r, |r| <= ln2/2, a degree-13
// Taylor polynomial for exp(r) and a two-step 2^n scaling so that n down to
// -1075 (subnormal results) and up to 1024 stay representable. Max error
// against std::exp is about 2 ulp on normal results.
inline __m256d exp_pd(__m256d x) {
  const __m256d kHi = _mm256_set1_pd(709.79);
  const __m256d kLo = _mm256_set1_pd(-745.2);
  const __m256d kLog2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d kLn2Hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d kLn2Lo = _mm256_set1_pd(1.90821492927058770002e-10);

  const __m256d nan_mask = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  const __m256d under = _mm256_cmp_pd(x, kLo, _CMP_LT_OQ);
  const __m256d over = _mm256_cmp_pd(x, kHi, _CMP_GT_OQ);
  const __m256d xc = _mm256_min_pd(_mm256_max_pd(x, kLo), kHi);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, kLog2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, kLn2Hi, xc);
  r = _mm256_fnmadd_pd(n, kLn2Lo, r);

  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);  // 1/13!
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  const __m128i ni = _mm256_cvtpd_epi32(n);
  const __m128i n1 = _mm_srai_epi32(ni, 1);
  const __m128i n2 = _mm_sub_epi32(ni, n1);
  const __m128i bias = _mm_set1_epi32(1023);
  const __m256d s1 = _mm256_castsi256_pd(
      _mm256_slli_epi64(_mm256_cvtepi32_epi64(_mm_add_epi32(n1, bias)), 52));
  const __m256d s2 = _mm256_castsi256_pd(
      _mm256_slli_epi64(_mm256_cvtepi32_epi64(_mm_add_epi32(n2, bias)), 52));
  __m256d y = _mm256_mul_pd(_mm256_mul_pd(p, s1), s2);

  y = _mm256_blendv_pd(y, _mm256_setzero_pd(), under);
  y = _mm256_blendv_pd(y, _mm256_set1_pd(__builtin_huge_val()), over);
  return _mm256_blendv_pd(y, x, nan_mask);
}

inline __m256i tail_mask(std::size_t remaining) {
  const __m256i idx = _mm256_set_epi64x(3, 2, 1, 0);
  return _mm256_cmpgt_epi64(_mm256_set1_epi64x(static_cast<std::int64_t>(remaining)), idx);
}

}  // namespace

void exp(const double* in, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, exp_pd(_mm256_loadu_pd(in + i)));
  }
  if (i < n) {
    const __m256i mask = tail_mask(n - i);
    _mm256_maskstore_pd(out + i, mask, exp_pd(_mm256_maskload_pd(in + i, mask)));
  }
}

void sqexp_sum(const double* points, std::size_t n_points, std::size_t dim,
               const double* centers, std::size_t n_centers, double scale, double* out) {
  const __m256d vscale = _mm256_set1_pd(scale);
  for (std::size_t i = 0; i < n_points; i += 4) {
    const std::size_t remaining = n_points - i;
    const bool full = remaining >= 4;
    const __m256i mask = tail_mask(remaining);
    __m256d sum = _mm256_setzero_pd();
    for (std::size_t c = 0; c < n_centers; ++c) {
      __m256d r2 = _mm256_setzero_pd();
      for (std::size_t q = 0; q < dim; ++q) {
        const double* col = points + q * n_points + i;
        const __m256d p = full ? _mm256_loadu_pd(col) : _mm256_maskload_pd(col, mask);
        const __m256d diff = _mm256_sub_pd(p, _mm256_set1_pd(centers[c * dim + q]));
        r2 = _mm256_fmadd_pd(diff, diff, r2);
      }
      sum = _mm256_add_pd(sum, exp_pd(_mm256_mul_pd(vscale, r2)));
    }
    if (full) {
      _mm256_storeu_pd(out + i, sum);
    } else {
      _mm256_maskstore_pd(out + i, mask, sum);
    }
  }
}

}  // namespace invbq::simd::avx2
