#include "simd_impl.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

#define DYADIC_AVX2 __attribute__((target("avx2,fma")))

namespace dyadic::simd {
namespace {

struct Lanes {
  __m256d center, inv_h, lower, upper;
};

DYADIC_AVX2 inline Lanes broadcast(const KernelParams& p) {
  return {_mm256_set1_pd(p.center), _mm256_set1_pd(p.inv_h), _mm256_set1_pd(p.lower),
          _mm256_set1_pd(p.upper)};
}

DYADIC_AVX2 inline __m256d kernel4(const KernelParams& p, const Lanes& l, __m256d s) {
  const __m256d u = _mm256_mul_pd(_mm256_sub_pd(s, l.center), l.inv_h);
  const __m256d inside = _mm256_and_pd(_mm256_cmp_pd(u, l.lower, _CMP_GE_OQ),
                                       _mm256_cmp_pd(u, l.upper, _CMP_LE_OQ));
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d base;
  switch (p.family) {
    case KernelFamily::epanechnikov:
      base = _mm256_mul_pd(_mm256_set1_pd(0.75), _mm256_sub_pd(one, _mm256_mul_pd(u, u)));
      break;
    case KernelFamily::triangular:
      base = _mm256_sub_pd(one, _mm256_andnot_pd(_mm256_set1_pd(-0.0), u));
      break;
    default:
      base = _mm256_set1_pd(0.5);
      break;
  }
  __m256d poly = _mm256_set1_pd(p.coefficients[p.terms - 1]);
  for (int j = p.terms - 2; j >= 0; --j) {
    poly = _mm256_fmadd_pd(poly, u, _mm256_set1_pd(p.coefficients[j]));
  }
  const __m256d value = _mm256_mul_pd(_mm256_mul_pd(base, poly), l.inv_h);
  return _mm256_and_pd(value, inside);
}

DYADIC_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

DYADIC_AVX2 void eval_avx2(const KernelParams& p, std::span<const double> s,
                           std::span<double> out) {
  const Lanes l = broadcast(p);
  const std::size_t n = s.size();
  std::size_t r = 0;
  for (; r + 4 <= n; r += 4) {
    _mm256_storeu_pd(out.data() + r, kernel4(p, l, _mm256_loadu_pd(s.data() + r)));
  }
  for (; r < n; ++r) out[r] = kernel_value(p, s[r]);
}

DYADIC_AVX2 double sum_avx2(const KernelParams& p, std::span<const double> s,
                            std::span<const double> weights) {
  const Lanes l = broadcast(p);
  const std::size_t n = s.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t r = 0;
  if (weights.empty()) {
    for (; r + 4 <= n; r += 4) {
      acc = _mm256_add_pd(acc, kernel4(p, l, _mm256_loadu_pd(s.data() + r)));
    }
  } else {
    for (; r + 4 <= n; r += 4) {
      acc = _mm256_fmadd_pd(kernel4(p, l, _mm256_loadu_pd(s.data() + r)),
                            _mm256_loadu_pd(weights.data() + r), acc);
    }
  }
  double total = hsum(acc);
  for (; r < n; ++r) {
    total += (weights.empty() ? 1.0 : weights[r]) * kernel_value(p, s[r]);
  }
  return total;
}

DYADIC_AVX2 double max_abs_avx2(std::span<const double> x) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t r = 0;
  for (; r + 4 <= x.size(); r += 4) {
    m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(x.data() + r)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double best = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
  for (; r < x.size(); ++r) best = std::fmax(best, std::fabs(x[r]));
  return best;
}

}  // namespace

const Ops* detail::avx2_compiled() {
  static const Ops ops{"avx2", eval_avx2, sum_avx2, max_abs_avx2};
  return &ops;
}

}  // namespace dyadic::simd

#else

namespace dyadic::simd {
const Ops* detail::avx2_compiled() { return nullptr; }
}  // namespace dyadic::simd

#endif
