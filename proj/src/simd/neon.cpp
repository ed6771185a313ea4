#include "simd_impl.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace dyadic::simd {
namespace {

inline float64x2_t kernel2(const KernelParams& p, float64x2_t s) {
  const float64x2_t u = vmulq_f64(vsubq_f64(s, vdupq_n_f64(p.center)), vdupq_n_f64(p.inv_h));
  const uint64x2_t inside =
      vandq_u64(vcgeq_f64(u, vdupq_n_f64(p.lower)), vcleq_f64(u, vdupq_n_f64(p.upper)));
  const float64x2_t one = vdupq_n_f64(1.0);
  float64x2_t base;
  switch (p.family) {
    case KernelFamily::epanechnikov:
      base = vmulq_f64(vdupq_n_f64(0.75), vsubq_f64(one, vmulq_f64(u, u)));
      break;
    case KernelFamily::triangular:
      base = vsubq_f64(one, vabsq_f64(u));
      break;
    default:
      base = vdupq_n_f64(0.5);
      break;
  }
  float64x2_t poly = vdupq_n_f64(p.coefficients[p.terms - 1]);
  for (int j = p.terms - 2; j >= 0; --j) {
    poly = vfmaq_f64(vdupq_n_f64(p.coefficients[j]), poly, u);
  }
  const float64x2_t value = vmulq_f64(vmulq_f64(base, poly), vdupq_n_f64(p.inv_h));
  return vreinterpretq_f64_u64(vandq_u64(vreinterpretq_u64_f64(value), inside));
}

void eval_neon(const KernelParams& p, std::span<const double> s, std::span<double> out) {
  std::size_t r = 0;
  for (; r + 2 <= s.size(); r += 2) vst1q_f64(out.data() + r, kernel2(p, vld1q_f64(s.data() + r)));
  for (; r < s.size(); ++r) out[r] = kernel_value(p, s[r]);
}

double sum_neon(const KernelParams& p, std::span<const double> s,
                std::span<const double> weights) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t r = 0;
  if (weights.empty()) {
    for (; r + 2 <= s.size(); r += 2) acc = vaddq_f64(acc, kernel2(p, vld1q_f64(s.data() + r)));
  } else {
    for (; r + 2 <= s.size(); r += 2) {
      acc = vfmaq_f64(acc, kernel2(p, vld1q_f64(s.data() + r)), vld1q_f64(weights.data() + r));
    }
  }
  double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; r < s.size(); ++r) total += (weights.empty() ? 1.0 : weights[r]) * kernel_value(p, s[r]);
  return total;
}

double max_abs_neon(std::span<const double> x) {
  float64x2_t m = vdupq_n_f64(0.0);
  std::size_t r = 0;
  for (; r + 2 <= x.size(); r += 2) m = vmaxq_f64(m, vabsq_f64(vld1q_f64(x.data() + r)));
  double best = std::fmax(vgetq_lane_f64(m, 0), vgetq_lane_f64(m, 1));
  for (; r < x.size(); ++r) best = std::fmax(best, std::fabs(x[r]));
  return best;
}

}  // namespace

const Ops* detail::neon_compiled() {
  static const Ops ops{"neon", eval_neon, sum_neon, max_abs_neon};
  return &ops;
}

}  // namespace dyadic::simd

#else

namespace dyadic::simd {
const Ops* detail::neon_compiled() { return nullptr; }
}  // namespace dyadic::simd

#endif
