#include "simd_impl.hpp"

namespace dyadic::simd {
namespace {

void eval_scalar(const KernelParams& p, std::span<const double> s, std::span<double> out) {
  for (std::size_t r = 0; r < s.size(); ++r) out[r] = kernel_value(p, s[r]);
}

double sum_scalar(const KernelParams& p, std::span<const double> s,
                  std::span<const double> weights) {
  double acc = 0.0;
  if (weights.empty()) {
    for (double v : s) acc += kernel_value(p, v);
  } else {
    for (std::size_t r = 0; r < s.size(); ++r) acc += weights[r] * kernel_value(p, s[r]);
  }
  return acc;
}

double max_abs_scalar(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::fmax(m, std::fabs(v));
  return m;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{"scalar", eval_scalar, sum_scalar, max_abs_scalar};
  return ops;
}

}  // namespace dyadic::simd
