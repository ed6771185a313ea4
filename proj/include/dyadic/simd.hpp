#pragma once

// Data-parallel inner loops of the estimators. Every routine has a scalar
// reference implementation plus optional AVX2 (x86-64) and NEON (AArch64)
// variants; the variant is selected once at runtime from the CPU features,
// or forced with the DYADIC_SIMD environment variable
// (auto | scalar | avx2 | neon).

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dyadic/kernels.hpp"

namespace dyadic::simd {

// Flattened view of one boundary kernel for the evaluation loops. The
// coefficient storage is borrowed from the BoundaryKernel.
struct KernelParams {
  KernelFamily family = KernelFamily::epanechnikov;
  double center = 0.0;
  double inv_h = 1.0;
  double lower = -1.0;
  double upper = 1.0;
  const double* coefficients = nullptr;
  int terms = 0;
};

KernelParams make_params(const BoundaryKernel& kernel, const KernelSpec& spec);

// Reference evaluation of k_h(s, w). All variants follow this operation
// order; they may differ only by FMA rounding.
inline double kernel_value(const KernelParams& p, double s) {
  const double u = (s - p.center) * p.inv_h;
  if (!(u >= p.lower && u <= p.upper)) return 0.0;
  double base;
  switch (p.family) {
    case KernelFamily::epanechnikov: base = 0.75 * (1.0 - u * u); break;
    case KernelFamily::triangular: base = 1.0 - std::fabs(u); break;
    default: base = 0.5; break;
  }
  double poly = p.coefficients[p.terms - 1];
  for (int j = p.terms - 2; j >= 0; --j) poly = poly * u + p.coefficients[j];
  return base * poly * p.inv_h;
}

// out[r] = k_h(s[r], w).
using EvalFn = void (*)(const KernelParams&, std::span<const double> s, std::span<double> out);
// sum_r weights[r] * k_h(s[r], w); an empty `weights` means all ones.
using SumFn = double (*)(const KernelParams&, std::span<const double> s,
                         std::span<const double> weights);
// max_r |x[r]|, 0 for an empty input.
using MaxAbsFn = double (*)(std::span<const double> x);

struct Ops {
  const char* name;
  EvalFn eval;
  SumFn sum;
  MaxAbsFn max_abs;
};

const Ops& scalar_ops();
// nullptr when the variant is not compiled in or the CPU lacks it.
const Ops* avx2_ops();
const Ops* neon_ops();

const Ops& active_ops();
// Forces a variant by name ("auto" restores CPU detection). Throws
// InputError for an unknown or unavailable variant.
void select_ops(std::string_view name);
std::vector<std::string> available_ops();

}  // namespace dyadic::simd
