#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dyadic {

enum class KernelFamily { epanechnikov, triangular, uniform };

KernelFamily parse_kernel_family(std::string_view name);
std::string_view to_string(KernelFamily family);

// Compact inference interval [lower, upper].
struct Domain {
  double lower = -2.0;
  double upper = 2.0;

  double length() const { return upper - lower; }
  bool contains(double w) const { return w >= lower && w <= upper; }
};

struct KernelSpec {
  KernelFamily family = KernelFamily::epanechnikov;
  int order = 2;          // even, >= 2
  double bandwidth = 1.0; // in units of W
  Domain domain;

  // Throws InputError on an odd/small order, non-positive bandwidth or an
  // empty domain.
  void validate() const;
};

// k_h(s, w) = K(u) * sum_j coefficients[j] u^j / h with u = (s - w) / h,
// supported on u in [lower, upper] = ([w - h, w + h] ∩ W - w) / h.
struct BoundaryKernel {
  double center = 0.0;
  double lower = -1.0;
  double upper = 1.0;
  std::vector<double> coefficients;

  bool interior() const { return lower == -1.0 && upper == 1.0; }
};

struct LipschitzConstants {
  double lipschitz = 0.0;  // C_L: k_h(s, .) is C_L / h^2 Lipschitz
  double bound = 0.0;      // C_k = 2 C_L + 1 + 1 / Leb(W)
};

double base_kernel(KernelFamily family, double u);

// Integral of u^power K(u) over [lower, upper] ∩ [-1, 1], exact.
double base_kernel_moment(KernelFamily family, int power, double lower, double upper);

// Solves the truncated-moment system so that the kernel centred at w has
// moments (1, 0, ..., 0) up to order p - 1 on W. Coefficients are memoized
// by truncation geometry.
BoundaryKernel build_boundary_kernel(const KernelSpec& spec, double w);

double eval_kernel(const BoundaryKernel& kernel, const KernelSpec& spec, double s);

// Exact integral of (s - w)^r k_h(s, w) over W.
double kernel_moment(const BoundaryKernel& kernel, const KernelSpec& spec, int r);

// Finite-difference sweep of w -> k_h(s, w) on a grid with
// `points_per_bandwidth` steps per h. Results are cached per spec.
LipschitzConstants lipschitz_constants(const KernelSpec& spec,
                                       int points_per_bandwidth = 200);

// Constants of the interior order-p kernel over the real line:
// integral of K_p^2 and of u^p K_p.
struct InteriorKernelConstants {
  double roughness = 0.0;
  double moment = 0.0;
};
InteriorKernelConstants interior_kernel_constants(KernelFamily family, int order);

}  // namespace dyadic
