#include "dyadic/kernels.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <tuple>

#include "dyadic/error.hpp"
#include "dyadic/simd.hpp"

namespace dyadic {
namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

// Antiderivative of u^m * (c0 + c1 u) at u.
double linear_antiderivative(int m, double c0, double c1, double u) {
  return c0 * ipow(u, m + 1) / (m + 1) + c1 * ipow(u, m + 2) / (m + 2);
}

using GeometryKey = std::tuple<int, int, double, double>;

class CoefficientMemo {
 public:
  bool find(const GeometryKey& key, std::vector<double>& out) const {
    std::shared_lock lock(mutex_);
    auto it = table_.find(key);
    if (it == table_.end()) return false;
    out = it->second;
    return true;
  }
  void insert(const GeometryKey& key, const std::vector<double>& coefficients) {
    std::unique_lock lock(mutex_);
    if (table_.size() > 65536) table_.clear();
    table_.emplace(key, coefficients);
  }

 private:
  mutable std::shared_mutex mutex_;
  std::map<GeometryKey, std::vector<double>> table_;
};

CoefficientMemo& coefficient_memo() {
  static CoefficientMemo memo;
  return memo;
}

std::vector<double> solve_moment_system(KernelFamily family, int order, double lower,
                                        double upper) {
  Eigen::MatrixXd moments(order, order);
  for (int r = 0; r < order; ++r) {
    for (int j = 0; j < order; ++j) {
      moments(r, j) = base_kernel_moment(family, r + j, lower, upper);
    }
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(order);
  rhs(0) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(moments);
  if (!lu.isInvertible() || lu.rcond() < 1e-14) {
    throw NumericalError("singular truncated-moment system for support [" +
                         std::to_string(lower) + ", " + std::to_string(upper) + "]");
  }
  Eigen::VectorXd c = lu.solve(rhs);
  c += lu.solve(rhs - moments * c);  // one refinement step
  return {c.data(), c.data() + order};
}

// Moment of u^m K(u)^2 over [-1, 1].
double squared_kernel_moment(KernelFamily family, int m) {
  if (m % 2 == 1) return 0.0;
  switch (family) {
    case KernelFamily::epanechnikov:
      // 0.5625 (1 - 2u^2 + u^4)
      return 0.5625 * 2.0 * (1.0 / (m + 1) - 2.0 / (m + 3) + 1.0 / (m + 5));
    case KernelFamily::triangular:
      // 2 * int_0^1 u^m (1 - u)^2
      return 2.0 * (1.0 / (m + 1) - 2.0 / (m + 2) + 1.0 / (m + 3));
    default:
      return 0.25 * 2.0 / (m + 1);
  }
}

}  // namespace

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "epanechnikov") return KernelFamily::epanechnikov;
  if (name == "triangular") return KernelFamily::triangular;
  if (name == "uniform") return KernelFamily::uniform;
  throw InputError("unknown kernel family '" + std::string(name) + "'");
}

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::epanechnikov: return "epanechnikov";
    case KernelFamily::triangular: return "triangular";
    default: return "uniform";
  }
}

void KernelSpec::validate() const {
  if (order < 2 || order % 2 != 0) {
    throw InputError("kernel order must be an even integer >= 2, got " + std::to_string(order));
  }
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw InputError("bandwidth must be positive and finite");
  }
  if (!(domain.upper > domain.lower) || !std::isfinite(domain.length())) {
    throw InputError("inference domain must be a finite interval with upper > lower");
  }
}

double base_kernel(KernelFamily family, double u) {
  if (!(std::fabs(u) <= 1.0)) return 0.0;
  switch (family) {
    case KernelFamily::epanechnikov: return 0.75 * (1.0 - u * u);
    case KernelFamily::triangular: return 1.0 - std::fabs(u);
    default: return 0.5;
  }
}

double base_kernel_moment(KernelFamily family, int power, double lower, double upper) {
  lower = std::max(lower, -1.0);
  upper = std::min(upper, 1.0);
  if (!(upper > lower)) return 0.0;
  const int m = power;
  switch (family) {
    case KernelFamily::epanechnikov: {
      auto f = [m](double u) { return ipow(u, m + 1) / (m + 1) - ipow(u, m + 3) / (m + 3); };
      return 0.75 * (f(upper) - f(lower));
    }
    case KernelFamily::triangular: {
      double total = 0.0;
      // (1 + u) on [-1, 0], (1 - u) on [0, 1]
      const double a = lower, b = std::min(upper, 0.0);
      if (b > a) total += linear_antiderivative(m, 1.0, 1.0, b) - linear_antiderivative(m, 1.0, 1.0, a);
      const double c = std::max(lower, 0.0), d = upper;
      if (d > c) total += linear_antiderivative(m, 1.0, -1.0, d) - linear_antiderivative(m, 1.0, -1.0, c);
      return total;
    }
    default:
      return 0.5 * (ipow(upper, m + 1) - ipow(lower, m + 1)) / (m + 1);
  }
}

BoundaryKernel build_boundary_kernel(const KernelSpec& spec, double w) {
  spec.validate();
  if (!spec.domain.contains(w)) {
    throw InputError("kernel centre " + std::to_string(w) + " lies outside the domain");
  }
  BoundaryKernel kernel;
  kernel.center = w;
  const double inv_h = 1.0 / spec.bandwidth;
  // Same arithmetic as the evaluation loops so that s = a maps to u = lower.
  kernel.lower = std::max(-1.0, (spec.domain.lower - w) * inv_h);
  kernel.upper = std::min(1.0, (spec.domain.upper - w) * inv_h);
  if (!(kernel.upper > kernel.lower)) {
    throw NumericalError("empty truncated kernel support");
  }
  const GeometryKey key{static_cast<int>(spec.family), spec.order, kernel.lower, kernel.upper};
  if (!coefficient_memo().find(key, kernel.coefficients)) {
    kernel.coefficients = solve_moment_system(spec.family, spec.order, kernel.lower, kernel.upper);
    coefficient_memo().insert(key, kernel.coefficients);
  }
  return kernel;
}

double eval_kernel(const BoundaryKernel& kernel, const KernelSpec& spec, double s) {
  return simd::kernel_value(simd::make_params(kernel, spec), s);
}

double kernel_moment(const BoundaryKernel& kernel, const KernelSpec& spec, int r) {
  if (r < 0) throw InputError("moment order must be non-negative");
  double total = 0.0;
  for (std::size_t j = 0; j < kernel.coefficients.size(); ++j) {
    total += kernel.coefficients[j] *
             base_kernel_moment(spec.family, r + static_cast<int>(j), kernel.lower, kernel.upper);
  }
  return ipow(spec.bandwidth, r) * total;
}

LipschitzConstants lipschitz_constants(const KernelSpec& spec, int points_per_bandwidth) {
  spec.validate();
  if (points_per_bandwidth < 2) throw InputError("points_per_bandwidth must be >= 2");

  using CacheKey = std::tuple<int, int, double, double, double, int>;
  static std::mutex cache_mutex;
  static std::map<CacheKey, LipschitzConstants> cache;
  const CacheKey key{static_cast<int>(spec.family), spec.order, spec.bandwidth,
                     spec.domain.lower, spec.domain.upper, points_per_bandwidth};
  {
    std::lock_guard lock(cache_mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  const double h = spec.bandwidth;
  const double a = spec.domain.lower;
  const double b = spec.domain.upper;
  const double step = h / points_per_bandwidth;
  const auto steps = static_cast<long>(std::floor(spec.domain.length() / step));

  // Interior kernels are translates of each other, so only the two boundary
  // layers and one interior window need sweeping.
  std::vector<std::pair<long, long>> windows;
  const long layer = 2 * points_per_bandwidth + 2;
  if (steps <= 3 * layer) {
    windows.emplace_back(0, steps);
  } else {
    windows.emplace_back(0, layer);
    windows.emplace_back(steps / 2 - layer / 2, steps / 2 + layer / 2);
    windows.emplace_back(steps - layer, steps);
  }

  double max_slope = 0.0;
  std::vector<double> s_grid, current, next;
  for (auto [first, last] : windows) {
    BoundaryKernel k_now = build_boundary_kernel(spec, a + first * step);
    for (long m = first; m < last; ++m) {
      const double w0 = a + m * step;
      const double w1 = std::min(b, a + (m + 1) * step);
      if (!(w1 > w0)) break;
      BoundaryKernel k_next = build_boundary_kernel(spec, w1);
      const long s_first = std::max(0L, m - points_per_bandwidth - 1);
      const long s_last = std::min(steps, m + points_per_bandwidth + 2);
      s_grid.clear();
      for (long q = s_first; q <= s_last; ++q) s_grid.push_back(a + q * step);
      current.resize(s_grid.size());
      next.resize(s_grid.size());
      const auto& ops = simd::scalar_ops();
      ops.eval(simd::make_params(k_now, spec), s_grid, current);
      ops.eval(simd::make_params(k_next, spec), s_grid, next);
      for (std::size_t q = 0; q < s_grid.size(); ++q) {
        max_slope = std::max(max_slope, std::fabs(next[q] - current[q]) / (w1 - w0));
      }
      k_now = std::move(k_next);
    }
  }

  LipschitzConstants constants;
  constants.lipschitz = h * h * max_slope;
  constants.bound = 2.0 * constants.lipschitz + 1.0 + 1.0 / spec.domain.length();
  std::lock_guard lock(cache_mutex);
  if (cache.size() > 4096) cache.clear();
  cache.emplace(key, constants);
  return constants;
}

InteriorKernelConstants interior_kernel_constants(KernelFamily family, int order) {
  KernelSpec spec;
  spec.family = family;
  spec.order = order;
  spec.bandwidth = 1.0;
  spec.domain = {-10.0, 10.0};
  const BoundaryKernel kernel = build_boundary_kernel(spec, 0.0);
  const auto& c = kernel.coefficients;
  InteriorKernelConstants out;
  for (std::size_t j = 0; j < c.size(); ++j) {
    for (std::size_t l = 0; l < c.size(); ++l) {
      out.roughness += c[j] * c[l] * squared_kernel_moment(family, static_cast<int>(j + l));
    }
    out.moment += c[j] * base_kernel_moment(family, order + static_cast<int>(j), -1.0, 1.0);
  }
  return out;
}

}  // namespace dyadic
