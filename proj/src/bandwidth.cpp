#include "dyadic/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dyadic/error.hpp"

namespace dyadic {
namespace {

double trapezoid(std::span<const double> x, std::span<const double> y) {
  double total = 0.0;
  for (std::size_t m = 1; m < x.size(); ++m) total += 0.5 * (y[m] + y[m - 1]) * (x[m] - x[m - 1]);
  return total;
}

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

}  // namespace

std::string_view to_string(BandwidthMethod method) {
  switch (method) {
    case BandwidthMethod::rule_of_thumb: return "rot";
    case BandwidthMethod::aimse: return "aimse";
    default: return "manual";
  }
}

double rot_constant(KernelFamily family) {
  switch (family) {
    case KernelFamily::epanechnikov: return 2.435;
    case KernelFamily::triangular: return 2.576;
    default: return 1.843;
  }
}

double sample_quantile(std::span<const double> sorted, double probability) {
  if (sorted.empty()) throw InputError("quantile of an empty sample");
  const double position = probability * static_cast<double>(sorted.size() - 1);
  const auto lower = static_cast<std::size_t>(std::floor(position));
  const std::size_t upper = std::min(lower + 1, sorted.size() - 1);
  const double frac = position - static_cast<double>(lower);
  return sorted[lower] + frac * (sorted[upper] - sorted[lower]);
}

BandwidthSelection rot_bandwidth(const DyadicDataset& dataset, KernelFamily family) {
  std::vector<double> values = dataset.present_values();
  if (values.size() < 2) throw DegenerateInputError("ROT bandwidth needs at least 2 present values");

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));

  std::sort(values.begin(), values.end());
  const double iqr = sample_quantile(values, 0.75) - sample_quantile(values, 0.25);
  const double spread = std::min(sd, iqr / 1.349);
  if (!(spread > 0.0)) throw DegenerateInputError("edge values have zero dispersion");

  const double nd = static_cast<double>(dataset.n());
  BandwidthSelection out;
  out.method = BandwidthMethod::rule_of_thumb;
  out.constant = rot_constant(family);
  out.effective_pairs = nd * (nd - 1.0) / 2.0;
  out.h = out.constant * spread * std::pow(out.effective_pairs, -0.2);
  return out;
}

BandwidthSelection aimse_bandwidth(std::span<const double> points, std::span<const double> density,
                                   std::span<const double> derivative,
                                   std::span<const double> weight, KernelFamily family, int order,
                                   std::size_t n) {
  const std::size_t q = points.size();
  if (q < 2 || density.size() != q || derivative.size() != q || weight.size() != q) {
    throw InputError("AIMSE curves must share a quadrature grid of at least 2 points");
  }
  if (order < 2 || order % 2 != 0) throw InputError("kernel order must be even and >= 2");
  if (n < 2) throw InputError("AIMSE bandwidth needs n >= 2");

  std::vector<double> weighted_density(q), weighted_curvature(q);
  for (std::size_t m = 0; m < q; ++m) {
    weighted_density[m] = density[m] * weight[m];
    weighted_curvature[m] = derivative[m] * derivative[m] * weight[m];
  }
  const double mass = trapezoid(points, weighted_density);
  const double curvature = trapezoid(points, weighted_curvature);
  if (!(curvature > 0.0)) {
    throw DegenerateInputError("integrated squared derivative is zero; AIMSE bandwidth undefined");
  }
  const auto kernel = interior_kernel_constants(family, order);
  const double exponent = 1.0 / (2.0 * order + 1.0);
  const double constant =
      std::pow(factorial(order) * factorial(order - 1) * mass * kernel.roughness /
                   (2.0 * curvature * kernel.moment * kernel.moment),
               exponent);
  const double nd = static_cast<double>(n);
  BandwidthSelection out;
  out.method = BandwidthMethod::aimse;
  out.constant = constant;
  out.effective_pairs = nd * (nd - 1.0) / 2.0;
  out.h = constant * std::pow(out.effective_pairs, -exponent);
  return out;
}

}  // namespace dyadic
