#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "dyadic/dataset.hpp"
#include "dyadic/kernels.hpp"

namespace dyadic {

enum class BandwidthMethod { rule_of_thumb, aimse, manual };

std::string_view to_string(BandwidthMethod method);

struct BandwidthSelection {
  double h = 0.0;
  BandwidthMethod method = BandwidthMethod::manual;
  double constant = 0.0;        // C(K) for ROT, the AIMSE constant otherwise
  double effective_pairs = 0.0; // n (n - 1) / 2
};

// Rule-of-thumb constant C(K) for second-order kernels: 2.435
// (Epanechnikov), 2.576 (triangular), 1.843 (uniform, normal reference).
double rot_constant(KernelFamily family);

// Type-7 (linear interpolation) sample quantile of sorted data.
double sample_quantile(std::span<const double> sorted, double probability);

// C(K) * min(sd, IQR / 1.349) * (n (n - 1) / 2)^(-1/5) over present values.
BandwidthSelection rot_bandwidth(const DyadicDataset& dataset, KernelFamily family);

// AIMSE-optimal bandwidth for a kernel of order p from tabulated density,
// p-th derivative and weight curves (composite trapezoid over `points`).
BandwidthSelection aimse_bandwidth(std::span<const double> points, std::span<const double> density,
                                   std::span<const double> derivative,
                                   std::span<const double> weight, KernelFamily family, int order,
                                   std::size_t n);

}  // namespace dyadic
