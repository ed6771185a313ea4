#pragma once

// Generators and independent oracles shared by the test suites. Oracles
// avoid the library's pair storage, SIMD loops and closed-form moments.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "dyadic/dataset.hpp"
#include "dyadic/estimator.hpp"
#include "dyadic/kernels.hpp"

namespace testing {

using Gen = std::mt19937_64;

inline double uniform(Gen& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline std::size_t uniform_int(Gen& g, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(g);
}

// Dataset with N(mean, sd) values and each pair missing with probability
// `missing`; at least one pair stays present.
inline dyadic::DyadicDataset random_dataset(Gen& g, std::size_t n, double missing = 0.0,
                                            double mean = 0.0, double sd = 1.0) {
  const std::size_t pairs = n * (n - 1) / 2;
  std::normal_distribution<double> normal(mean, sd);
  std::bernoulli_distribution drop(missing);
  std::vector<double> values(pairs);
  std::vector<std::uint8_t> mask(pairs);
  bool any = false;
  for (std::size_t k = 0; k < pairs; ++k) {
    values[k] = normal(g);
    mask[k] = drop(g) ? 0 : 1;
    any = any || mask[k];
  }
  if (!any) mask[0] = 1;
  return dyadic::DyadicDataset(n, std::move(values), std::move(mask));
}

// Composite Simpson rule on [lo, hi] split at every break point inside.
inline double integrate(const std::function<double(double)>& f, double lo, double hi,
                        std::vector<double> breaks = {}, int panels = 2000) {
  std::vector<double> cuts{lo};
  std::sort(breaks.begin(), breaks.end());
  for (double b : breaks) {
    if (b > lo && b < hi) cuts.push_back(b);
  }
  cuts.push_back(hi);
  double total = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c];
    const double b = cuts[c + 1];
    const double step = (b - a) / panels;
    double piece = f(a) + f(b);
    for (int k = 1; k < panels; ++k) piece += (k % 2 ? 4.0 : 2.0) * f(a + k * step);
    total += piece * step / 3.0;
  }
  return total;
}

// Integral of g(s) k_h(s, w) over the kernel support, split at w and at the
// support edges.
inline double kernel_integral(const dyadic::BoundaryKernel& kernel, const dyadic::KernelSpec& spec,
                              const std::function<double(double)>& g, int panels = 2000) {
  const double h = spec.bandwidth;
  const double lo = kernel.center + h * kernel.lower;
  const double hi = kernel.center + h * kernel.upper;
  // Endpoints are pulled inside by a negligible margin: (s - w) / h can
  // round just past the support there and the kernel would read zero.
  const double margin = 1e-13 * h;
  return integrate(
      [&](double s) {
        const double t = std::clamp(s, lo + margin, hi - margin);
        return dyadic::eval_kernel(kernel, spec, t) * g(s);
      },
      lo, hi, {kernel.center}, panels);
}

// (1 / N_present) sum over present i < j of k_h(W_ij, w), by explicit
// double loop.
inline std::vector<double> brute_fhat(const dyadic::DyadicDataset& data,
                                      const dyadic::KernelSpec& spec,
                                      const dyadic::EvaluationGrid& grid,
                                      const std::vector<double>& weights = {}) {
  std::vector<double> out(grid.size(), 0.0);
  std::size_t present = 0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::size_t j = i + 1; j < data.n(); ++j) {
      if (!data.present(i, j)) continue;
      ++present;
      const double w = weights.empty() ? 1.0 : weights[i] * weights[j];
      for (std::size_t m = 0; m < grid.size(); ++m) {
        const auto kernel = dyadic::build_boundary_kernel(spec, grid[m]);
        out[m] += w * dyadic::eval_kernel(kernel, spec, data.value(i, j));
      }
    }
  }
  for (auto& v : out) v /= static_cast<double>(present);
  return out;
}

// Dense kernel table kt[i][j][m] = (N / N_present) k_h(W_ij, w_m), zero on
// the diagonal and for missing pairs.
inline std::vector<std::vector<std::vector<double>>> kernel_table(
    const dyadic::DyadicDataset& data, const dyadic::KernelSpec& spec,
    const dyadic::EvaluationGrid& grid) {
  const std::size_t n = data.n();
  const double scale =
      static_cast<double>(data.pair_count()) / static_cast<double>(data.present_count());
  std::vector<std::vector<std::vector<double>>> kt(
      n, std::vector<std::vector<double>>(n, std::vector<double>(grid.size(), 0.0)));
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const auto kernel = dyadic::build_boundary_kernel(spec, grid[m]);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || !data.present(i, j)) continue;
        kt[i][j][m] = scale * dyadic::eval_kernel(kernel, spec, data.value(i, j));
      }
    }
  }
  return kt;
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::fabs(a[k] - b[k]));
  return worst;
}

// Random symmetric PSD matrix G G' / d plus a symmetric perturbation.
inline Eigen::MatrixXd perturbed_psd(Gen& g, Eigen::Index d, double noise) {
  Eigen::MatrixXd factor(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) factor(r, c) = uniform(g, -1.0, 1.0);
  }
  Eigen::MatrixXd m = factor * factor.transpose() / static_cast<double>(d);
  Eigen::MatrixXd e(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c <= r; ++c) e(r, c) = e(c, r) = uniform(g, -noise, noise);
  }
  return m + e;
}

}  // namespace testing
