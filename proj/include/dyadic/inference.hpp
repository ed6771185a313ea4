#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dyadic/bandwidth.hpp"
#include "dyadic/covariance.hpp"
#include "dyadic/dataset.hpp"
#include "dyadic/estimator.hpp"
#include "dyadic/kernels.hpp"

namespace dyadic {

struct UniformBand {
  EvaluationGrid grid;
  std::vector<double> center;
  std::vector<double> halfwidth;
  std::vector<double> se;  // sqrt(Sigma+(w, w))
  // Grid points whose variance vanished; they carry zero halfwidth and are
  // left out of the supremum.
  std::vector<std::uint8_t> zero_variance;
  double q_hat = 0.0;
  double alpha = 0.05;
  std::size_t draws = 0;

  double lower(std::size_t m) const { return center[m] - halfwidth[m]; }
  double upper(std::size_t m) const { return center[m] + halfwidth[m]; }
  // True when every grid value of `truth` lies inside the band.
  bool covers(std::span<const double> truth) const;
  double average_width() const;
};

// Robust bias correction settings: bandwidth from an order-p kernel,
// estimation and inference with an order-p_prime kernel.
struct RbcConfig {
  int p = 2;
  int p_prime = 4;
  double alpha = 0.05;
  std::size_t draws = 10000;
  std::size_t grid_size = 100;
  KernelFamily family = KernelFamily::epanechnikov;
  Domain domain;
  PsdOptions psd;

  void validate() const;
};

// Maxima of |Z| over the grid for B draws of the centred Gaussian vector
// with the correlation matrix of Sigma+. Draws come in fixed blocks, each
// with its own (seed, block) substream.
struct SupDraws {
  std::vector<double> maxima;
  std::vector<std::uint8_t> zero_variance;
};

SupDraws draw_sup_statistics(const PsdCovMatrix& psd, std::size_t draws, std::uint64_t seed);

// Smallest q with #{r : maxima[r] <= q} >= B (1 - alpha).
double quantile_from_draws(std::span<const double> maxima, double alpha);

double gaussian_quantile(const PsdCovMatrix& psd, double alpha, std::size_t draws,
                         std::uint64_t seed);

UniformBand uniform_band(const DensityEstimate& center, const PsdCovMatrix& psd, double q_hat,
                         double alpha = 0.05, std::size_t draws = 0);

// Per-point intervals center +- Phi^{-1}(1 - alpha / 2) se.
UniformBand pointwise_intervals(const DensityEstimate& center, const PsdCovMatrix& psd,
                                double alpha);

struct BandResult {
  DensityEstimate estimate;
  CovMatrix raw_covariance;
  PsdCovMatrix covariance;
  UniformBand band;
};

// Estimate, covariance, projection, quantile and band for one kernel.
BandResult band_with_kernel(const DyadicDataset& dataset, const KernelSpec& spec,
                            const EvaluationGrid& grid, double alpha, std::size_t draws,
                            std::uint64_t seed, const PsdOptions& psd = {});

struct RbcResult : BandResult {
  BandwidthSelection bandwidth;
};

// ROT bandwidth, then the whole band with the order-p_prime kernel at that
// bandwidth.
RbcResult rbc_band(const DyadicDataset& dataset, const RbcConfig& config, std::uint64_t seed);

enum class TauNorm { l2, sup };

TauNorm parse_tau_norm(std::string_view name);
std::string_view to_string(TauNorm norm);

struct TwoSampleResult {
  double tau = 0.0;
  TauNorm norm = TauNorm::sup;
  double critical_value = 0.0;
  bool reject = false;
  double alpha = 0.05;
  double bandwidth0 = 0.0;
  double bandwidth1 = 0.0;
};

// tau_2 = (sum_m diff^2 dw)^(1/2) or tau_inf = max_m |diff|.
double tau_statistic(std::span<const double> difference, TauNorm norm, double spacing);

// Density equality test. Each sample gets its own RBC bandwidth; the
// critical value is the (1 - alpha) quantile of tau over independent
// N(0, Sigma+^0) - N(0, Sigma+^1) draws.
TwoSampleResult two_sample_test(const DyadicDataset& data0, const DyadicDataset& data1,
                                TauNorm norm, const RbcConfig& config, std::uint64_t seed);

}  // namespace dyadic
