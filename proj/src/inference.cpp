#include "dyadic/inference.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <random>

#include "dyadic/error.hpp"
#include "dyadic/parallel.hpp"
#include "dyadic/random.hpp"
#include "dyadic/simd.hpp"

namespace dyadic {
namespace {

constexpr std::size_t kDrawsPerBlock = 256;
constexpr std::size_t kMinDraws = 100;
// Diagonal entries at or below this fraction of the largest one count as
// zero variance.
constexpr double kZeroVarianceRatio = 1e-12;

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
}

void require_draws(std::size_t draws) {
  if (draws < kMinDraws) throw InputError("at least 100 resamples are required");
}

std::vector<std::uint8_t> zero_variance_flags(const Eigen::MatrixXd& m) {
  const auto d = m.rows();
  const double top = m.diagonal().maxCoeff();
  if (!(top > 0.0)) throw DegenerateInputError("covariance vanishes at every grid point");
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(d));
  for (Eigen::Index k = 0; k < d; ++k) {
    flags[static_cast<std::size_t>(k)] = m(k, k) <= kZeroVarianceRatio * top ? 1 : 0;
  }
  return flags;
}

std::vector<Eigen::Index> kept_indices(const std::vector<std::uint8_t>& flags) {
  std::vector<Eigen::Index> kept;
  for (std::size_t k = 0; k < flags.size(); ++k) {
    if (!flags[k]) kept.push_back(static_cast<Eigen::Index>(k));
  }
  return kept;
}

// Q sqrt(max(Lambda, 0)) for a symmetric matrix whose negative eigenvalues
// must stay within the PSD tolerance.
Eigen::MatrixXd psd_square_root(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const auto& values = eig.eigenvalues();
  const double scale = values.cwiseAbs().maxCoeff();
  if (values.minCoeff() < -psd_tolerance(scale)) {
    throw NumericalError("covariance is not positive semidefinite after projection");
  }
  return eig.eigenvectors() * values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

// Fills `block` (rows x count) with i.i.d. N(0, 1) from one substream.
void standard_normals(Eigen::MatrixXd& block, Eigen::Index count, std::uint64_t seed,
                      std::uint64_t index) {
  auto rng = substream(seed, index);
  std::normal_distribution<double> normal;
  for (Eigen::Index c = 0; c < count; ++c) {
    for (Eigen::Index r = 0; r < block.rows(); ++r) block(r, c) = normal(rng);
  }
}

std::size_t block_count(std::size_t draws) {
  return (draws + kDrawsPerBlock - 1) / kDrawsPerBlock;
}

std::size_t block_size(std::size_t draws, std::size_t b) {
  return std::min(kDrawsPerBlock, draws - b * kDrawsPerBlock);
}

void require_same_grid(const EvaluationGrid& a, const EvaluationGrid& b) {
  if (!(a == b)) throw InputError("estimate and covariance use different grids");
}

UniformBand make_band(const DensityEstimate& center, const PsdCovMatrix& psd, double multiplier,
                      double alpha, std::size_t draws) {
  require_same_grid(center.grid, psd.grid);
  const std::size_t d = center.grid.size();
  UniformBand band{center.grid, center.values, std::vector<double>(d), std::vector<double>(d),
                   zero_variance_flags(psd.entries), multiplier, alpha, draws};
  for (std::size_t m = 0; m < d; ++m) {
    const auto k = static_cast<Eigen::Index>(m);
    band.se[m] = band.zero_variance[m] ? 0.0 : std::sqrt(std::max(psd.entries(k, k), 0.0));
    band.halfwidth[m] = multiplier * band.se[m];
  }
  return band;
}

}  // namespace

bool UniformBand::covers(std::span<const double> truth) const {
  if (truth.size() != center.size()) throw InputError("truth has the wrong grid size");
  for (std::size_t m = 0; m < truth.size(); ++m) {
    if (truth[m] < lower(m) || truth[m] > upper(m)) return false;
  }
  return true;
}

double UniformBand::average_width() const {
  double total = 0.0;
  for (double h : halfwidth) total += 2.0 * h;
  return total / static_cast<double>(halfwidth.size());
}

void RbcConfig::validate() const {
  if (p < 2 || p % 2 != 0 || p_prime % 2 != 0) {
    throw InputError("kernel orders must be even and at least 2");
  }
  if (p_prime <= p) throw InputError("inference order p' must exceed the selection order p");
  require_alpha(alpha);
  require_draws(draws);
  if (grid_size == 0) throw InputError("grid size must be positive");
  if (!(domain.upper > domain.lower)) throw InputError("invalid inference domain");
}

SupDraws draw_sup_statistics(const PsdCovMatrix& psd, std::size_t draws, std::uint64_t seed) {
  require_draws(draws);
  SupDraws result;
  result.zero_variance = zero_variance_flags(psd.entries);
  const auto kept = kept_indices(result.zero_variance);
  const auto d = static_cast<Eigen::Index>(kept.size());

  Eigen::MatrixXd correlation(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) {
      correlation(a, b) = psd.entries(kept[a], kept[b]) /
                          std::sqrt(psd.entries(kept[a], kept[a]) * psd.entries(kept[b], kept[b]));
    }
  }
  const Eigen::MatrixXd root = psd_square_root(correlation);
  const auto& ops = simd::active_ops();

  result.maxima.resize(draws);
  parallel_for(block_count(draws), [&](std::size_t b) {
    const auto count = static_cast<Eigen::Index>(block_size(draws, b));
    Eigen::MatrixXd z(d, count);
    standard_normals(z, count, seed, b);
    const Eigen::MatrixXd sample = root * z;
    for (Eigen::Index c = 0; c < count; ++c) {
      result.maxima[b * kDrawsPerBlock + static_cast<std::size_t>(c)] =
          ops.max_abs(std::span<const double>(sample.col(c).data(), static_cast<std::size_t>(d)));
    }
  });
  return result;
}

double quantile_from_draws(std::span<const double> maxima, double alpha) {
  require_alpha(alpha);
  if (maxima.empty()) throw InputError("no resampled statistics");
  std::vector<double> sorted(maxima.begin(), maxima.end());
  const double target = static_cast<double>(sorted.size()) * (1.0 - alpha);
  // The slack absorbs rounding in B (1 - alpha) for integral targets.
  auto rank = static_cast<std::size_t>(std::ceil(target - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   sorted.end());
  return sorted[rank - 1];
}

double gaussian_quantile(const PsdCovMatrix& psd, double alpha, std::size_t draws,
                         std::uint64_t seed) {
  require_alpha(alpha);
  return quantile_from_draws(draw_sup_statistics(psd, draws, seed).maxima, alpha);
}

UniformBand uniform_band(const DensityEstimate& center, const PsdCovMatrix& psd, double q_hat,
                         double alpha, std::size_t draws) {
  if (!(q_hat >= 0.0) || !std::isfinite(q_hat)) throw InputError("quantile must be finite and >= 0");
  return make_band(center, psd, q_hat, alpha, draws);
}

UniformBand pointwise_intervals(const DensityEstimate& center, const PsdCovMatrix& psd,
                                double alpha) {
  require_alpha(alpha);
  const double z = boost::math::quantile(boost::math::normal(), 1.0 - alpha / 2.0);
  return make_band(center, psd, z, alpha, 0);
}

BandResult band_with_kernel(const DyadicDataset& dataset, const KernelSpec& spec,
                            const EvaluationGrid& grid, double alpha, std::size_t draws,
                            std::uint64_t seed, const PsdOptions& psd) {
  require_alpha(alpha);
  require_draws(draws);
  auto estimate = fhat(dataset, spec, grid);
  auto raw = sigma_hat(dataset, spec, grid);
  auto projected =
      psd_project(raw, lipschitz_constants(spec), dataset.n(), spec.bandwidth, psd);
  const double q = gaussian_quantile(projected, alpha, draws, seed);
  auto band = uniform_band(estimate, projected, q, alpha, draws);
  return BandResult{std::move(estimate), std::move(raw), std::move(projected), std::move(band)};
}

RbcResult rbc_band(const DyadicDataset& dataset, const RbcConfig& config, std::uint64_t seed) {
  config.validate();
  const auto bandwidth = rot_bandwidth(dataset, config.family);
  const KernelSpec spec{config.family, config.p_prime, bandwidth.h, config.domain};
  const auto grid = EvaluationGrid::uniform(config.domain, config.grid_size);
  RbcResult result{band_with_kernel(dataset, spec, grid, config.alpha, config.draws, seed,
                                    config.psd),
                   bandwidth};
  return result;
}

TauNorm parse_tau_norm(std::string_view name) {
  if (name == "2" || name == "l2") return TauNorm::l2;
  if (name == "inf" || name == "sup" || name == "infinity") return TauNorm::sup;
  throw InputError("unknown test norm '" + std::string(name) + "' (expected 2 or inf)");
}

std::string_view to_string(TauNorm norm) { return norm == TauNorm::l2 ? "2" : "inf"; }

double tau_statistic(std::span<const double> difference, TauNorm norm, double spacing) {
  if (norm == TauNorm::sup) return simd::active_ops().max_abs(difference);
  double total = 0.0;
  for (double v : difference) total += v * v;
  return std::sqrt(total * spacing);
}

TwoSampleResult two_sample_test(const DyadicDataset& data0, const DyadicDataset& data1,
                                TauNorm norm, const RbcConfig& config, std::uint64_t seed) {
  config.validate();
  const auto grid = EvaluationGrid::uniform(config.domain, config.grid_size);
  struct Sample {
    DensityEstimate estimate;
    Eigen::MatrixXd root;
    double h;
  };
  auto prepare = [&](const DyadicDataset& data) {
    const auto bandwidth = rot_bandwidth(data, config.family);
    const KernelSpec spec{config.family, config.p_prime, bandwidth.h, config.domain};
    auto estimate = fhat(data, spec, grid);
    const auto psd = psd_project(sigma_hat(data, spec, grid), lipschitz_constants(spec),
                                 data.n(), spec.bandwidth, config.psd);
    return Sample{std::move(estimate), psd_square_root(psd.entries), bandwidth.h};
  };
  const Sample s0 = prepare(data0);
  const Sample s1 = prepare(data1);

  const std::size_t d = grid.size();
  std::vector<double> difference(d);
  for (std::size_t m = 0; m < d; ++m) difference[m] = s1.estimate.values[m] - s0.estimate.values[m];

  TwoSampleResult result;
  result.norm = norm;
  result.alpha = config.alpha;
  result.bandwidth0 = s0.h;
  result.bandwidth1 = s1.h;
  result.tau = tau_statistic(difference, norm, grid.spacing());

  const std::uint64_t seed0 = substream_seed(seed, 0);
  const std::uint64_t seed1 = substream_seed(seed, 1);
  const auto rows = static_cast<Eigen::Index>(d);
  std::vector<double> taus(config.draws);
  parallel_for(block_count(config.draws), [&](std::size_t b) {
    const auto count = static_cast<Eigen::Index>(block_size(config.draws, b));
    Eigen::MatrixXd z0(rows, count), z1(rows, count);
    standard_normals(z0, count, seed0, b);
    standard_normals(z1, count, seed1, b);
    const Eigen::MatrixXd gap = s0.root * z0 - s1.root * z1;
    for (Eigen::Index c = 0; c < count; ++c) {
      taus[b * kDrawsPerBlock + static_cast<std::size_t>(c)] = tau_statistic(
          std::span<const double>(gap.col(c).data(), d), norm, grid.spacing());
    }
  });
  result.critical_value = quantile_from_draws(taus, config.alpha);
  result.reject = result.tau >= result.critical_value;
  return result;
}

}  // namespace dyadic
