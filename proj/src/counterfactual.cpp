#include "dyadic/counterfactual.hpp"

#include <unordered_map>

#include "dyadic/bandwidth.hpp"

namespace dyadic {
namespace {

void require_levels(std::span<const double> p0, std::span<const double> p1) {
  if (p0.size() != p1.size() || p0.empty()) {
    throw InputError("population pmfs must share a non-empty level set");
  }
}

void require_matching(const DyadicDataset& data1, const CovariateSample& covariates) {
  if (covariates.x0.size() != data1.n() || covariates.x1.size() != data1.n()) {
    throw InputError("covariates must cover every node of the network");
  }
}

}  // namespace

CovariateSample CovariateSample::from_labels(std::span<const std::string> x0,
                                             std::span<const std::string> x1) {
  if (x0.size() != x1.size()) throw InputError("populations have different node counts");
  if (x0.empty()) throw InputError("no covariates given");
  CovariateSample sample;
  std::unordered_map<std::string, std::size_t> index;
  auto level_of = [&](const std::string& label) {
    auto [it, inserted] = index.try_emplace(label, sample.levels.size());
    if (inserted) sample.levels.push_back(label);
    return it->second;
  };
  for (const auto& label : x0) sample.x0.push_back(level_of(label));
  for (const auto& label : x1) sample.x1.push_back(level_of(label));
  return sample;
}

SupportError::SupportError(std::string level)
    : InputError("covariate level '" + level +
                 "' occurs in population 0 but never in population 1"),
      level_(std::move(level)) {}

std::vector<double> pmf_hat(std::span<const std::size_t> assignments, std::size_t levels) {
  if (assignments.empty()) throw InputError("pmf of an empty sample");
  std::vector<std::size_t> counts(levels, 0);
  for (std::size_t x : assignments) {
    if (x >= levels) throw InputError("covariate level index out of range");
    ++counts[x];
  }
  std::vector<double> pmf(levels);
  const double n = static_cast<double>(assignments.size());
  for (std::size_t x = 0; x < levels; ++x) pmf[x] = static_cast<double>(counts[x]) / n;
  return pmf;
}

PsiWeights psi_hat(std::span<const double> p0, std::span<const double> p1,
                   std::span<const std::size_t> x1, std::span<const std::string> level_names) {
  require_levels(p0, p1);
  PsiWeights psi;
  psi.ratio.resize(p0.size());
  for (std::size_t x = 0; x < p0.size(); ++x) {
    if (p1[x] > 0.0) {
      psi.ratio[x] = p0[x] / p1[x];
    } else if (p0[x] > 0.0) {
      throw SupportError(x < level_names.size() ? level_names[x] : std::to_string(x));
    } else {
      psi.ratio[x] = 0.0;
    }
  }
  psi.node_weights.reserve(x1.size());
  for (std::size_t x : x1) {
    if (x >= psi.ratio.size()) throw InputError("covariate level index out of range");
    psi.node_weights.push_back(psi.ratio[x]);
  }
  return psi;
}

double kappa_hat(std::size_t x0_i, std::size_t x1_i, std::size_t x, std::span<const double> p0,
                 std::span<const double> p1) {
  require_levels(p0, p1);
  if (x >= p1.size()) throw InputError("covariate level index out of range");
  if (!(p1[x] > 0.0)) throw SupportError(std::to_string(x));
  const double i0 = x0_i == x ? 1.0 : 0.0;
  const double i1 = x1_i == x ? 1.0 : 0.0;
  return (i0 - p0[x]) / p1[x] - (p0[x] / p1[x]) * ((i1 - p1[x]) / p1[x]);
}

KappaTable kappa_table(const CovariateSample& covariates, std::span<const double> p0,
                       std::span<const double> p1) {
  require_levels(p0, p1);
  const auto n = static_cast<Eigen::Index>(covariates.n());
  const auto levels = static_cast<Eigen::Index>(p0.size());
  KappaTable table{Eigen::MatrixXd::Zero(n, levels)};
  for (Eigen::Index x = 0; x < levels; ++x) {
    // Levels absent from population 1 carry no weight anywhere.
    if (!(p1[static_cast<std::size_t>(x)] > 0.0)) continue;
    for (Eigen::Index i = 0; i < n; ++i) {
      table.values(i, x) = kappa_hat(covariates.x0[static_cast<std::size_t>(i)],
                                     covariates.x1[static_cast<std::size_t>(i)],
                                     static_cast<std::size_t>(x), p0, p1);
    }
  }
  return table;
}

DensityEstimate cf_estimate(const DyadicDataset& data1, const PsiWeights& psi,
                            const KernelSpec& spec, const EvaluationGrid& grid) {
  return weighted_fhat(data1, psi.node_weights, spec, grid);
}

CovMatrix cf_covariance(const DyadicDataset& data1, const CovariateSample& covariates,
                        const PsiWeights& psi, const KappaTable& kappa, const KernelSpec& spec,
                        const EvaluationGrid& grid) {
  require_matching(data1, covariates);
  const std::size_t n = data1.n();
  if (n < 3) throw DegenerateInputError("covariance estimation needs at least 3 nodes");
  if (psi.node_weights.size() != n || static_cast<std::size_t>(kappa.values.rows()) != n) {
    throw InputError("weights and influence table must cover every node");
  }
  const auto sums = kernel_sums(data1, spec, grid, psi.node_weights);
  const double nd = static_cast<double>(n);
  const Eigen::MatrixXd s = sums.rows / (nd - 1.0);
  const Eigen::VectorXd f = sums.total * (2.0 / (nd * (nd - 1.0)));

  // Per-level totals T_x = sum_{j : x1_j = x} S_j turn the leave-one-out
  // sum into sum_x kappa(i, x) T_x - kappa(i, x1_i) S_i.
  Eigen::MatrixXd totals = Eigen::MatrixXd::Zero(kappa.values.cols(), s.cols());
  for (std::size_t j = 0; j < n; ++j) {
    totals.row(static_cast<Eigen::Index>(covariates.x1[j])) += s.row(static_cast<Eigen::Index>(j));
  }
  Eigen::MatrixXd u = kappa.values * totals;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double self = kappa.values(r, static_cast<Eigen::Index>(covariates.x1[i]));
    u.row(r) = (u.row(r) - self * s.row(r)) / (nd - 1.0) + psi.node_weights[i] * s.row(r);
  }

  Eigen::MatrixXd entries = (4.0 / (nd * nd)) * (u.transpose() * u) -
                            (4.0 / (nd * nd * nd * (nd - 1.0))) * sums.gram -
                            (4.0 / nd) * (f * f.transpose());
  entries = 0.5 * (entries + entries.transpose()).eval();
  CovMatrix cov{grid, std::move(entries), {}};
  for (Eigen::Index m = 0; m < cov.entries.rows(); ++m) {
    if (cov.entries(m, m) < 0.0) cov.negative_diagonal.push_back(static_cast<std::size_t>(m));
  }
  return cov;
}

CounterfactualResult cf_band(const DyadicDataset& data1, const CovariateSample& covariates,
                             const RbcConfig& config, std::uint64_t seed) {
  config.validate();
  require_matching(data1, covariates);
  auto p0 = pmf_hat(covariates.x0, covariates.level_count());
  auto p1 = pmf_hat(covariates.x1, covariates.level_count());
  auto psi = psi_hat(p0, p1, covariates.x1, covariates.levels);
  const auto kappa = kappa_table(covariates, p0, p1);

  const auto bandwidth = rot_bandwidth(data1, config.family);
  const KernelSpec spec{config.family, config.p_prime, bandwidth.h, config.domain};
  const auto grid = EvaluationGrid::uniform(config.domain, config.grid_size);
  auto estimate = cf_estimate(data1, psi, spec, grid);
  auto raw = cf_covariance(data1, covariates, psi, kappa, spec, grid);
  auto projected =
      psd_project(raw, lipschitz_constants(spec), data1.n(), spec.bandwidth, config.psd);
  const double q = gaussian_quantile(projected, config.alpha, config.draws, seed);
  auto band = uniform_band(estimate, projected, q, config.alpha, config.draws);
  return CounterfactualResult{
      {{std::move(estimate), std::move(raw), std::move(projected), std::move(band)}, bandwidth},
      std::move(p0),
      std::move(p1),
      std::move(psi)};
}

}  // namespace dyadic
