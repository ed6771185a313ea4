#include "dyadic/simulation.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>

#include "dyadic/bandwidth.hpp"
#include "dyadic/error.hpp"
#include "dyadic/inference.hpp"
#include "dyadic/parallel.hpp"
#include "dyadic/random.hpp"

namespace dyadic::sim {
namespace {

constexpr int kLatent[3] = {-1, 0, 1};

double parse_number(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw InputError("invalid number '" + std::string(text) + "'");
  }
  return value;
}

double parse_fraction(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_number(text);
  const double denominator = parse_number(text.substr(slash + 1));
  if (denominator == 0.0) throw InputError("zero denominator in '" + std::string(text) + "'");
  return parse_number(text.substr(0, slash)) / denominator;
}

// Integral of k_h(s, w) g(s) over the kernel support, split at w where the
// triangular kernel has its kink.
template <typename Density>
double kernel_expectation(const BoundaryKernel& kernel, const KernelSpec& spec, Density&& g) {
  using Rule = boost::math::quadrature::gauss<double, 64>;
  const double h = spec.bandwidth;
  const double lo = kernel.center + h * kernel.lower;
  const double hi = kernel.center + h * kernel.upper;
  auto integrand = [&](double s) { return eval_kernel(kernel, spec, s) * g(s); };
  double total = 0.0;
  if (lo < kernel.center) total += Rule::integrate(integrand, lo, std::min(kernel.center, hi));
  if (hi > kernel.center) total += Rule::integrate(integrand, std::max(kernel.center, lo), hi);
  if (!std::isfinite(total)) throw NumericalError("quadrature of a conditional kernel mean failed");
  return total;
}

double mean(std::span<const double> values) {
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

}  // namespace

void PiParams::validate() const {
  if (!(minus >= 0.0 && zero >= 0.0 && plus >= 0.0)) {
    throw InputError("pi entries must be non-negative");
  }
  if (std::fabs(minus + zero + plus - 1.0) > 1e-12) throw InputError("pi entries must sum to 1");
}

std::string PiParams::to_string() const {
  char buffer[96];
  std::snprintf(buffer, sizeof buffer, "%.6g,%.6g,%.6g", minus, zero, plus);
  return buffer;
}

PiParams PiParams::parse(std::string_view text) {
  std::vector<double> parts;
  while (true) {
    const auto comma = text.find(',');
    parts.push_back(parse_fraction(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (parts.size() != 3) throw InputError("pi needs exactly three entries");
  PiParams pi{parts[0], parts[1], parts[2]};
  pi.validate();
  return pi;
}

SimulatedNetwork generate(const PiParams& pi, std::size_t n, std::uint64_t seed) {
  pi.validate();
  if (n < 2) throw InputError("a network needs at least 2 nodes");
  Rng rng(mix_seed(seed));
  std::uniform_real_distribution<double> uniform;
  std::normal_distribution<double> normal;
  std::vector<int> latent(n);
  for (auto& a : latent) {
    const double u = uniform(rng);
    a = u < pi.minus ? -1 : (u < pi.minus + pi.zero ? 0 : 1);
  }
  std::vector<double> values;
  values.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      values.push_back(static_cast<double>(latent[i] * latent[j]) + normal(rng));
    }
  }
  return {DyadicDataset::complete(n, std::move(values)), std::move(latent)};
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

double true_density(const PiParams& pi, double w) {
  return (pi.minus * pi.minus + pi.plus * pi.plus) * normal_pdf(w - 1.0) +
         pi.zero * (2.0 - pi.zero) * normal_pdf(w) + 2.0 * pi.minus * pi.plus * normal_pdf(w + 1.0);
}

double conditional_density(const PiParams& pi, double w, int a) {
  if (a < -1 || a > 1) throw InputError("latent type must be -1, 0 or 1");
  const double shift = static_cast<double>(a);
  return pi.minus * normal_pdf(w + shift) + pi.zero * normal_pdf(w) +
         pi.plus * normal_pdf(w - shift);
}

std::string_view to_string(Degeneracy degeneracy) {
  switch (degeneracy) {
    case Degeneracy::total: return "total";
    case Degeneracy::partial: return "partial";
    default: return "none";
  }
}

DegeneracyProfile degeneracy_profile(const PiParams& pi, const EvaluationGrid& grid) {
  pi.validate();
  DegeneracyProfile profile{grid, std::vector<double>(grid.size())};
  for (std::size_t m = 0; m < grid.size(); ++m) {
    double conditional[3];
    double average = 0.0;
    for (int k = 0; k < 3; ++k) {
      conditional[k] = conditional_density(pi, grid[m], kLatent[k]);
      average += pi.probability(kLatent[k]) * conditional[k];
    }
    double variance = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double gap = conditional[k] - average;
      variance += pi.probability(kLatent[k]) * gap * gap;
    }
    profile.variance[m] = variance;
  }
  const auto [lo, hi] = std::minmax_element(profile.variance.begin(), profile.variance.end());
  profile.lower = *lo;
  profile.upper = *hi;
  profile.argmin = static_cast<std::size_t>(lo - profile.variance.begin());
  if (profile.upper <= kDegeneracyTolerance) {
    profile.classification = Degeneracy::total;
  } else if (profile.lower <= kDegeneracyTolerance) {
    profile.classification = Degeneracy::partial;
  } else {
    profile.classification = Degeneracy::none;
  }
  return profile;
}

double HoeffdingComponents::max_residual() const {
  double worst = 0.0;
  for (std::size_t m = 0; m < estimate.size(); ++m) {
    const double r = estimate[m] - truth[m] - bias[m] - linear[m] - error[m] - quadratic[m];
    worst = std::max(worst, std::fabs(r));
  }
  return worst;
}

HoeffdingComponents hoeffding_components(const DyadicDataset& dataset,
                                         std::span<const int> latent, const PiParams& pi,
                                         const KernelSpec& spec, const EvaluationGrid& grid) {
  pi.validate();
  const std::size_t n = dataset.n();
  if (latent.size() != n) throw InputError("latent types must cover every node");
  if (dataset.present_count() != dataset.pair_count()) {
    throw InputError("the decomposition needs a complete network");
  }
  // Pair counts by product A_i A_j in {-1, 0, 1}, and node counts by A_i.
  double pair_share[3] = {0.0, 0.0, 0.0};
  double node_share[3] = {0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    if (latent[i] < -1 || latent[i] > 1) throw InputError("latent type must be -1, 0 or 1");
    node_share[latent[i] + 1] += 1.0;
    for (std::size_t j = i + 1; j < n; ++j) pair_share[latent[i] * latent[j] + 1] += 1.0;
  }
  for (auto& s : pair_share) s /= static_cast<double>(dataset.pair_count());
  for (auto& s : node_share) s /= static_cast<double>(n);

  const auto estimate = fhat(dataset, spec, grid);
  const auto kernels = grid_kernels(spec, grid);
  const std::size_t d = grid.size();
  HoeffdingComponents out{estimate.values, std::vector<double>(d), std::vector<double>(d),
                          std::vector<double>(d), std::vector<double>(d), std::vector<double>(d)};
  parallel_for(d, [&](std::size_t m) {
    const auto& kernel = kernels[m];
    double given_pair[3];
    double given_node[3];
    for (int k = 0; k < 3; ++k) {
      const double shift = static_cast<double>(kLatent[k]);
      given_pair[k] =
          kernel_expectation(kernel, spec, [&](double s) { return normal_pdf(s - shift); });
      given_node[k] = kernel_expectation(
          kernel, spec, [&](double s) { return conditional_density(pi, s, kLatent[k]); });
    }
    const double marginal =
        kernel_expectation(kernel, spec, [&](double s) { return true_density(pi, s); });

    double pair_mean = 0.0;
    double node_mean = 0.0;
    for (int k = 0; k < 3; ++k) {
      pair_mean += pair_share[k] * given_pair[k];
      node_mean += node_share[k] * given_node[k];
    }
    out.truth[m] = true_density(pi, grid[m]);
    out.bias[m] = marginal - out.truth[m];
    out.linear[m] = 2.0 * (node_mean - marginal);
    out.error[m] = out.estimate[m] - pair_mean;
    out.quadratic[m] = pair_mean - 2.0 * node_mean + marginal;
  });
  return out;
}

void McConfig::validate() const {
  if (pis.empty()) throw InputError("no pi configurations");
  for (const auto& pi : pis) pi.validate();
  if (n < 3) throw InputError("simulation needs n >= 3");
  if (reps < 2) throw InputError("simulation needs at least 2 replications");
  RbcConfig rbc{p, p_prime, alpha, draws, grid_size, family, domain, {}};
  rbc.validate();
}

McConfig McConfig::full_scale() {
  McConfig config;
  config.n = 3000;
  config.reps = 2000;
  config.grid_size = 50;
  config.draws = 10000;
  return config;
}

const McRow& McReport::row(std::size_t pi_index, int order) const {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (r / 2 == pi_index && rows[r].order == order) return rows[r];
  }
  throw InputError("no report row for that configuration");
}

McReport mc_study(const McConfig& config) {
  config.validate();
  const auto grid = EvaluationGrid::uniform(config.domain, config.grid_size);
  const int orders[2] = {config.p, config.p_prime};

  struct Outcome {
    bool ok = false;
    double h = 0.0;
    double rimse[2] = {0.0, 0.0};
    bool ucb_cover[2] = {false, false};
    double ucb_width[2] = {0.0, 0.0};
    bool pci_cover[2] = {false, false};
    double pci_width[2] = {0.0, 0.0};
  };

  McReport report{config, {}};
  for (std::size_t c = 0; c < config.pis.size(); ++c) {
    const auto& pi = config.pis[c];
    const auto started = std::chrono::steady_clock::now();
    std::vector<double> truth(grid.size());
    for (std::size_t m = 0; m < grid.size(); ++m) truth[m] = true_density(pi, grid[m]);
    const std::uint64_t config_seed = substream_seed(config.seed, c);

    std::vector<Outcome> outcomes(config.reps);
    parallel_for(config.reps, [&](std::size_t r) {
      const std::uint64_t rep_seed = substream_seed(config_seed, r);
      Outcome& o = outcomes[r];
      try {
        const auto network = generate(pi, config.n, rep_seed);
        o.h = rot_bandwidth(network.dataset, config.family).h;
        for (int k = 0; k < 2; ++k) {
          const KernelSpec spec{config.family, orders[k], o.h, config.domain};
          const auto result =
              band_with_kernel(network.dataset, spec, grid, config.alpha, config.draws,
                               substream_seed(rep_seed, static_cast<std::uint64_t>(orders[k])));
          double squared = 0.0;
          for (std::size_t m = 0; m < grid.size(); ++m) {
            const double gap = result.estimate.values[m] - truth[m];
            squared += gap * gap;
          }
          o.rimse[k] = std::sqrt(squared * grid.spacing());
          o.ucb_cover[k] = result.band.covers(truth);
          o.ucb_width[k] = result.band.average_width();
          const auto pci = pointwise_intervals(result.estimate, result.covariance, config.alpha);
          o.pci_cover[k] = pci.covers(truth);
          o.pci_width[k] = pci.average_width();
        }
        o.ok = true;
      } catch (const NumericalError&) {
        o.ok = false;
      }
    });
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    const auto degeneracy = degeneracy_profile(pi, grid).classification;
    for (int k = 0; k < 2; ++k) {
      McRow row;
      row.pi = pi;
      row.degeneracy = degeneracy;
      row.order = orders[k];
      row.seed = config_seed;
      row.seconds = seconds;
      std::vector<double> h, rimse, ucb_cover, ucb_width, pci_cover, pci_width;
      for (const auto& o : outcomes) {
        if (!o.ok) {
          ++row.failures;
          continue;
        }
        h.push_back(o.h);
        rimse.push_back(o.rimse[k]);
        ucb_cover.push_back(o.ucb_cover[k] ? 1.0 : 0.0);
        ucb_width.push_back(o.ucb_width[k]);
        pci_cover.push_back(o.pci_cover[k] ? 1.0 : 0.0);
        pci_width.push_back(o.pci_width[k]);
      }
      row.reps = h.size();
      if (row.reps == 0) throw NumericalError("every replication failed for pi = " + pi.to_string());
      row.mean_bandwidth = mean(h);
      row.rimse = mean(rimse);
      row.ucb_coverage = mean(ucb_cover);
      row.ucb_width = mean(ucb_width);
      row.pci_coverage = mean(pci_cover);
      row.pci_width = mean(pci_width);
      report.rows.push_back(row);
    }
  }
  return report;
}

void write_report_csv(std::ostream& out, const McReport& report) {
  const auto& c = report.config;
  out << "pi,degeneracy,order,h_rot,rimse,ucb_cr,ucb_aw,pci_cr,pci_aw,reps,failures,n,d,B,alpha,"
         "seed,seconds\n";
  char buffer[512];
  for (const auto& row : report.rows) {
    std::snprintf(buffer, sizeof buffer,
                  "\"%s\",%s,%d,%.6f,%.6f,%.4f,%.6f,%.4f,%.6f,%zu,%zu,%zu,%zu,%zu,%.4g,%llu,%.2f\n",
                  row.pi.to_string().c_str(), std::string(to_string(row.degeneracy)).c_str(),
                  row.order, row.mean_bandwidth, row.rimse, row.ucb_coverage, row.ucb_width,
                  row.pci_coverage, row.pci_width, row.reps, row.failures, c.n, c.grid_size,
                  c.draws, c.alpha, static_cast<unsigned long long>(row.seed), row.seconds);
    out << buffer;
  }
}

}  // namespace dyadic::sim
