#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dyadic/dataset.hpp"
#include "dyadic/estimator.hpp"
#include "dyadic/kernels.hpp"

namespace dyadic::sim {

// Law of the latent node type A in {-1, 0, +1}.
struct PiParams {
  double minus = 0.5;
  double zero = 0.0;
  double plus = 0.5;

  // Non-negative entries summing to 1 within 1e-12.
  void validate() const;
  double probability(int a) const { return a < 0 ? minus : (a == 0 ? zero : plus); }
  std::string to_string() const;

  // "p1,p2,p3"; each entry may be a fraction such as 1/5.
  static PiParams parse(std::string_view text);
};

struct SimulatedNetwork {
  DyadicDataset dataset;
  std::vector<int> latent;
};

// W_ij = A_i A_j + V_ij on a complete network with n nodes.
SimulatedNetwork generate(const PiParams& pi, std::size_t n, std::uint64_t seed);

double normal_pdf(double x);

double true_density(const PiParams& pi, double w);
double conditional_density(const PiParams& pi, double w, int a);

enum class Degeneracy { total, partial, none };
std::string_view to_string(Degeneracy degeneracy);

inline constexpr double kDegeneracyTolerance = 1e-12;

struct DegeneracyProfile {
  EvaluationGrid grid;
  std::vector<double> variance;  // Var[f_{W|A}(w | A)]
  double lower = 0.0;            // min over the grid
  double upper = 0.0;            // max over the grid
  std::size_t argmin = 0;
  Degeneracy classification = Degeneracy::none;
};

DegeneracyProfile degeneracy_profile(const PiParams& pi, const EvaluationGrid& grid);

// Terms of f_hat - f = B + L + E + Q on the grid, with conditional kernel
// means obtained by 64-node Gauss-Legendre quadrature on each side of w.
struct HoeffdingComponents {
  std::vector<double> estimate;
  std::vector<double> truth;
  std::vector<double> bias;
  std::vector<double> linear;
  std::vector<double> error;
  std::vector<double> quadratic;

  // max_m |f_hat - f - B - L - E - Q|.
  double max_residual() const;
};

HoeffdingComponents hoeffding_components(const DyadicDataset& dataset,
                                         std::span<const int> latent, const PiParams& pi,
                                         const KernelSpec& spec, const EvaluationGrid& grid);

struct McConfig {
  std::vector<PiParams> pis{{0.5, 0.0, 0.5}, {0.25, 0.0, 0.75}, {0.2, 0.2, 0.6}};
  std::size_t n = 300;
  std::size_t reps = 500;
  std::size_t grid_size = 25;
  std::size_t draws = 2000;
  int p = 2;
  int p_prime = 4;
  double alpha = 0.05;
  std::uint64_t seed = 20240101;
  KernelFamily family = KernelFamily::epanechnikov;
  Domain domain;

  void validate() const;
  // 2000 replications, n = 3000, d = 50, B = 10000.
  static McConfig full_scale();
};

struct McRow {
  PiParams pi;
  Degeneracy degeneracy = Degeneracy::none;
  int order = 2;
  double mean_bandwidth = 0.0;
  double rimse = 0.0;
  double ucb_coverage = 0.0;
  double ucb_width = 0.0;
  double pci_coverage = 0.0;
  double pci_width = 0.0;
  std::size_t reps = 0;
  std::size_t failures = 0;  // replications lost to numerical errors
  std::uint64_t seed = 0;
  double seconds = 0.0;
};

struct McReport {
  McConfig config;
  std::vector<McRow> rows;

  const McRow& row(std::size_t pi_index, int order) const;
};

// Replication r of configuration c uses substream (substream(seed, c), r);
// the report is folded in replication order.
McReport mc_study(const McConfig& config);

void write_report_csv(std::ostream& out, const McReport& report);

}  // namespace dyadic::sim
