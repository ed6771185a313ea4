#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "dyadic/dataset.hpp"
#include "dyadic/kernels.hpp"

namespace dyadic {

// Strictly increasing evaluation points inside the inference domain.
class EvaluationGrid {
 public:
  EvaluationGrid(std::vector<double> points, Domain domain);

  // d equally spaced points including both endpoints (d >= 2), or the
  // midpoint when d == 1.
  static EvaluationGrid uniform(Domain domain, std::size_t d);

  std::size_t size() const { return points_.size(); }
  const std::vector<double>& points() const { return points_; }
  double operator[](std::size_t m) const { return points_[m]; }
  const Domain& domain() const { return domain_; }

  // Mean distance between neighbouring points (Leb(W) when d == 1); the
  // Riemann weight used for integrals over the grid.
  double spacing() const;

  bool operator==(const EvaluationGrid& other) const {
    return points_ == other.points_ && domain_.lower == other.domain_.lower &&
           domain_.upper == other.domain_.upper;
  }

 private:
  std::vector<double> points_;
  Domain domain_;
};

struct DensityEstimate {
  EvaluationGrid grid;
  std::vector<double> values;
  KernelSpec spec;
  std::size_t present_pairs = 0;
  double mixture_weight = 1.0;

  // Trapezoid integral over the grid; a diagnostic close to 1 for
  // second-order kernels on well-covered domains.
  double grid_integral() const;
};

// Boundary kernels at every grid point, built once per (spec, grid).
std::vector<BoundaryKernel> grid_kernels(const KernelSpec& spec, const EvaluationGrid& grid);

// (1 / N_present) sum over present pairs of k_h(W_ij, w).
DensityEstimate fhat(const DyadicDataset& dataset, const KernelSpec& spec,
                     const EvaluationGrid& grid);

// (2 / (n (n - 1))) sum_{i<j} weight_i weight_j k_h(W_ij, w), with the
// kernel rescaled by N / N_present when edges are missing.
DensityEstimate weighted_fhat(const DyadicDataset& dataset, std::span<const double> node_weights,
                              const KernelSpec& spec, const EvaluationGrid& grid);

// Single pass over present pairs collecting everything the covariance
// estimators need, with rescaled kernel values k = (N / N_present) k_h and
// node weights omega (all ones when empty):
//   total(m)       = sum_{i<j} omega_i omega_j k_ij(w_m)
//   rows(i, m)     = sum_{j != i} omega_j k_ij(w_m)
//   gram(m, m')    = sum_{i<j} omega_i^2 omega_j^2 k_ij(w_m) k_ij(w_m')
// The reduction order is fixed by pair index, independent of threads.
struct KernelSums {
  Eigen::VectorXd total;
  Eigen::MatrixXd rows;
  Eigen::MatrixXd gram;
};

KernelSums kernel_sums(const DyadicDataset& dataset, const KernelSpec& spec,
                       const EvaluationGrid& grid, std::span<const double> node_weights = {});

}  // namespace dyadic
