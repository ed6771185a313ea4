#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dyadic/dataset.hpp"
#include "dyadic/estimator.hpp"
#include "dyadic/kernels.hpp"

namespace dyadic {

// Symmetric d x d covariance estimate on a grid. Diagonal entries may be
// slightly negative before regularization; their indices are listed.
struct CovMatrix {
  EvaluationGrid grid;
  Eigen::MatrixXd entries;
  std::vector<std::size_t> negative_diagonal;
};

// Symmetric PSD, Lipschitz-constrained approximation of a CovMatrix.
struct PsdCovMatrix {
  EvaluationGrid grid;
  Eigen::MatrixXd entries;
  // Achieved sup_{w,w'} |M - Sigma| / sqrt(Sigma(w,w) + Sigma(w',w')).
  double objective = 0.0;
  // Constraint constant 4 C_k C_L / (n h^3).
  double lipschitz_bound = 0.0;
  // Which candidate won: "raw", "eigen-clip", "dykstra" or "sup-bisection".
  std::string method;
  // Pairs whose normalization was too small to enter the objective.
  std::vector<std::pair<std::size_t, std::size_t>> excluded_pairs;
};

// Builds a CovMatrix from precomputed pair sums:
//   (4/n^2) sum_i S_i S_i' - 4/(n^2 (n-1)^2) sum_{i<j} k k' - (4n-6)/(n(n-1)) f f'
// with S_i = rows_i / (n - 1) and f = 2 total / (n (n - 1)).
CovMatrix sigma_hat_from_sums(const KernelSums& sums, std::size_t n, const EvaluationGrid& grid);

CovMatrix sigma_hat(const DyadicDataset& dataset, const KernelSpec& spec,
                    const EvaluationGrid& grid);

struct PsdOptions {
  // Adds 1e-12 * trace / d to the raw diagonal before projecting.
  bool ridge = false;
  // Alternating-projection iteration cap and residual tolerance.
  int max_iterations = 500;
  double residual_tolerance = 1e-9;
  // Relative precision of the bisection on the objective level.
  double bisection_tolerance = 1e-5;
};

PsdCovMatrix psd_project(const CovMatrix& raw, const LipschitzConstants& constants,
                         std::size_t n, double bandwidth, const PsdOptions& options = {});

// Normalized sup-discrepancy of `candidate` from `raw`, skipping pairs whose
// squared normalization is at most 1e-14 in magnitude. Throws
// NumericalError when some squared normalization is below -1e-14.
double sdp_objective(const Eigen::MatrixXd& candidate, const Eigen::MatrixXd& raw);

// Smallest eigenvalue tolerated for a PSD matrix with the given spectrum
// scale: min(1e-8, 1e-10 * max |eigenvalue|).
double psd_tolerance(double spectral_scale);

// Largest |M(i, k+1) - M(i, k)| / (w_{k+1} - w_k) over rows i.
double max_row_slope(const Eigen::MatrixXd& m, const std::vector<double>& points);

}  // namespace dyadic
