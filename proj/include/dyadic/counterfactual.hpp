#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dyadic/covariance.hpp"
#include "dyadic/dataset.hpp"
#include "dyadic/error.hpp"
#include "dyadic/estimator.hpp"
#include "dyadic/inference.hpp"

namespace dyadic {

// Discrete covariates of the same n nodes in populations 0 and 1, stored as
// indices into `levels`.
struct CovariateSample {
  std::vector<std::string> levels;
  std::vector<std::size_t> x0;
  std::vector<std::size_t> x1;

  std::size_t n() const { return x0.size(); }
  std::size_t level_count() const { return levels.size(); }

  // Levels are numbered in first-seen order over x0, then x1.
  static CovariateSample from_labels(std::span<const std::string> x0,
                                     std::span<const std::string> x1);
};

// A level that population 0 uses but population 1 never shows.
class SupportError : public InputError {
 public:
  explicit SupportError(std::string level);
  const std::string& level() const { return level_; }

 private:
  std::string level_;
};

std::vector<double> pmf_hat(std::span<const std::size_t> assignments, std::size_t levels);

struct PsiWeights {
  std::vector<double> ratio;         // per level
  std::vector<double> node_weights;  // ratio[x1[i]]
};

// Level names are used only for the support-violation message.
PsiWeights psi_hat(std::span<const double> p0, std::span<const double> p1,
                   std::span<const std::size_t> x1, std::span<const std::string> level_names = {});

double kappa_hat(std::size_t x0_i, std::size_t x1_i, std::size_t x, std::span<const double> p0,
                 std::span<const double> p1);

// values(i, x) = kappa_hat(x0[i], x1[i], x).
struct KappaTable {
  Eigen::MatrixXd values;

  Eigen::VectorXd column_means() const { return values.colwise().mean().transpose(); }
};

KappaTable kappa_table(const CovariateSample& covariates, std::span<const double> p0,
                       std::span<const double> p1);

DensityEstimate cf_estimate(const DyadicDataset& data1, const PsiWeights& psi,
                            const KernelSpec& spec, const EvaluationGrid& grid);

CovMatrix cf_covariance(const DyadicDataset& data1, const CovariateSample& covariates,
                        const PsiWeights& psi, const KappaTable& kappa, const KernelSpec& spec,
                        const EvaluationGrid& grid);

struct CounterfactualResult : RbcResult {
  std::vector<double> p0;
  std::vector<double> p1;
  PsiWeights psi;
};

// ROT bandwidth from data1, then the reweighted estimate, its covariance,
// projection, quantile and band with the order-p_prime kernel.
CounterfactualResult cf_band(const DyadicDataset& data1, const CovariateSample& covariates,
                             const RbcConfig& config, std::uint64_t seed);

}  // namespace dyadic
