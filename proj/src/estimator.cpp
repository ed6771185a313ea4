#include "dyadic/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "dyadic/error.hpp"
#include "dyadic/parallel.hpp"
#include "dyadic/simd.hpp"

namespace dyadic {
namespace {

constexpr std::size_t kNodesPerGroup = 32;

void require_present(const DyadicDataset& dataset) {
  if (dataset.present_count() == 0) {
    throw DegenerateInputError("no present pairs to estimate from");
  }
}

// N / N_present: turns sums over present pairs into the complete-network
// normalization 2 / (n (n - 1)).
double missing_scale(const DyadicDataset& dataset) {
  return static_cast<double>(dataset.pair_count()) /
         static_cast<double>(dataset.present_count());
}

}  // namespace

EvaluationGrid::EvaluationGrid(std::vector<double> points, Domain domain)
    : points_(std::move(points)), domain_(domain) {
  if (points_.empty()) throw InputError("evaluation grid is empty");
  if (!(domain_.upper > domain_.lower)) throw InputError("invalid inference domain");
  for (std::size_t m = 0; m < points_.size(); ++m) {
    if (!domain_.contains(points_[m])) throw InputError("grid point outside the domain");
    if (m > 0 && !(points_[m] > points_[m - 1])) {
      throw InputError("grid points must be strictly increasing");
    }
  }
}

EvaluationGrid EvaluationGrid::uniform(Domain domain, std::size_t d) {
  if (d == 0) throw InputError("grid size must be positive");
  if (!(domain.upper > domain.lower)) throw InputError("invalid inference domain");
  std::vector<double> points(d);
  if (d == 1) {
    points[0] = 0.5 * (domain.lower + domain.upper);
  } else {
    const double step = domain.length() / static_cast<double>(d - 1);
    for (std::size_t m = 0; m < d; ++m) points[m] = domain.lower + step * static_cast<double>(m);
    points[d - 1] = domain.upper;
  }
  return EvaluationGrid(std::move(points), domain);
}

double EvaluationGrid::spacing() const {
  if (points_.size() == 1) return domain_.length();
  return (points_.back() - points_.front()) / static_cast<double>(points_.size() - 1);
}

double DensityEstimate::grid_integral() const {
  const auto& w = grid.points();
  double total = 0.0;
  for (std::size_t m = 1; m < w.size(); ++m) {
    total += 0.5 * (values[m] + values[m - 1]) * (w[m] - w[m - 1]);
  }
  return total;
}

std::vector<BoundaryKernel> grid_kernels(const KernelSpec& spec, const EvaluationGrid& grid) {
  if (grid.domain().lower != spec.domain.lower || grid.domain().upper != spec.domain.upper) {
    throw InputError("grid and kernel use different inference domains");
  }
  std::vector<BoundaryKernel> kernels;
  kernels.reserve(grid.size());
  for (double w : grid.points()) kernels.push_back(build_boundary_kernel(spec, w));
  return kernels;
}

namespace {

DensityEstimate evaluate(const DyadicDataset& dataset, std::span<const double> pair_weights,
                         const KernelSpec& spec, const EvaluationGrid& grid) {
  require_present(dataset);
  const auto kernels = grid_kernels(spec, grid);
  const auto& values = dataset.present_pairs().values;
  const double normalizer = 1.0 / static_cast<double>(dataset.present_count());
  const auto& ops = simd::active_ops();

  DensityEstimate estimate{grid, std::vector<double>(grid.size()), spec,
                           dataset.present_count(), dataset.mixture_weight()};
  parallel_for(grid.size(), [&](std::size_t m) {
    estimate.values[m] = ops.sum(simd::make_params(kernels[m], spec), values, pair_weights) *
                         normalizer;
  });
  return estimate;
}

}  // namespace

DensityEstimate fhat(const DyadicDataset& dataset, const KernelSpec& spec,
                     const EvaluationGrid& grid) {
  spec.validate();
  return evaluate(dataset, {}, spec, grid);
}

DensityEstimate weighted_fhat(const DyadicDataset& dataset, std::span<const double> node_weights,
                              const KernelSpec& spec, const EvaluationGrid& grid) {
  spec.validate();
  if (node_weights.size() != dataset.n()) {
    throw InputError("expected " + std::to_string(dataset.n()) + " node weights, got " +
                     std::to_string(node_weights.size()));
  }
  for (double v : node_weights) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InputError("node weights must be non-negative and finite");
    }
  }
  const auto& pairs = dataset.present_pairs();
  std::vector<double> pair_weights(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    pair_weights[k] = node_weights[pairs.first[k]] * node_weights[pairs.second[k]];
  }
  return evaluate(dataset, pair_weights, spec, grid);
}

KernelSums kernel_sums(const DyadicDataset& dataset, const KernelSpec& spec,
                       const EvaluationGrid& grid, std::span<const double> node_weights) {
  spec.validate();
  require_present(dataset);
  const std::size_t n = dataset.n();
  const std::size_t d = grid.size();
  if (!node_weights.empty() && node_weights.size() != n) {
    throw InputError("node weight count does not match node count");
  }
  const auto kernels = grid_kernels(spec, grid);
  std::vector<simd::KernelParams> params;
  params.reserve(d);
  for (const auto& k : kernels) params.push_back(simd::make_params(k, spec));
  const auto& ops = simd::active_ops();
  auto weight = [&](std::size_t i) { return node_weights.empty() ? 1.0 : node_weights[i]; };

  KernelSums sums;
  sums.rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const std::size_t groups = (n + kNodesPerGroup - 1) / kNodesPerGroup;
  std::vector<Eigen::MatrixXd> partial_gram(groups);

  parallel_for(groups, [&](std::size_t g) {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                                 static_cast<Eigen::Index>(d));
    std::vector<double> values;
    Eigen::VectorXd neighbour_weight;
    Eigen::MatrixXd block;
    std::vector<double> weights;
    const std::size_t last = std::min(n, (g + 1) * kNodesPerGroup);
    for (std::size_t i = g * kNodesPerGroup; i < last; ++i) {
      // Present neighbours of i in ascending order; those above i form
      // the tail and are the pairs (i, j), j > i, owned by node i.
      values.clear();
      weights.clear();
      std::size_t first_upper = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
          first_upper = values.size();
          continue;
        }
        const std::size_t k = DyadicDataset::pair_index(i, j, n);
        if (!dataset.mask()[k]) continue;
        values.push_back(dataset.values()[k]);
        weights.push_back(weight(j));
      }
      const auto count = static_cast<Eigen::Index>(values.size());
      if (count == 0) continue;
      block.resize(count, static_cast<Eigen::Index>(d));
      for (std::size_t m = 0; m < d; ++m) {
        ops.eval(params[m], values,
                 std::span<double>(block.col(static_cast<Eigen::Index>(m)).data(),
                                   values.size()));
      }
      neighbour_weight = Eigen::Map<const Eigen::VectorXd>(weights.data(), count);
      sums.rows.row(static_cast<Eigen::Index>(i)) = (block.transpose() * neighbour_weight).transpose();

      const auto upper = count - static_cast<Eigen::Index>(first_upper);
      if (upper > 0) {
        Eigen::MatrixXd scaled = block.bottomRows(upper);
        for (Eigen::Index r = 0; r < upper; ++r) {
          scaled.row(r) *= weight(i) * neighbour_weight(static_cast<Eigen::Index>(first_upper) + r);
        }
        gram.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
      }
    }
    partial_gram[g] = std::move(gram);
  });

  sums.gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (const auto& partial : partial_gram) sums.gram += partial;
  sums.gram = sums.gram.selfadjointView<Eigen::Lower>();

  const double scale = missing_scale(dataset);
  sums.rows *= scale;
  sums.gram *= scale * scale;
  sums.total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    sums.total += 0.5 * weight(i) * sums.rows.row(static_cast<Eigen::Index>(i)).transpose();
  }
  return sums;
}

}  // namespace dyadic
