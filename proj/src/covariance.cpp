#include "dyadic/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "dyadic/error.hpp"

namespace dyadic {
namespace {

constexpr double kNormalizationFloor = 1e-14;

Eigen::MatrixXd symmetric_copy(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

// Projection onto the PSD cone in Frobenius geometry (eigenvalue clipping).
Eigen::MatrixXd clip_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd& q = eig.eigenvectors();
  return symmetric_copy(q * clipped.asDiagonal() * q.transpose());
}

bool is_psd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const auto& values = eig.eigenvalues();
  const double scale = values.cwiseAbs().maxCoeff();
  return values.minCoeff() >= -psd_tolerance(scale);
}

class Projector {
 public:
  Projector(const Eigen::MatrixXd& raw, std::vector<double> points, double lipschitz_bound,
            const PsdOptions& options)
      : raw_(raw), points_(std::move(points)), bound_(lipschitz_bound), options_(options) {
    const auto d = raw_.rows();
    scale_ = Eigen::MatrixXd::Zero(d, d);
    included_ = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        const double squared = raw_(i, i) + raw_(j, j);
        if (squared < -kNormalizationFloor) {
          throw NumericalError("covariance normalization Sigma(w,w) + Sigma(w',w') is negative");
        }
        if (squared > kNormalizationFloor) {
          scale_(i, j) = std::sqrt(squared);
          included_(i, j) = 1.0;
        } else if (i <= j) {
          excluded_.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        }
      }
    }
  }

  const auto& excluded() const { return excluded_; }

  double objective(const Eigen::MatrixXd& m) const {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (included_(i, j) == 0.0) continue;
        worst = std::max(worst, std::fabs(m(i, j) - raw_(i, j)) / scale_(i, j));
      }
    }
    return worst;
  }

  bool lipschitz_ok(const Eigen::MatrixXd& m) const {
    return max_row_slope(m, points_) <= bound_ * (1.0 + 1e-12);
  }

  // Scaling keeps PSD matrices PSD and shrinks every slope proportionally.
  Eigen::MatrixXd shrink_to_lipschitz(Eigen::MatrixXd m) const {
    const double slope = max_row_slope(m, points_);
    if (slope > bound_) m *= bound_ / slope * (1.0 - 1e-12);
    return m;
  }

  // Symmetric pairwise correction of violated neighbour differences.
  void lipschitz_correct(Eigen::MatrixXd& m) const {
    const auto d = m.rows();
    for (int sweep = 0; sweep < 50; ++sweep) {
      bool changed = false;
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index k = 0; k + 1 < d; ++k) {
          const double limit = bound_ * (points_[k + 1] - points_[k]);
          const double diff = m(i, k + 1) - m(i, k);
          if (std::fabs(diff) <= limit) continue;
          const double excess = 0.5 * (std::fabs(diff) - limit) * (diff > 0 ? 1.0 : -1.0);
          m(i, k + 1) -= excess;
          m(i, k) += excess;
          m(k + 1, i) = m(i, k + 1);
          m(k, i) = m(i, k);
          changed = true;
        }
      }
      if (!changed) return;
    }
  }

  Eigen::MatrixXd clamp_to_box(const Eigen::MatrixXd& m, double level) const {
    Eigen::MatrixXd out = m;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (included_(i, j) == 0.0) continue;
        const double radius = level * scale_(i, j);
        out(i, j) = std::clamp(m(i, j), raw_(i, j) - radius, raw_(i, j) + radius);
      }
    }
    return out;
  }

  // Dykstra's algorithm between the PSD cone and the Lipschitz set.
  Eigen::MatrixXd dykstra(const Eigen::MatrixXd& start) const {
    Eigen::MatrixXd x = start;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(x.rows(), x.cols());
    Eigen::MatrixXd q = p;
    Eigen::MatrixXd y = x;
    const double scale = std::max(raw_.norm(), std::numeric_limits<double>::min());
    for (int it = 0; it < options_.max_iterations; ++it) {
      y = clip_eigenvalues(x + p);
      p = x + p - y;
      Eigen::MatrixXd z = y + q;
      lipschitz_correct(z);
      q = y + q - z;
      const double residual = (z - x).norm() / scale;
      x = std::move(z);
      if (residual < options_.residual_tolerance && (x - y).norm() / scale < options_.residual_tolerance) break;
    }
    return shrink_to_lipschitz(clip_eigenvalues(x));
  }

  // Alternating projections between {|M - Sigma| <= level * den} and the
  // PSD cone. Returns a PSD, Lipschitz-feasible iterate whose objective is
  // at most `accept`, or nothing when the iterates stall.
  std::optional<Eigen::MatrixXd> feasible_at(double level, double accept,
                                             const Eigen::MatrixXd& start) const {
    Eigen::MatrixXd psd = start;
    double previous_gap = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int it = 0; it < options_.max_iterations; ++it) {
      Eigen::MatrixXd boxed = clamp_to_box(psd, level);
      if (!lipschitz_ok(boxed)) lipschitz_correct(boxed);
      psd = clip_eigenvalues(boxed);
      if (objective(psd) <= accept) {
        Eigen::MatrixXd candidate = shrink_to_lipschitz(psd);
        if (objective(candidate) <= accept) return candidate;
      }
      const double gap = (psd - boxed).norm();
      stalled = gap > (1.0 - 1e-3) * previous_gap ? stalled + 1 : 0;
      if (stalled >= 8) break;
      previous_gap = gap;
    }
    return std::nullopt;
  }

 private:
  const Eigen::MatrixXd& raw_;
  std::vector<double> points_;
  double bound_;
  PsdOptions options_;
  Eigen::MatrixXd scale_;
  Eigen::MatrixXd included_;
  std::vector<std::pair<std::size_t, std::size_t>> excluded_;
};

}  // namespace

double psd_tolerance(double spectral_scale) {
  return std::min(1e-8, 1e-10 * spectral_scale);
}

double max_row_slope(const Eigen::MatrixXd& m, const std::vector<double>& points) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k + 1 < m.cols(); ++k) {
    const double dw = points[static_cast<std::size_t>(k + 1)] - points[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      worst = std::max(worst, std::fabs(m(i, k + 1) - m(i, k)) / dw);
    }
  }
  return worst;
}

double sdp_objective(const Eigen::MatrixXd& candidate, const Eigen::MatrixXd& raw) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
      const double squared = raw(i, i) + raw(j, j);
      if (squared < -kNormalizationFloor) {
        throw NumericalError("covariance normalization Sigma(w,w) + Sigma(w',w') is negative");
      }
      if (squared <= kNormalizationFloor) continue;
      worst = std::max(worst, std::fabs(candidate(i, j) - raw(i, j)) / std::sqrt(squared));
    }
  }
  return worst;
}

CovMatrix sigma_hat_from_sums(const KernelSums& sums, std::size_t n, const EvaluationGrid& grid) {
  if (n < 3) throw DegenerateInputError("covariance estimation needs at least 3 nodes");
  const double nd = static_cast<double>(n);
  const Eigen::MatrixXd s = sums.rows / (nd - 1.0);
  const Eigen::VectorXd f = sums.total * (2.0 / (nd * (nd - 1.0)));
  Eigen::MatrixXd entries = (4.0 / (nd * nd)) * (s.transpose() * s) -
                            (4.0 / (nd * nd * (nd - 1.0) * (nd - 1.0))) * sums.gram -
                            ((4.0 * nd - 6.0) / (nd * (nd - 1.0))) * (f * f.transpose());
  CovMatrix cov{grid, symmetric_copy(entries), {}};
  for (Eigen::Index m = 0; m < cov.entries.rows(); ++m) {
    if (cov.entries(m, m) < 0.0) cov.negative_diagonal.push_back(static_cast<std::size_t>(m));
  }
  return cov;
}

CovMatrix sigma_hat(const DyadicDataset& dataset, const KernelSpec& spec,
                    const EvaluationGrid& grid) {
  if (dataset.n() < 3) throw DegenerateInputError("covariance estimation needs at least 3 nodes");
  return sigma_hat_from_sums(kernel_sums(dataset, spec, grid), dataset.n(), grid);
}

PsdCovMatrix psd_project(const CovMatrix& raw_cov, const LipschitzConstants& constants,
                         std::size_t n, double bandwidth, const PsdOptions& options) {
  const auto d = raw_cov.entries.rows();
  if (d == 0 || raw_cov.entries.cols() != d || static_cast<std::size_t>(d) != raw_cov.grid.size()) {
    throw InputError("covariance matrix does not match its grid");
  }
  if (n == 0 || !(bandwidth > 0.0)) throw InputError("invalid n or bandwidth for projection");
  Eigen::MatrixXd raw = symmetric_copy(raw_cov.entries);
  if (options.ridge) raw.diagonal().array() += 1e-12 * raw.trace() / static_cast<double>(d);

  const double nd = static_cast<double>(n);
  PsdCovMatrix out{raw_cov.grid, raw, 0.0,
                   4.0 * constants.bound * constants.lipschitz / (nd * bandwidth * bandwidth * bandwidth),
                   "raw", {}};
  Projector projector(raw, raw_cov.grid.points(), out.lipschitz_bound, options);
  out.excluded_pairs = projector.excluded();

  if (is_psd(raw) && projector.lipschitz_ok(raw)) return out;

  // Candidate set; the smallest objective wins.
  Eigen::MatrixXd best = clip_eigenvalues(raw);
  out.method = "eigen-clip";
  if (!projector.lipschitz_ok(best)) {
    Eigen::MatrixXd clipped = projector.shrink_to_lipschitz(best);
    Eigen::MatrixXd alternating = projector.dykstra(raw);
    if (projector.objective(alternating) < projector.objective(clipped)) {
      best = std::move(alternating);
      out.method = "dykstra";
    } else {
      best = std::move(clipped);
    }
  }
  double best_objective = projector.objective(best);

  double low = 0.0;
  double high = best_objective;
  while (high - low > options.bisection_tolerance * high && high > 0.0) {
    const double level = 0.5 * (low + high);
    auto found = projector.feasible_at(level, level + 0.25 * (high - low), best);
    if (!found) {
      low = level;
      continue;
    }
    const double achieved = projector.objective(*found);
    if (achieved < best_objective) {
      best = std::move(*found);
      best_objective = achieved;
      out.method = "sup-bisection";
    }
    high = std::min(high, achieved);
  }

  out.entries = std::move(best);
  out.objective = best_objective;
  return out;
}

}  // namespace dyadic
