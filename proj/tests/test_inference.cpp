#include <doctest.h>

#include <boost/math/distributions/normal.hpp>

#include "dyadic/error.hpp"
#include "dyadic/inference.hpp"
#include "dyadic/parallel.hpp"
#include "support.hpp"

using namespace dyadic;

namespace {

PsdCovMatrix psd_from(const Eigen::MatrixXd& m) {
  const auto d = static_cast<std::size_t>(m.rows());
  const auto grid = d == 1 ? EvaluationGrid({0.0}, {}) : EvaluationGrid::uniform({}, d);
  return PsdCovMatrix{grid, m, 0.0, 0.0, "raw", {}};
}

DensityEstimate flat_estimate(const EvaluationGrid& grid, double value) {
  return DensityEstimate{grid, std::vector<double>(grid.size(), value), KernelSpec{}, 1, 1.0};
}

double z(double p) { return boost::math::quantile(boost::math::normal(), p); }

}  // namespace

TEST_CASE("single-point quantile is the two-sided normal quantile") {
  const auto psd = psd_from(Eigen::MatrixXd::Constant(1, 1, 0.3));
  const double q = gaussian_quantile(psd, 0.05, 100000, 7);
  CHECK(q >= 1.93);
  CHECK(q <= 1.99);
}

TEST_CASE("independent coordinates follow the product formula") {
  const auto psd = psd_from(Eigen::MatrixXd::Identity(10, 10) * 2.5);
  const double q = gaussian_quantile(psd, 0.05, 100000, 11);
  CHECK(std::fabs(q - z((1.0 + std::pow(0.95, 0.1)) / 2.0)) < 0.02);
}

TEST_CASE("quantiles are order statistics") {
  std::vector<double> draws(200);
  for (std::size_t r = 0; r < draws.size(); ++r) draws[r] = static_cast<double>(r + 1);
  CHECK(quantile_from_draws(draws, 0.05) == 190.0);
  CHECK(quantile_from_draws(draws, 0.10) == 180.0);
  CHECK(quantile_from_draws(draws, 0.001) == 200.0);
  CHECK(quantile_from_draws(draws, 0.999) == 1.0);
}

TEST_CASE("quantile is monotone in alpha and dominates the pointwise value") {
  testing::Gen g(89);
  for (int rep = 0; rep < 5; ++rep) {
    const auto d = static_cast<Eigen::Index>(testing::uniform_int(g, 1, 15));
    Eigen::MatrixXd f(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) f(r, c) = testing::uniform(g, -1, 1);
    }
    const auto psd = psd_from(f * f.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d));
    const auto draws = draw_sup_statistics(psd, 4000, 3);
    double previous = 0.0;
    for (double alpha : {0.5, 0.2, 0.1, 0.05, 0.01}) {
      const double q = quantile_from_draws(draws.maxima, alpha);
      CHECK(q >= previous);
      previous = q;
    }
    CHECK(quantile_from_draws(draws.maxima, 0.05) >= z(0.975) - 0.1);
  }
}

TEST_CASE("resampling is deterministic across runs and thread counts") {
  testing::Gen g(97);
  Eigen::MatrixXd f(12, 12);
  for (Eigen::Index r = 0; r < 12; ++r) {
    for (Eigen::Index c = 0; c < 12; ++c) f(r, c) = testing::uniform(g, -1, 1);
  }
  const auto psd = psd_from(f * f.transpose());
  set_thread_count(1);
  const auto a = draw_sup_statistics(psd, 3000, 5);
  set_thread_count(3);
  const auto b = draw_sup_statistics(psd, 3000, 5);
  set_thread_count(0);
  CHECK(a.maxima == b.maxima);
  CHECK(draw_sup_statistics(psd, 3000, 6).maxima != a.maxima);
}

TEST_CASE("zero-variance points are flagged and excluded") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  m(1, 1) = 0.0;
  const auto psd = psd_from(m);
  const auto draws = draw_sup_statistics(psd, 1000, 1);
  CHECK(draws.zero_variance == std::vector<std::uint8_t>{0, 1, 0});
  const auto band = uniform_band(flat_estimate(psd.grid, 0.2), psd, 2.0);
  CHECK(band.halfwidth[1] == 0.0);
  CHECK(band.zero_variance[1] == 1);
  CHECK_THROWS_AS(gaussian_quantile(psd_from(Eigen::MatrixXd::Zero(3, 3)), 0.05, 1000, 1),
                  DegenerateInputError);
}

TEST_CASE("indefinite correlation breaks the projector contract") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(gaussian_quantile(psd_from(m), 0.05, 1000, 1), NumericalError);
}

TEST_CASE("band algebra") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(4, 4);
  m.diagonal() << 0.04, 0.09, 0.01, 0.25;
  const auto psd = psd_from(m);
  const auto center = flat_estimate(psd.grid, 0.3);
  const auto collapsed = uniform_band(center, psd, 0.0);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(collapsed.lower(k) == 0.3);
    CHECK(collapsed.upper(k) == 0.3);
  }
  const auto band = uniform_band(center, psd, 2.5);
  auto scaled = psd;
  scaled.entries *= 9.0;
  const auto wide = uniform_band(center, scaled, 2.5);
  const auto pci = pointwise_intervals(center, psd, 0.05);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(band.halfwidth[k] == doctest::Approx(2.5 * std::sqrt(m(k, k))));
    CHECK(wide.halfwidth[k] == doctest::Approx(3.0 * band.halfwidth[k]));
    CHECK(pci.halfwidth[k] == doctest::Approx(z(0.975) * std::sqrt(m(k, k))));
    CHECK(pci.halfwidth[k] < band.halfwidth[k]);
  }
  const auto other = EvaluationGrid::uniform({-1.0, 1.0}, 4);
  CHECK_THROWS_AS(uniform_band(flat_estimate(other, 0.3), psd, 1.0), InputError);
}

TEST_CASE("bands nest across alpha on shared draws") {
  testing::Gen g(101);
  const auto data = testing::random_dataset(g, 60);
  RbcConfig config;
  config.draws = 2000;
  config.grid_size = 15;
  config.alpha = 0.05;
  const auto narrow = rbc_band(data, config, 9);
  config.alpha = 0.10;
  const auto wide = rbc_band(data, config, 9);
  for (std::size_t m = 0; m < 15; ++m) {
    CHECK(narrow.band.lower(m) <= wide.band.lower(m));
    CHECK(narrow.band.upper(m) >= wide.band.upper(m));
  }
}

TEST_CASE("single-point band matches the pointwise interval") {
  testing::Gen g(103);
  const auto data = testing::random_dataset(g, 50);
  RbcConfig config;
  config.grid_size = 1;
  config.draws = 100000;
  const auto r = rbc_band(data, config, 4);
  const auto pci = pointwise_intervals(r.estimate, r.covariance, 0.05);
  CHECK(r.band.halfwidth[0] == doctest::Approx(pci.halfwidth[0]).epsilon(0.02));
}

TEST_CASE("rbc pipeline") {
  testing::Gen g(107);
  const auto data = testing::random_dataset(g, 80, 0.1);
  RbcConfig config;
  config.draws = 1000;
  config.grid_size = 21;
  const auto a = rbc_band(data, config, 12);
  const auto b = rbc_band(data, config, 12);
  CHECK(a.band.lower(3) == b.band.lower(3));
  CHECK(a.band.halfwidth == b.band.halfwidth);
  CHECK(a.estimate.spec.order == 4);
  CHECK(a.bandwidth.h == rot_bandwidth(data, config.family).h);
  CHECK(a.estimate.values == fhat(data, a.estimate.spec, a.band.grid).values);
  for (double h : a.band.halfwidth) CHECK(h >= 0.0);

  config.p_prime = 2;
  CHECK_THROWS_AS(rbc_band(data, config, 1), InputError);
  config.p_prime = 5;
  CHECK_THROWS_AS(config.validate(), InputError);
  config.p_prime = 4;
  config.draws = 50;
  CHECK_THROWS_AS(config.validate(), InputError);
}

TEST_CASE("tau statistics") {
  const std::vector<double> diff{0.1, -0.3, 0.2};
  CHECK(tau_statistic(diff, TauNorm::sup, 0.5) == 0.3);
  CHECK(tau_statistic(diff, TauNorm::l2, 0.5) == doctest::Approx(std::sqrt(0.14 * 0.5)));
  CHECK(parse_tau_norm("2") == TauNorm::l2);
  CHECK(parse_tau_norm("inf") == TauNorm::sup);
  CHECK_THROWS_AS(parse_tau_norm("3"), InputError);
}

TEST_CASE("two-sample test on identical data") {
  testing::Gen g(109);
  const auto data = testing::random_dataset(g, 60);
  RbcConfig config;
  config.draws = 1000;
  config.grid_size = 20;
  for (auto norm : {TauNorm::l2, TauNorm::sup}) {
    const auto r = two_sample_test(data, data, norm, config, 3);
    CHECK(r.tau == 0.0);
    CHECK(r.critical_value > 0.0);
    CHECK_FALSE(r.reject);
    CHECK(r.bandwidth0 == r.bandwidth1);
  }
}

TEST_CASE("two-sample test detects a location shift") {
  testing::Gen g(113);
  const auto a = testing::random_dataset(g, 120, 0.0, -0.8, 0.7);
  const auto b = testing::random_dataset(g, 120, 0.0, 0.8, 0.7);
  RbcConfig config;
  config.draws = 1000;
  config.grid_size = 25;
  const auto r = two_sample_test(a, b, TauNorm::sup, config, 8);
  CHECK(r.reject);
  CHECK(r.reject == (r.tau >= r.critical_value));
}
