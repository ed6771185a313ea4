#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "dyadic/bandwidth.hpp"
#include "dyadic/error.hpp"
#include "support.hpp"

using namespace dyadic;

TEST_CASE("type-7 quantiles") {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  CHECK(sample_quantile(x, 0.0) == 1.0);
  CHECK(sample_quantile(x, 1.0) == 4.0);
  CHECK(sample_quantile(x, 0.25) == doctest::Approx(1.75));
  CHECK(sample_quantile(x, 0.75) == doctest::Approx(3.25));
  CHECK(sample_quantile(std::vector<double>{5.0}, 0.3) == 5.0);
  CHECK_THROWS_AS(sample_quantile(std::vector<double>{}, 0.5), InputError);
}

TEST_CASE("rule-of-thumb constants") {
  CHECK(rot_constant(KernelFamily::epanechnikov) == 2.435);
  CHECK(rot_constant(KernelFamily::triangular) == 2.576);
  CHECK(rot_constant(KernelFamily::uniform) == doctest::Approx(1.843).epsilon(1e-3));
}

TEST_CASE("rule of thumb by hand") {
  // Values 0..5 over the 6 pairs of a 4-node network.
  const auto data = DyadicDataset::complete(4, {0.0, 1.0, 2.0, 3.0, 4.0, 5.0});
  const double sd = std::sqrt(17.5 / 5.0);
  const double iqr = 3.75 - 1.25;
  const double expected = 2.435 * std::min(sd, iqr / 1.349) * std::pow(6.0, -0.2);
  const auto h = rot_bandwidth(data, KernelFamily::epanechnikov);
  CHECK(h.h == doctest::Approx(expected).epsilon(1e-14));
  CHECK(h.method == BandwidthMethod::rule_of_thumb);
  CHECK(h.effective_pairs == 6.0);
}

TEST_CASE("rule of thumb is scale equivariant and ignores missing pairs") {
  testing::Gen g(83);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = testing::uniform_int(g, 5, 40);
    const auto data = testing::random_dataset(g, n, 0.3);
    const double c = testing::uniform(g, 0.1, 10.0);
    std::vector<double> scaled(data.values().begin(), data.values().end());
    for (auto& v : scaled) v *= c;
    const DyadicDataset other(n, scaled, std::vector<std::uint8_t>(data.mask().begin(), data.mask().end()));
    CHECK(rot_bandwidth(other, KernelFamily::triangular).h ==
          doctest::Approx(c * rot_bandwidth(data, KernelFamily::triangular).h).epsilon(1e-12));
  }
}

TEST_CASE("rule of thumb rejects degenerate data") {
  CHECK_THROWS_AS(rot_bandwidth(DyadicDataset::complete(3, {1.0, 1.0, 1.0}), KernelFamily::epanechnikov),
                  DegenerateInputError);
  CHECK_THROWS_AS(rot_bandwidth(DyadicDataset::complete(2, {1.0}), KernelFamily::epanechnikov),
                  DegenerateInputError);
}

TEST_CASE("AIMSE bandwidth for a normal density") {
  std::vector<double> x, f, f2, ones;
  for (int k = -4000; k <= 4000; ++k) {
    const double w = k * 0.002;
    const double phi = std::exp(-0.5 * w * w) / std::sqrt(2.0 * std::numbers::pi);
    x.push_back(w);
    f.push_back(phi);
    f2.push_back((w * w - 1.0) * phi);
    ones.push_back(1.0);
  }
  const auto h = aimse_bandwidth(x, f, f2, ones, KernelFamily::epanechnikov, 2, 100);
  // [2 * 1 * (3/5) / (2 * 3 / (8 sqrt(pi)) * (1/5)^2)]^(1/5).
  const double constant =
      std::pow(1.2 / (2.0 * 3.0 / (8.0 * std::sqrt(std::numbers::pi)) * 0.04), 0.2);
  CHECK(constant == doctest::Approx(2.345).epsilon(1e-3));
  CHECK(h.constant == doctest::Approx(constant).epsilon(1e-6));
  CHECK(h.h == doctest::Approx(constant * std::pow(4950.0, -0.2)).epsilon(1e-6));
  CHECK_THROWS_AS(aimse_bandwidth(x, f, std::vector<double>(x.size(), 0.0), ones,
                                  KernelFamily::epanechnikov, 2, 100),
                  DegenerateInputError);
}
