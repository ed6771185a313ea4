#include <doctest.h>

#include <cmath>

#include "dyadic/simd.hpp"
#include "support.hpp"

using namespace dyadic;

namespace {

std::vector<const simd::Ops*> variants() {
  std::vector<const simd::Ops*> out;
  if (const auto* a = simd::avx2_ops()) out.push_back(a);
  if (const auto* n = simd::neon_ops()) out.push_back(n);
  return out;
}

}  // namespace

TEST_CASE("scalar reference follows kernel_value") {
  const KernelSpec spec{KernelFamily::triangular, 4, 0.3, {}};
  const auto k = build_boundary_kernel(spec, -1.9);
  const auto p = simd::make_params(k, spec);
  std::vector<double> s{-2.0, -1.95, -1.8, -1.61, 0.0};
  std::vector<double> out(s.size());
  simd::scalar_ops().eval(p, s, out);
  for (std::size_t r = 0; r < s.size(); ++r) CHECK(out[r] == simd::kernel_value(p, s[r]));
  CHECK(simd::scalar_ops().max_abs(std::vector<double>{}) == 0.0);
}

TEST_CASE("vector variants agree with the scalar reference") {
  testing::Gen g(29);
  const auto& ref = simd::scalar_ops();
  for (const auto* ops : variants()) {
    INFO(ops->name);
    for (auto family : {KernelFamily::epanechnikov, KernelFamily::triangular, KernelFamily::uniform}) {
      for (int order : {2, 4, 6}) {
        for (int rep = 0; rep < 20; ++rep) {
          const KernelSpec spec{family, order, testing::uniform(g, 0.05, 1.0), {}};
          const auto k = build_boundary_kernel(spec, testing::uniform(g, -2.0, 2.0));
          const auto p = simd::make_params(k, spec);
          const std::size_t len = testing::uniform_int(g, 0, 67);
          std::vector<double> s(len), w(len);
          for (std::size_t r = 0; r < len; ++r) {
            s[r] = k.center + spec.bandwidth * testing::uniform(g, -1.3, 1.3);
            w[r] = testing::uniform(g, 0.0, 2.0);
          }
          std::vector<double> a(len), b(len);
          ref.eval(p, s, a);
          ops->eval(p, s, b);
          for (std::size_t r = 0; r < len; ++r) {
            REQUIRE(b[r] == doctest::Approx(a[r]).epsilon(1e-13).scale(1.0 / spec.bandwidth));
            // Support membership is decided identically.
            REQUIRE((a[r] == 0.0) == (b[r] == 0.0));
          }
          const double sa = ref.sum(p, s, {});
          CHECK(ops->sum(p, s, {}) == doctest::Approx(sa).epsilon(1e-12).scale(1.0));
          const double swa = ref.sum(p, s, w);
          CHECK(ops->sum(p, s, w) == doctest::Approx(swa).epsilon(1e-12).scale(1.0));
          CHECK(ops->max_abs(a) == ref.max_abs(a));
        }
      }
    }
  }
}

TEST_CASE("variant results are reproducible") {
  const KernelSpec spec{KernelFamily::epanechnikov, 4, 0.2, {}};
  const auto k = build_boundary_kernel(spec, 0.5);
  const auto p = simd::make_params(k, spec);
  std::vector<double> s(1001);
  for (std::size_t r = 0; r < s.size(); ++r) s[r] = 0.3 + 0.0004 * static_cast<double>(r);
  const auto& ops = simd::active_ops();
  CHECK(ops.sum(p, s, {}) == ops.sum(p, s, {}));
}

TEST_CASE("variant selection") {
  const auto names = simd::available_ops();
  REQUIRE_FALSE(names.empty());
  CHECK(names.front() == "scalar");
  simd::select_ops("scalar");
  CHECK(std::string(simd::active_ops().name) == "scalar");
  simd::select_ops("auto");
  CHECK_THROWS(simd::select_ops("sse9"));
}
