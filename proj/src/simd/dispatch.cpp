#include <atomic>
#include <cstdlib>

#include "dyadic/error.hpp"
#include "simd_impl.hpp"

namespace dyadic::simd {
namespace {

const Ops* detect() {
  if (const char* forced = std::getenv("DYADIC_SIMD")) {
    const std::string_view name(forced);
    if (name == "scalar") return &scalar_ops();
    if (name == "avx2" && avx2_ops()) return avx2_ops();
    if (name == "neon" && neon_ops()) return neon_ops();
  }
  if (const Ops* ops = avx2_ops()) return ops;
  if (const Ops* ops = neon_ops()) return ops;
  return &scalar_ops();
}

std::atomic<const Ops*>& current() {
  static std::atomic<const Ops*> ops{detect()};
  return ops;
}

}  // namespace

KernelParams make_params(const BoundaryKernel& kernel, const KernelSpec& spec) {
  return {spec.family,
          kernel.center,
          1.0 / spec.bandwidth,
          kernel.lower,
          kernel.upper,
          kernel.coefficients.data(),
          static_cast<int>(kernel.coefficients.size())};
}

const Ops* avx2_ops() {
#if defined(__x86_64__) || defined(_M_X64)
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? detail::avx2_compiled() : nullptr;
#else
  return nullptr;
#endif
}

const Ops* neon_ops() { return detail::neon_compiled(); }

const Ops& active_ops() { return *current().load(std::memory_order_acquire); }

void select_ops(std::string_view name) {
  const Ops* ops = nullptr;
  if (name == "auto") {
    ops = avx2_ops() ? avx2_ops() : neon_ops() ? neon_ops() : &scalar_ops();
  } else if (name == "scalar") {
    ops = &scalar_ops();
  } else if (name == "avx2") {
    ops = avx2_ops();
  } else if (name == "neon") {
    ops = neon_ops();
  }
  if (!ops) throw InputError("SIMD variant '" + std::string(name) + "' is not available");
  current().store(ops, std::memory_order_release);
}

std::vector<std::string> available_ops() {
  std::vector<std::string> names{"scalar"};
  if (avx2_ops()) names.emplace_back("avx2");
  if (neon_ops()) names.emplace_back("neon");
  return names;
}

}  // namespace dyadic::simd
