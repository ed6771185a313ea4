#pragma once

#include "dyadic/simd.hpp"

namespace dyadic::simd::detail {

// Compiled-in variants; they do not check CPU support.
const Ops* avx2_compiled();
const Ops* neon_compiled();

}  // namespace dyadic::simd::detail
