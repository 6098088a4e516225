#pragma once

#include "igkit/simd/kernels.hpp"

// Per-variant tables; each is defined in its own TU and only declared where
// the build enables it.
namespace igkit::simd {
namespace scalar {
const KernelTable& table();
}
#if IGKIT_HAVE_X86_VARIANTS
namespace avx2 {
const KernelTable& table();
}
namespace avx512 {
const KernelTable& table();
}
#endif
#if IGKIT_HAVE_NEON_VARIANT
namespace neon {
const KernelTable& table();
}
#endif
}  // namespace igkit::simd
