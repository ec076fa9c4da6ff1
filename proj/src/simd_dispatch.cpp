#include <cstdlib>
#include <stdexcept>
#include <string>

#include "seglock/simd.hpp"

namespace seglock::simd {
namespace {

constexpr Kernels kScalar{Isa::Scalar, &scalar::iou_one_to_many, &scalar::diou_frames,
                          &scalar::decode_bounds};
#if defined(SEGLOCK_HAVE_AVX2)
constexpr Kernels kAvx2{Isa::Avx2, &avx2::iou_one_to_many, &avx2::diou_frames,
                        &avx2::decode_bounds};
#endif

const Kernels& select() {
  if (const char* forced = std::getenv("SEGLOCK_SIMD")) {
    const std::string name = forced;
    if (name == "scalar") return kScalar;
    if (name == "avx2" && isa_supported(Isa::Avx2)) return kernels_for(Isa::Avx2);
  }
  if (isa_supported(Isa::Avx2)) return kernels_for(Isa::Avx2);
  return kScalar;
}

}  // namespace

std::string to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(SEGLOCK_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const Kernels& kernels_for(Isa isa) {
  if (!isa_supported(isa)) throw std::runtime_error("ISA not supported: " + to_string(isa));
#if defined(SEGLOCK_HAVE_AVX2)
  if (isa == Isa::Avx2) return kAvx2;
#endif
  return kScalar;
}

const Kernels& kernels() {
  static const Kernels& active = select();
  return active;
}

}  // namespace seglock::simd
