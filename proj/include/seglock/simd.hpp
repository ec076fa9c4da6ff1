#pragma once

// Data-parallel inner loops with a scalar reference and an AVX2 variant.
// Every variant performs the same IEEE operations in the same order per
// element, so results are bit-identical across instruction sets; reductions
// are left to the caller and done in a fixed serial order.

#include <cstddef>
#include <cstdint>
#include <string>

namespace seglock::simd {

enum class Isa { Scalar, Avx2 };

std::string to_string(Isa isa);

struct Kernels {
  Isa isa;

  /// out[i] = iou([start, end], [starts[i], ends[i]]).
  void (*iou_one_to_many)(double start, double end, const double* starts, const double* ends,
                          double* out, std::size_t n);

  /// Per-frame 1-D DIoU on center-anchored offsets. Both intervals contain
  /// the frame center, so overlap = min(a,ta) + min(b,tb) and the enclosing
  /// length equals the union. Writes the unreduced loss and its partials
  /// w.r.t. the predicted start/end offsets; frames with mask[i] == 0 get 0.
  void (*diou_frames)(const double* pred_start, const double* pred_end,
                      const double* target_start, const double* target_end,
                      const std::uint8_t* mask, double* loss, double* grad_start,
                      double* grad_end, std::size_t n);

  /// Proposal bounds for each frame: [clamp(c - start_off), clamp(c + end_off)]
  /// clamped to [0, duration]. keep[i] = valid[i] && end > start.
  void (*decode_bounds)(double resolution, double duration, const double* start_offsets,
                        const double* end_offsets, const std::uint8_t* valid, double* start,
                        double* end, std::uint8_t* keep, std::size_t n);
};

bool isa_supported(Isa isa);

/// Kernels for a specific ISA; throws std::runtime_error when unsupported.
const Kernels& kernels_for(Isa isa);

/// Best supported ISA, unless SEGLOCK_SIMD=scalar|avx2 overrides it.
const Kernels& kernels();

namespace scalar {
void iou_one_to_many(double start, double end, const double* starts, const double* ends,
                     double* out, std::size_t n);
void diou_frames(const double* pred_start, const double* pred_end, const double* target_start,
                 const double* target_end, const std::uint8_t* mask, double* loss,
                 double* grad_start, double* grad_end, std::size_t n);
void decode_bounds(double resolution, double duration, const double* start_offsets,
                   const double* end_offsets, const std::uint8_t* valid, double* start,
                   double* end, std::uint8_t* keep, std::size_t n);
}  // namespace scalar

#if defined(SEGLOCK_HAVE_AVX2)
namespace avx2 {
void iou_one_to_many(double start, double end, const double* starts, const double* ends,
                     double* out, std::size_t n);
void diou_frames(const double* pred_start, const double* pred_end, const double* target_start,
                 const double* target_end, const std::uint8_t* mask, double* loss,
                 double* grad_start, double* grad_end, std::size_t n);
void decode_bounds(double resolution, double duration, const double* start_offsets,
                   const double* end_offsets, const std::uint8_t* valid, double* start,
                   double* end, std::uint8_t* keep, std::size_t n);
}  // namespace avx2
#endif

}  // namespace seglock::simd
