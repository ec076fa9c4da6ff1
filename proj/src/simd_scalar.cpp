#include <algorithm>

#include "seglock/simd.hpp"

namespace seglock::simd::scalar {

void iou_one_to_many(double start, double end, const double* starts, const double* ends,
                     double* out, std::size_t n) {
  const double la = end - start;
  for (std::size_t i = 0; i < n; ++i) {
    const double lb = ends[i] - starts[i];
    const double inter = std::min(end, ends[i]) - std::max(start, starts[i]);
    const double value = inter / ((la + lb) - inter);
    out[i] = (la > 0.0 && lb > 0.0 && inter > 0.0) ? value : 0.0;
  }
}

void diou_frames(const double* pred_start, const double* pred_end, const double* target_start,
                 const double* target_end, const std::uint8_t* mask, double* loss,
                 double* grad_start, double* grad_end, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a = pred_start[i];
    const double b = pred_end[i];
    const double ta = target_start[i];
    const double tb = target_end[i];
    const double inter = std::min(a, ta) + std::min(b, tb);
    const double enc = std::max(a, ta) + std::max(b, tb);
    const double d = ((b - a) - (tb - ta)) * 0.5;
    const double enc2 = enc * enc;
    const double enc3 = enc2 * enc;
    const double dd = d * d;

    const double value = (1.0 - inter / enc) + dd / enc2;

    // Subgradient convention at a == ta: the overlap edge is treated as pinned.
    const double di_da = a < ta ? 1.0 : 0.0;
    const double dc_da = 1.0 - di_da;
    const double di_db = b < tb ? 1.0 : 0.0;
    const double dc_db = 1.0 - di_db;

    const double diou_da = (di_da * enc - inter * dc_da) / enc2;
    const double diou_db = (di_db * enc - inter * dc_db) / enc2;
    const double dp_da = (-d) / enc2 - ((2.0 * dd) * dc_da) / enc3;
    const double dp_db = d / enc2 - ((2.0 * dd) * dc_db) / enc3;

    const bool use = mask[i] != 0 && enc > 0.0;
    loss[i] = use ? value : 0.0;
    grad_start[i] = use ? dp_da - diou_da : 0.0;
    grad_end[i] = use ? dp_db - diou_db : 0.0;
  }
}

void decode_bounds(double resolution, double duration, const double* start_offsets,
                   const double* end_offsets, const std::uint8_t* valid, double* start,
                   double* end, std::uint8_t* keep, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double c = (static_cast<double>(i) + 0.5) * resolution;
    const double s = std::min(std::max(c - start_offsets[i], 0.0), duration);
    const double e = std::min(std::max(c + end_offsets[i], 0.0), duration);
    start[i] = s;
    end[i] = e;
    keep[i] = (valid[i] != 0 && e > s) ? 1 : 0;
  }
}

}  // namespace seglock::simd::scalar
