// Compiled with -mavx2 only (no FMA) so each lane rounds exactly like the
// scalar kernels.

#include <immintrin.h>

#include <algorithm>
#include <cstring>

#include "seglock/simd.hpp"

namespace seglock::simd::avx2 {
namespace {

// Expands 4 mask bytes into a full-width lane mask (non-zero byte -> all ones).
inline __m256d load_mask4(const std::uint8_t* bytes) {
  std::int32_t packed;
  std::memcpy(&packed, bytes, sizeof(packed));
  const __m256i wide = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(packed));
  const __m256i ones = _mm256_cmpgt_epi64(wide, _mm256_setzero_si256());
  return _mm256_castsi256_pd(ones);
}

inline void store_mask4(std::uint8_t* bytes, __m256d mask) {
  const int bits = _mm256_movemask_pd(mask);
  for (int k = 0; k < 4; ++k) bytes[k] = static_cast<std::uint8_t>((bits >> k) & 1);
}

}  // namespace

void iou_one_to_many(double start, double end, const double* starts, const double* ends,
                     double* out, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(start);
  const __m256d ve = _mm256_set1_pd(end);
  const __m256d la = _mm256_set1_pd(end - start);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d la_pos = _mm256_cmp_pd(la, zero, _CMP_GT_OQ);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d bs = _mm256_loadu_pd(starts + i);
    const __m256d be = _mm256_loadu_pd(ends + i);
    const __m256d lb = _mm256_sub_pd(be, bs);
    const __m256d inter = _mm256_sub_pd(_mm256_min_pd(ve, be), _mm256_max_pd(vs, bs));
    const __m256d value = _mm256_div_pd(inter, _mm256_sub_pd(_mm256_add_pd(la, lb), inter));
    __m256d ok = _mm256_and_pd(la_pos, _mm256_cmp_pd(lb, zero, _CMP_GT_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(inter, zero, _CMP_GT_OQ));
    _mm256_storeu_pd(out + i, _mm256_and_pd(ok, value));
  }
  if (i < n) scalar::iou_one_to_many(start, end, starts + i, ends + i, out + i, n - i);
}

void diou_frames(const double* pred_start, const double* pred_end, const double* target_start,
                 const double* target_end, const std::uint8_t* mask, double* loss,
                 double* grad_start, double* grad_end, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d half = _mm256_set1_pd(0.5);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(pred_start + i);
    const __m256d b = _mm256_loadu_pd(pred_end + i);
    const __m256d ta = _mm256_loadu_pd(target_start + i);
    const __m256d tb = _mm256_loadu_pd(target_end + i);
    const __m256d inter = _mm256_add_pd(_mm256_min_pd(a, ta), _mm256_min_pd(b, tb));
    const __m256d enc = _mm256_add_pd(_mm256_max_pd(a, ta), _mm256_max_pd(b, tb));
    const __m256d d = _mm256_mul_pd(_mm256_sub_pd(_mm256_sub_pd(b, a), _mm256_sub_pd(tb, ta)), half);
    const __m256d enc2 = _mm256_mul_pd(enc, enc);
    const __m256d enc3 = _mm256_mul_pd(enc2, enc);
    const __m256d dd = _mm256_mul_pd(d, d);

    const __m256d value =
        _mm256_add_pd(_mm256_sub_pd(one, _mm256_div_pd(inter, enc)), _mm256_div_pd(dd, enc2));

    const __m256d di_da = _mm256_and_pd(_mm256_cmp_pd(a, ta, _CMP_LT_OQ), one);
    const __m256d dc_da = _mm256_sub_pd(one, di_da);
    const __m256d di_db = _mm256_and_pd(_mm256_cmp_pd(b, tb, _CMP_LT_OQ), one);
    const __m256d dc_db = _mm256_sub_pd(one, di_db);

    const __m256d diou_da = _mm256_div_pd(
        _mm256_sub_pd(_mm256_mul_pd(di_da, enc), _mm256_mul_pd(inter, dc_da)), enc2);
    const __m256d diou_db = _mm256_div_pd(
        _mm256_sub_pd(_mm256_mul_pd(di_db, enc), _mm256_mul_pd(inter, dc_db)), enc2);
    const __m256d two_dd = _mm256_mul_pd(two, dd);
    const __m256d neg_d = _mm256_sub_pd(zero, d);
    const __m256d dp_da = _mm256_sub_pd(_mm256_div_pd(neg_d, enc2),
                                        _mm256_div_pd(_mm256_mul_pd(two_dd, dc_da), enc3));
    const __m256d dp_db = _mm256_sub_pd(_mm256_div_pd(d, enc2),
                                        _mm256_div_pd(_mm256_mul_pd(two_dd, dc_db), enc3));

    const __m256d use = _mm256_and_pd(load_mask4(mask + i), _mm256_cmp_pd(enc, zero, _CMP_GT_OQ));
    _mm256_storeu_pd(loss + i, _mm256_and_pd(use, value));
    _mm256_storeu_pd(grad_start + i, _mm256_and_pd(use, _mm256_sub_pd(dp_da, diou_da)));
    _mm256_storeu_pd(grad_end + i, _mm256_and_pd(use, _mm256_sub_pd(dp_db, diou_db)));
  }
  if (i < n) {
    scalar::diou_frames(pred_start + i, pred_end + i, target_start + i, target_end + i, mask + i,
                        loss + i, grad_start + i, grad_end + i, n - i);
  }
}

void decode_bounds(double resolution, double duration, const double* start_offsets,
                   const double* end_offsets, const std::uint8_t* valid, double* start,
                   double* end, std::uint8_t* keep, std::size_t n) {
  const __m256d res = _mm256_set1_pd(resolution);
  const __m256d dur = _mm256_set1_pd(duration);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d step = _mm256_set1_pd(4.0);
  __m256d index = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d c = _mm256_mul_pd(_mm256_add_pd(index, half), res);
    // max(x, 0) with x first so that the result matches std::max(x, 0.0) lane-wise.
    const __m256d s =
        _mm256_min_pd(_mm256_max_pd(_mm256_sub_pd(c, _mm256_loadu_pd(start_offsets + i)), zero), dur);
    const __m256d e =
        _mm256_min_pd(_mm256_max_pd(_mm256_add_pd(c, _mm256_loadu_pd(end_offsets + i)), zero), dur);
    _mm256_storeu_pd(start + i, s);
    _mm256_storeu_pd(end + i, e);
    store_mask4(keep + i, _mm256_and_pd(load_mask4(valid + i), _mm256_cmp_pd(e, s, _CMP_GT_OQ)));
    index = _mm256_add_pd(index, step);
  }
  for (; i < n; ++i) {
    const double c = (static_cast<double>(i) + 0.5) * resolution;
    const double s = std::min(std::max(c - start_offsets[i], 0.0), duration);
    const double e = std::min(std::max(c + end_offsets[i], 0.0), duration);
    start[i] = s;
    end[i] = e;
    keep[i] = (valid[i] != 0 && e > s) ? 1 : 0;
  }
}

}  // namespace seglock::simd::avx2
