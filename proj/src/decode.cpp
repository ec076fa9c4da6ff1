#include "seglock/decode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "seglock/simd.hpp"

namespace seglock {

std::vector<Segment> decode_grid(const FrameGrid& grid, double duration, ScoreSpace space) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw InputError("decode_grid: duration must be positive");
  }
  const std::size_t n = grid.n_frames();
  std::vector<std::uint8_t> valid(n), keep(n);
  for (std::size_t i = 0; i < n; ++i) valid[i] = grid.valid()[i] ? 1 : 0;
  std::vector<double> starts(n), ends(n);
  simd::kernels().decode_bounds(grid.resolution(), duration, grid.start_offsets().data(),
                                grid.end_offsets().data(), valid.data(), starts.data(),
                                ends.data(), keep.data(), n);

  struct Ranked {
    Segment seg;
    std::size_t frame;
  };
  std::vector<Ranked> ranked;
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    const double raw = grid.scores()[i];
    const double score = space == ScoreSpace::Probability ? sigmoid(raw) : raw;
    ranked.push_back({{starts[i], ends[i], score}, i});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.seg.score != b.seg.score) return a.seg.score > b.seg.score;
    if (a.seg.start != b.seg.start) return a.seg.start < b.seg.start;
    return a.frame < b.frame;
  });

  std::vector<Segment> out;
  out.reserve(ranked.size());
  for (const auto& r : ranked) out.push_back(r.seg);
  return out;
}

double chunk_max_score(std::span<const double> chunk_scores) {
  if (chunk_scores.empty()) throw InputError("chunk_max_score: no chunks");
  for (double s : chunk_scores) {
    if (!std::isfinite(s)) throw InputError("chunk_max_score: non-finite chunk score");
  }
  return *std::max_element(chunk_scores.begin(), chunk_scores.end());
}

}  // namespace seglock
