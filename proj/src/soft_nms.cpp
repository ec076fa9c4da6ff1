#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "seglock/fuse.hpp"
#include "seglock/simd.hpp"

namespace seglock {

std::vector<Segment> soft_nms(std::span<const Segment> proposals, const SoftNmsConfig& cfg) {
  if (!(cfg.sigma > 0.0)) throw InputError("soft_nms: sigma must be positive");

  // Survivors kept in structure-of-arrays form, in input order.
  std::vector<double> starts, ends, scores;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const Segment& p = proposals[i];
    validate(p);
    if (p.score < cfg.pre_threshold) continue;
    starts.push_back(p.start);
    ends.push_back(p.end);
    scores.push_back(p.score);
  }

  const std::size_t limit = cfg.max_output.value_or(starts.size());
  const auto& kernels = simd::kernels();
  std::vector<double> overlap(starts.size());
  std::vector<Segment> kept;
  kept.reserve(std::min(limit, starts.size()));

  while (!starts.empty() && kept.size() < limit) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < starts.size(); ++i) {
      if (scores[i] != scores[best]) {
        if (scores[i] > scores[best]) best = i;
      } else if (starts[i] != starts[best]) {
        if (starts[i] < starts[best]) best = i;
      } else if (ends[i] < ends[best]) {
        best = i;
      }
      // Remaining full ties keep the earlier input position.
    }
    const Segment selected{starts[best], ends[best], scores[best]};
    kept.push_back(selected);

    // Drop the selection while preserving input order.
    const std::size_t n = starts.size() - 1;
    for (std::size_t i = best; i < n; ++i) {
      starts[i] = starts[i + 1];
      ends[i] = ends[i + 1];
      scores[i] = scores[i + 1];
    }
    starts.pop_back();
    ends.pop_back();
    scores.pop_back();

    kernels.iou_one_to_many(selected.start, selected.end, starts.data(), ends.data(),
                            overlap.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      if (overlap[i] > 0.0) scores[i] *= std::exp(-(overlap[i] * overlap[i]) / cfg.sigma);
    }
  }
  return kept;
}

}  // namespace seglock
