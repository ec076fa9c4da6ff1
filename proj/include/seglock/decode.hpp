#pragma once

#include <span>
#include <vector>

#include "seglock/core.hpp"

namespace seglock {

/// One proposal per valid frame, clamped to [0, duration]. Probability-space
/// grids pass their logits through a sigmoid; logit-space grids keep the raw
/// value. Zero-length proposals are dropped. Output is sorted by descending
/// score, then ascending start, then ascending frame index.
std::vector<Segment> decode_grid(const FrameGrid& grid, double duration, ScoreSpace space);

/// File-level score from per-chunk scores: the maximum.
double chunk_max_score(std::span<const double> chunk_scores);

}  // namespace seglock
