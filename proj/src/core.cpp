#include "seglock/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace seglock {

std::string to_string(ScoreSpace space) {
  return space == ScoreSpace::Logit ? "logit" : "probability";
}

std::string to_string(Modality modality) {
  switch (modality) {
    case Modality::Real: return "real";
    case Modality::FakeAudio: return "fake_audio";
    case Modality::FakeVisual: return "fake_visual";
    case Modality::FakeBoth: return "fake_both";
  }
  return "real";
}

ScoreSpace parse_score_space(const std::string& text) {
  if (text == "probability") return ScoreSpace::Probability;
  if (text == "logit") return ScoreSpace::Logit;
  throw InputError("unknown score space '" + text + "' (expected probability|logit)");
}

Modality parse_modality(const std::string& text) {
  if (text == "real") return Modality::Real;
  if (text == "fake_audio") return Modality::FakeAudio;
  if (text == "fake_visual") return Modality::FakeVisual;
  if (text == "fake_both") return Modality::FakeBoth;
  throw InputError("unknown modality '" + text + "'");
}

void validate(const Segment& s) {
  if (!std::isfinite(s.start) || !std::isfinite(s.end) || !std::isfinite(s.score)) {
    throw InputError("segment has non-finite field");
  }
  if (s.start > s.end) {
    std::ostringstream msg;
    msg << "segment start " << s.start << " exceeds end " << s.end;
    throw InputError(msg.str());
  }
}

FrameGrid::FrameGrid(double resolution, std::vector<double> scores,
                     std::vector<double> start_offsets, std::vector<double> end_offsets,
                     std::vector<bool> valid)
    : resolution_(resolution),
      scores_(std::move(scores)),
      start_offsets_(std::move(start_offsets)),
      end_offsets_(std::move(end_offsets)),
      valid_(std::move(valid)) {
  if (!(resolution_ > 0.0) || !std::isfinite(resolution_)) {
    throw InputError("frame resolution must be positive");
  }
  const std::size_t n = scores_.size();
  if (start_offsets_.size() != n || end_offsets_.size() != n || valid_.size() != n) {
    throw InputError("frame grid arrays differ in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid_[i]) continue;
    if (!std::isfinite(scores_[i]) || !std::isfinite(start_offsets_[i]) ||
        !std::isfinite(end_offsets_[i])) {
      throw InputError("frame_index " + std::to_string(i) + ": non-finite value");
    }
    if (start_offsets_[i] < 0.0 || end_offsets_[i] < 0.0) {
      throw InputError("frame_index " + std::to_string(i) + ": negative offset");
    }
  }
}

void VideoAnnotation::validate() const {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw InputError("video '" + video_id + "': duration must be positive");
  }
  for (const auto& seg : fake_segments) {
    if (!(seg.start >= 0.0 && seg.start < seg.end && seg.end <= duration)) {
      std::ostringstream msg;
      msg << "video '" << video_id << "': fake segment [" << seg.start << ", " << seg.end
          << "] outside (0 <= start < end <= " << duration << ")";
      throw InputError(msg.str());
    }
  }
  if ((modality == Modality::Real) != fake_segments.empty()) {
    throw InputError("video '" + video_id +
                     "': modality 'real' must coincide with an empty fake_segments list");
  }
}

std::vector<double> MetricConfig::default_ar_iou_set() {
  std::vector<double> set;
  // Correctly rounded 0.50, 0.55, ..., 0.95.
  for (int k = 0; k < 10; ++k) set.push_back((50.0 + 5.0 * k) / 100.0);
  return set;
}

double iou(const Segment& a, const Segment& b) {
  const double la = a.end - a.start;
  const double lb = b.end - b.start;
  if (!(la > 0.0) || !(lb > 0.0)) return 0.0;
  const double inter = std::min(a.end, b.end) - std::max(a.start, b.start);
  if (!(inter > 0.0)) return 0.0;
  return inter / (la + lb - inter);
}

double sigmoid(double x) {
  // exp of a non-positive argument never overflows.
  const double e = std::exp(-std::abs(x));
  return x >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
}

double log1p_exp(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace seglock
