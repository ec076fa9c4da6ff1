#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace seglock {

/// Raised for malformed or contract-violating inputs (CLI exit code 2).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a metric has no defined value, e.g. no ground truth (CLI exit code 3).
class MetricUndefined : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A scored time interval in seconds. The score's meaning depends on the
/// ScoreSpace of whoever produced it.
struct Segment {
  double start = 0.0;
  double end = 0.0;
  double score = 0.0;

  double length() const { return end - start; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

enum class ScoreSpace { Probability, Logit };

enum class Modality { Real, FakeAudio, FakeVisual, FakeBoth };

std::string to_string(ScoreSpace space);
std::string to_string(Modality modality);
ScoreSpace parse_score_space(const std::string& text);
Modality parse_modality(const std::string& text);

/// Throws InputError unless start <= end and all fields are finite.
void validate(const Segment& segment);

/// Per-frame head output at a fixed temporal resolution. Frame i covers
/// [i*resolution, (i+1)*resolution) and is centered at (i+0.5)*resolution.
class FrameGrid {
 public:
  FrameGrid() = default;
  FrameGrid(double resolution, std::vector<double> scores, std::vector<double> start_offsets,
            std::vector<double> end_offsets, std::vector<bool> valid);

  double resolution() const { return resolution_; }
  std::size_t n_frames() const { return scores_.size(); }
  double center(std::size_t frame) const {
    return (static_cast<double>(frame) + 0.5) * resolution_;
  }

  std::span<const double> scores() const { return scores_; }
  std::span<const double> start_offsets() const { return start_offsets_; }
  std::span<const double> end_offsets() const { return end_offsets_; }
  const std::vector<bool>& valid() const { return valid_; }

 private:
  double resolution_ = 0.04;
  std::vector<double> scores_;
  std::vector<double> start_offsets_;
  std::vector<double> end_offsets_;
  std::vector<bool> valid_;
};

struct VideoAnnotation {
  std::string video_id;
  double duration = 0.0;
  Modality modality = Modality::Real;
  std::vector<Segment> fake_segments;

  /// Throws InputError on bounds violations or a modality/segment mismatch.
  void validate() const;
};

struct MetricConfig {
  std::vector<double> ap_iou_thresholds{0.5, 0.75, 0.9, 0.95};
  std::vector<int> ar_n_values{50, 30, 20, 10, 5};
  std::vector<double> ar_iou_set = default_ar_iou_set();
  double ap_weight = 1.0 / 8.0;
  double ar_weight = 1.0 / 10.0;

  static std::vector<double> default_ar_iou_set();
};

/// 1-D intersection over union of two closed intervals. Zero-length
/// intervals give 0 against everything.
double iou(const Segment& a, const Segment& b);

/// Overflow-safe logistic function.
double sigmoid(double x);

/// ln(1 + exp(x)) without overflow.
double log1p_exp(double x);

}  // namespace seglock
