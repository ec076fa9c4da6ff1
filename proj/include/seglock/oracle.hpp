#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seglock/core.hpp"
#include "seglock/fuse.hpp"
#include "seglock/metrics.hpp"

namespace seglock {

/// SplitMix64. State transition: state += 0x9E3779B97F4A7C15; the output is
/// the state passed through the (30, 27, 31) xor-shift-multiply finalizer
/// with multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB.
/// Child streams are derived as SplitMix64(mix(state ^ mix(stream + golden))).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller (cosine branch only).
  double normal();
  /// Exponential with the given mean.
  double exponential(double mean);
  /// Uniform integer in [lo, hi].
  std::int64_t integer(std::int64_t lo, std::int64_t hi);

  SplitMix64 split(std::uint64_t stream) const;
  std::uint64_t state() const { return state_; }

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t state_;
};

struct ModelSpec {
  std::string name;
  ScoreSpace space = ScoreSpace::Probability;
};

struct SynthConfig {
  std::size_t n_videos = 100;
  double min_duration = 5.0;
  double max_duration = 10.0;
  /// Segment count range for fake videos; real videos carry none. A fake
  /// video always receives at least one segment.
  int min_segments = 0;
  int max_segments = 3;
  double segment_duration_mean = 0.33;
  /// Durations are min + Exp(mean - min), which keeps every segment long
  /// enough to contain a frame center at 40 ms resolution.
  double segment_duration_min = 0.08;
  /// Probabilities for Real, FakeAudio, FakeVisual, FakeBoth.
  std::array<double, 4> modality_mix{0.25, 0.25, 0.25, 0.25};
  std::uint64_t seed = 0;

  void validate() const;
};

/// Deterministic, non-overlapping synthetic ground truth. Video v draws from
/// SplitMix64(seed).split(v), so output does not depend on thread count.
std::vector<VideoAnnotation> synth_truth(const SynthConfig& cfg, unsigned threads = 1);

struct PredictionNoise {
  double jitter_std = 0.0;  // seconds, Gaussian boundary noise
  double noise_rate = 0.0;  // per-slot probability of a spurious segment (3 slots per video)
  double miss_rate = 0.0;   // probability of dropping each ground-truth segment
};

struct ModelPredictions {
  ModelSpec model;
  PredictionSet predictions;
};

/// Perturbed copies of the ground truth, one set per model. Confidence falls
/// with the jitter magnitude: p = 0.5 + 0.45 * exp(-(|ds| + |de|) / 0.05),
/// emitted as p or logit(p) according to the model's score space. Random
/// draws are taken unconditionally so that sweeping one parameter leaves the
/// remaining noise stream fixed.
std::vector<ModelPredictions> synth_predictions(const std::vector<VideoAnnotation>& truth,
                                                const std::vector<ModelSpec>& models,
                                                const PredictionNoise& noise, std::uint64_t seed,
                                                unsigned threads = 1);

/// Logit assigned to frames outside every predicted segment.
inline constexpr double kBackgroundLogit = -4.0;

/// Renders segments onto a frame grid the way a localization head would:
/// frames whose center lies in a segment carry its score (as a logit) and the
/// offsets to its boundaries; other frames carry the background logit and
/// zero offsets. Frames with centers past `duration` are padding.
FrameGrid rasterize(std::span<const Segment> segments, double duration, double resolution,
                    ScoreSpace space);

// Brute-force reference evaluators. These are written independently of the
// fast paths and are only meant for tests.

double ref_iou(const Segment& a, const Segment& b);
double ref_auc(std::span<const double> scores, const std::vector<bool>& labels);
std::vector<Segment> ref_soft_nms(std::span<const Segment> proposals, const SoftNmsConfig& cfg);
double ref_ap(const PredictionSet& predictions, const TruthSet& truth, double iou_threshold);
double ref_ar(const PredictionSet& predictions, const TruthSet& truth, int n,
              std::span<const double> iou_set);

}  // namespace seglock
