#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "seglock/oracle.hpp"
#include "seglock/parallel.hpp"

namespace seglock {

std::uint64_t SplitMix64::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  return mix(state_);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double SplitMix64::exponential(double mean) { return -mean * std::log(1.0 - uniform()); }

std::int64_t SplitMix64::integer(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<double>(hi - lo + 1);
  const auto k = static_cast<std::int64_t>(uniform() * span);
  return lo + std::min<std::int64_t>(k, hi - lo);
}

SplitMix64 SplitMix64::split(std::uint64_t stream) const {
  return SplitMix64(mix(state_ ^ mix(stream + 0x9E3779B97F4A7C15ULL)));
}

void SynthConfig::validate() const {
  if (!(min_duration > 0.0 && max_duration >= min_duration)) {
    throw InputError("synth: duration_range must be positive and ordered");
  }
  if (min_segments < 0 || max_segments < min_segments) {
    throw InputError("synth: segments_per_video must be an ordered non-negative range");
  }
  if (!(segment_duration_min > 0.0 && segment_duration_mean > segment_duration_min)) {
    throw InputError("synth: need 0 < segment_duration_min < segment_duration_mean");
  }
  double total = 0.0;
  for (double p : modality_mix) {
    if (!(p >= 0.0)) throw InputError("synth: modality probabilities must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InputError("synth: modality probabilities must sum to 1");
  if (max_segments == 0 && modality_mix[0] < 1.0) {
    throw InputError("synth: fake modalities need max segments >= 1");
  }
}

namespace {

VideoAnnotation synth_video(const SynthConfig& cfg, std::size_t index) {
  SplitMix64 rng = SplitMix64(cfg.seed).split(index);
  VideoAnnotation ann;
  char name[32];
  std::snprintf(name, sizeof(name), "vid_%06zu", index);
  ann.video_id = name;
  ann.duration = cfg.min_duration + (cfg.max_duration - cfg.min_duration) * rng.uniform();

  const double pick = rng.uniform();
  double acc = 0.0;
  int modality = 3;
  for (int k = 0; k < 4; ++k) {
    acc += cfg.modality_mix[static_cast<std::size_t>(k)];
    if (pick < acc) {
      modality = k;
      break;
    }
  }
  ann.modality = static_cast<Modality>(modality);
  if (ann.modality == Modality::Real) return ann;

  const auto count = static_cast<std::size_t>(
      rng.integer(std::max(1, cfg.min_segments), std::max(1, cfg.max_segments)));
  const double excess_mean = cfg.segment_duration_mean - cfg.segment_duration_min;
  // Keep at least half of the video genuine.
  const double budget = 0.5 * ann.duration;

  std::vector<double> lengths(count);
  double total = 0.0;
  for (int attempt = 0; attempt < 16; ++attempt) {
    total = 0.0;
    for (auto& len : lengths) {
      len = cfg.segment_duration_min + rng.exponential(excess_mean);
      total += len;
    }
    if (total <= budget) break;
  }
  if (total > budget) {
    for (auto& len : lengths) len *= budget / total;
    total = budget;
  }

  // Split the free time into count+1 gaps with exponential weights.
  std::vector<double> gaps(count + 1);
  double weight_sum = 0.0;
  for (auto& g : gaps) {
    g = rng.exponential(1.0);
    weight_sum += g;
  }
  const double free_time = ann.duration - total;
  double cursor = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    cursor += free_time * gaps[k] / weight_sum;
    const double start = cursor;
    cursor += lengths[k];
    ann.fake_segments.push_back({start, std::min(cursor, ann.duration), 1.0});
  }
  return ann;
}

double to_logit(double p) {
  p = std::clamp(p, 1e-15, 1.0 - 1e-15);
  return std::log(p) - std::log1p(-p);
}

}  // namespace

std::vector<VideoAnnotation> synth_truth(const SynthConfig& cfg, unsigned threads) {
  cfg.validate();
  std::vector<VideoAnnotation> out(cfg.n_videos);
  parallel_for(cfg.n_videos, threads, [&](std::size_t v) { out[v] = synth_video(cfg, v); });
  return out;
}

std::vector<ModelPredictions> synth_predictions(const std::vector<VideoAnnotation>& truth,
                                                const std::vector<ModelSpec>& models,
                                                const PredictionNoise& noise, std::uint64_t seed,
                                                unsigned threads) {
  if (!(noise.jitter_std >= 0.0) || !(noise.noise_rate >= 0.0 && noise.noise_rate <= 1.0) ||
      !(noise.miss_rate >= 0.0 && noise.miss_rate <= 1.0)) {
    throw InputError("synth: jitter must be >= 0 and rates must lie in [0, 1]");
  }
  std::vector<ModelPredictions> out;
  for (const auto& m : models) out.push_back({m, {}});
  const SplitMix64 root(seed);

  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const bool logit = models[mi].space == ScoreSpace::Logit;
    const auto emit = [logit](double p) { return logit ? to_logit(p) : p; };
    std::vector<std::vector<Segment>> per_video(truth.size());
    const SplitMix64 model_rng = root.split(mi + 1);

    parallel_for(truth.size(), threads, [&](std::size_t v) {
      SplitMix64 rng = model_rng.split(v);
      const VideoAnnotation& ann = truth[v];
      auto& segs = per_video[v];
      for (const auto& gt : ann.fake_segments) {
        const double miss = rng.uniform();
        const double ds = noise.jitter_std * rng.normal();
        const double de = noise.jitter_std * rng.normal();
        if (miss < noise.miss_rate) continue;
        const double s = std::clamp(gt.start + ds, 0.0, ann.duration);
        const double e = std::clamp(gt.end + de, 0.0, ann.duration);
        if (!(e > s)) continue;
        const double p = 0.5 + 0.45 * std::exp(-(std::abs(ds) + std::abs(de)) / 0.05);
        segs.push_back({s, e, emit(p)});
      }
      for (int slot = 0; slot < 3; ++slot) {
        const double hit = rng.uniform();
        const double len = 0.08 + rng.exponential(0.25);
        const double pos = rng.uniform();
        const double conf = rng.uniform();
        if (hit >= noise.noise_rate) continue;
        const double span = std::min(len, 0.5 * ann.duration);
        const double s = pos * (ann.duration - span);
        segs.push_back({s, s + span, emit(0.2 + 0.3 * conf)});
      }
    });

    for (std::size_t v = 0; v < truth.size(); ++v) {
      out[mi].predictions[truth[v].video_id] = std::move(per_video[v]);
    }
  }
  return out;
}

FrameGrid rasterize(std::span<const Segment> segments, double duration, double resolution,
                    ScoreSpace space) {
  if (!(duration > 0.0 && resolution > 0.0)) {
    throw InputError("rasterize: duration and resolution must be positive");
  }
  const auto n = static_cast<std::size_t>(std::ceil(duration / resolution));
  std::vector<double> scores(n, kBackgroundLogit), starts(n, 0.0), ends(n, 0.0);
  std::vector<bool> valid(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = (static_cast<double>(i) + 0.5) * resolution;
    valid[i] = c <= duration;
    const Segment* cover = nullptr;
    for (const auto& seg : segments) {
      if (seg.start <= c && c <= seg.end && (cover == nullptr || seg.start < cover->start)) {
        cover = &seg;
      }
    }
    if (cover == nullptr) continue;
    scores[i] = space == ScoreSpace::Logit ? cover->score : to_logit(cover->score);
    starts[i] = c - cover->start;
    ends[i] = cover->end - c;
  }
  return FrameGrid(resolution, std::move(scores), std::move(starts), std::move(ends),
                   std::move(valid));
}

}  // namespace seglock
