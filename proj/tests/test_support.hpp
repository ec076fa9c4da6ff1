#pragma once

// Shared generators and numeric helpers for the test suites.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "seglock/core.hpp"
#include "seglock/metrics.hpp"
#include "seglock/oracle.hpp"

namespace seglock::testing {

/// |analytic - numeric| / max(|analytic|, |numeric|, floor). The floor keeps
/// vanishing gradients from turning round-off into huge ratios.
inline double relative_error(double analytic, double numeric, double floor = 1e-4) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Central difference of f around x[i] with step h.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x, std::size_t i, double h = 1e-5) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double up = f(x);
  x[i] = x0 - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

inline Segment random_segment(SplitMix64& rng, double horizon, double score) {
  const double a = rng.uniform() * horizon;
  const double len = 0.01 + rng.uniform() * 0.3 * horizon;
  return {a, std::min(a + len, horizon + 1.0), score};
}

struct LocalizationInstance {
  PredictionSet predictions;
  TruthSet truth;
};

/// Random multi-video instance: up to `max_videos` videos, <= 10 ground-truth
/// segments and <= 50 predictions per video. Predictions are partly jittered
/// copies of the truth so that matches occur at every threshold.
inline LocalizationInstance random_localization(SplitMix64& rng, int max_videos = 4) {
  LocalizationInstance inst;
  const auto videos = rng.integer(1, max_videos);
  for (std::int64_t v = 0; v < videos; ++v) {
    VideoAnnotation ann;
    ann.video_id = "v" + std::to_string(v);
    ann.duration = 10.0;
    const auto n_gt = rng.integer(0, 10);
    for (std::int64_t g = 0; g < n_gt; ++g) {
      const double s = rng.uniform() * 9.0;
      ann.fake_segments.push_back({s, s + 0.05 + rng.uniform() * 0.95, 1.0});
    }
    ann.modality = ann.fake_segments.empty() ? Modality::Real : Modality::FakeBoth;
    auto& preds = inst.predictions[ann.video_id];
    const auto n_pred = rng.integer(0, 50);
    for (std::int64_t p = 0; p < n_pred; ++p) {
      if (!ann.fake_segments.empty() && rng.uniform() < 0.6) {
        const auto& gt = ann.fake_segments[static_cast<std::size_t>(
            rng.integer(0, static_cast<std::int64_t>(ann.fake_segments.size()) - 1))];
        const double j = 0.1 * rng.uniform();
        const double s = std::max(0.0, gt.start + j * rng.normal());
        const double e = std::max(s + 1e-3, gt.end + j * rng.normal());
        preds.push_back({s, e, rng.uniform()});
      } else {
        const double s = rng.uniform() * 9.5;
        preds.push_back({s, s + 0.02 + rng.uniform(), rng.uniform()});
      }
    }
    inst.truth[ann.video_id] = std::move(ann);
  }
  return inst;
}

}  // namespace seglock::testing

#include "seglock/losses.hpp"

namespace seglock::testing {

struct LossInstance {
  std::vector<double> logits, pred_start, pred_end;
  FrameTargets targets;
  std::vector<bool> grid_valid;
};

/// Random frame-level loss inputs. Offsets avoid the DIoU kinks (a == ta,
/// b == tb) by at least 1e-3 so that central differences are meaningful.
/// kind 0: generic, 1: no positive frames, 2: every frame masked.
inline LossInstance random_loss_instance(SplitMix64& rng, int kind) {
  LossInstance inst;
  const auto n = static_cast<std::size_t>(rng.integer(1, 24));
  auto& t = inst.targets;
  t.labels.assign(n, false);
  t.valid.assign(n, true);
  t.target_start_offsets.assign(n, 0.0);
  t.target_end_offsets.assign(n, 0.0);
  inst.grid_valid.assign(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    inst.logits.push_back(3.0 * rng.normal());
    t.labels[i] = kind != 1 && rng.uniform() < 0.5;
    t.valid[i] = kind != 2 && rng.uniform() < 0.85;
    inst.grid_valid[i] = kind != 2 && rng.uniform() < 0.9;
    double a, b, ta, tb;
    do {
      a = 0.01 + 0.5 * rng.uniform();
      ta = 0.01 + 0.5 * rng.uniform();
    } while (std::abs(a - ta) < 1e-3);
    do {
      b = 0.01 + 0.5 * rng.uniform();
      tb = 0.01 + 0.5 * rng.uniform();
    } while (std::abs(b - tb) < 1e-3);
    inst.pred_start.push_back(a);
    inst.pred_end.push_back(b);
    t.target_start_offsets[i] = ta;
    t.target_end_offsets[i] = tb;
  }
  return inst;
}

struct GradientReport {
  double focal = 0.0;
  double diou = 0.0;
  double joint = 0.0;
};

/// Largest relative error between analytic gradients and central differences
/// (step 1e-5) for each of the three loss kernels on one instance.
inline GradientReport gradient_errors(const LossInstance& inst, const LossConfig& cfg) {
  GradientReport rep;
  const std::size_t n = inst.logits.size();

  const auto focal_of = [&](const std::vector<double>& x) {
    return focal_loss(x, inst.targets.labels, inst.targets.valid, cfg).loss;
  };
  const auto focal = focal_loss(inst.logits, inst.targets.labels, inst.targets.valid, cfg);
  for (std::size_t i = 0; i < n; ++i) {
    rep.focal = std::max(rep.focal, relative_error(focal.grad_logits[i],
                                                   central_difference(focal_of, inst.logits, i)));
  }

  const auto diou_start = [&](const std::vector<double>& a) {
    return diou_loss(a, inst.pred_end, inst.targets, cfg).loss;
  };
  const auto diou_end = [&](const std::vector<double>& b) {
    return diou_loss(inst.pred_start, b, inst.targets, cfg).loss;
  };
  const auto dl = diou_loss(inst.pred_start, inst.pred_end, inst.targets, cfg);
  for (std::size_t i = 0; i < n; ++i) {
    rep.diou = std::max(rep.diou, relative_error(dl.grad_start[i],
                                                 central_difference(diou_start, inst.pred_start, i)));
    rep.diou = std::max(rep.diou, relative_error(dl.grad_end[i],
                                                 central_difference(diou_end, inst.pred_end, i)));
  }

  // Joint: one flat parameter vector [logits; starts; ends].
  std::vector<double> theta = inst.logits;
  theta.insert(theta.end(), inst.pred_start.begin(), inst.pred_start.end());
  theta.insert(theta.end(), inst.pred_end.begin(), inst.pred_end.end());
  const auto make_grid = [&](const std::vector<double>& p) {
    return FrameGrid(0.04, {p.begin(), p.begin() + n}, {p.begin() + n, p.begin() + 2 * n},
                     {p.begin() + 2 * n, p.end()}, inst.grid_valid);
  };
  const auto joint_of = [&](const std::vector<double>& p) {
    return joint_loss(make_grid(p), inst.targets, cfg).total;
  };
  const auto jl = joint_loss(make_grid(theta), inst.targets, cfg);
  for (std::size_t i = 0; i < n; ++i) {
    rep.joint = std::max(rep.joint, relative_error(jl.grad_logits[i], central_difference(joint_of, theta, i)));
    rep.joint = std::max(rep.joint, relative_error(jl.grad_start[i], central_difference(joint_of, theta, n + i)));
    rep.joint = std::max(rep.joint, relative_error(jl.grad_end[i], central_difference(joint_of, theta, 2 * n + i)));
  }
  return rep;
}

}  // namespace seglock::testing
