#pragma once

#include <span>
#include <vector>

#include "seglock/core.hpp"

namespace seglock {

struct LossConfig {
  double focal_alpha = 0.9;
  double focal_gamma = 2.0;
  double regression_coefficient = 0.03;
};

/// Per-frame supervision. Offsets are only meaningful where labels[i] is set.
struct FrameTargets {
  std::vector<bool> labels;
  std::vector<double> target_start_offsets;
  std::vector<double> target_end_offsets;
  std::vector<bool> valid;

  std::size_t n_frames() const { return labels.size(); }
};

/// Labels each frame whose center falls inside a fake segment and records the
/// distances from that center to the segment boundaries. A center covered by
/// overlapping segments takes the one with the earliest start. Frames whose
/// center lies past the video duration are marked invalid (padding).
FrameTargets make_frame_targets(const VideoAnnotation& annotation, double resolution,
                                std::size_t n_frames);

struct FocalResult {
  double loss = 0.0;
  std::vector<double> grad_logits;
};

/// Mean sigmoid focal loss over valid frames, with d(loss)/d(logit).
FocalResult focal_loss(std::span<const double> logits, const std::vector<bool>& labels,
                       const std::vector<bool>& valid, const LossConfig& cfg);

struct DiouResult {
  double loss = 0.0;
  std::vector<double> grad_start;
  std::vector<double> grad_end;
};

/// Mean 1-D distance-IoU loss over labeled valid frames. Predicted and target
/// intervals are both anchored at the frame center.
DiouResult diou_loss(std::span<const double> pred_start, std::span<const double> pred_end,
                     const FrameTargets& targets, const LossConfig& cfg);

/// 1 - IoU + (center distance / enclosing length)^2 for two arbitrary intervals.
double diou(const Segment& pred, const Segment& target);

struct JointLossResult {
  double total = 0.0;
  double classification = 0.0;
  double regression = 0.0;
  std::vector<double> grad_logits;
  std::vector<double> grad_start;
  std::vector<double> grad_end;
};

/// classification + regression_coefficient * regression. A frame contributes
/// only when valid in both the grid and the targets.
JointLossResult joint_loss(const FrameGrid& grid, const FrameTargets& targets,
                           const LossConfig& cfg);

/// Mean of per-video joint totals, reduced in index order.
double batch_joint_loss(std::span<const FrameGrid> grids, std::span<const FrameTargets> targets,
                        const LossConfig& cfg);

struct Activation {
  double value = 0.0;
  double derivative = 0.0;
};

Activation softplus(double x);
/// relu'(0) is taken as 0.
Activation relu(double x);

}  // namespace seglock
