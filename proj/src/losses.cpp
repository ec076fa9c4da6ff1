#include "seglock/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "seglock/simd.hpp"

namespace seglock {

FrameTargets make_frame_targets(const VideoAnnotation& annotation, double resolution,
                                std::size_t n_frames) {
  if (!(resolution > 0.0)) throw InputError("frame resolution must be positive");
  annotation.validate();

  FrameTargets t;
  t.labels.assign(n_frames, false);
  t.target_start_offsets.assign(n_frames, 0.0);
  t.target_end_offsets.assign(n_frames, 0.0);
  t.valid.assign(n_frames, false);

  for (std::size_t i = 0; i < n_frames; ++i) {
    const double c = (static_cast<double>(i) + 0.5) * resolution;
    t.valid[i] = c <= annotation.duration;
    const Segment* cover = nullptr;
    for (const auto& seg : annotation.fake_segments) {
      if (seg.start <= c && c <= seg.end && (cover == nullptr || seg.start < cover->start)) {
        cover = &seg;
      }
    }
    if (cover != nullptr) {
      t.labels[i] = true;
      t.target_start_offsets[i] = c - cover->start;
      t.target_end_offsets[i] = cover->end - c;
    }
  }
  return t;
}

FocalResult focal_loss(std::span<const double> logits, const std::vector<bool>& labels,
                       const std::vector<bool>& valid, const LossConfig& cfg) {
  const std::size_t n = logits.size();
  if (labels.size() != n || valid.size() != n) {
    throw InputError("focal_loss: logits, labels and valid differ in length");
  }
  if (!(cfg.focal_alpha > 0.0 && cfg.focal_alpha < 1.0) || !(cfg.focal_gamma >= 0.0)) {
    throw InputError("focal_loss: alpha must lie in (0,1) and gamma must be >= 0");
  }

  FocalResult out;
  out.grad_logits.assign(n, 0.0);
  const double alpha = cfg.focal_alpha;
  const double gamma = cfg.focal_gamma;

  std::size_t count = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid[i]) continue;
    const double x = logits[i];
    if (!std::isfinite(x)) throw InputError("focal_loss: non-finite logit");
    ++count;
    const double p = sigmoid(x);
    const double q = sigmoid(-x);
    if (labels[i]) {
      const double log_p = -log1p_exp(-x);
      const double w = alpha * std::pow(q, gamma);
      sum += -w * log_p;
      out.grad_logits[i] = w * (gamma * p * log_p - q);
    } else {
      const double log_q = -log1p_exp(x);
      const double w = (1.0 - alpha) * std::pow(p, gamma);
      sum += -w * log_q;
      out.grad_logits[i] = w * (p - gamma * q * log_q);
    }
  }
  if (count == 0) {
    std::fill(out.grad_logits.begin(), out.grad_logits.end(), 0.0);
    return out;
  }
  const double inv = 1.0 / static_cast<double>(count);
  out.loss = sum * inv;
  for (auto& g : out.grad_logits) g *= inv;
  return out;
}

DiouResult diou_loss(std::span<const double> pred_start, std::span<const double> pred_end,
                     const FrameTargets& targets, const LossConfig& /*cfg*/) {
  const std::size_t n = pred_start.size();
  if (pred_end.size() != n || targets.labels.size() != n || targets.valid.size() != n ||
      targets.target_start_offsets.size() != n || targets.target_end_offsets.size() != n) {
    throw InputError("diou_loss: predictions and targets differ in length");
  }

  std::vector<std::uint8_t> mask(n, 0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(targets.labels[i] && targets.valid[i])) continue;
    if (!(pred_start[i] >= 0.0 && pred_end[i] >= 0.0)) {
      throw InputError("diou_loss: frame_index " + std::to_string(i) +
                       " has a negative or non-finite predicted offset");
    }
    mask[i] = 1;
    ++count;
  }

  DiouResult out;
  out.grad_start.assign(n, 0.0);
  out.grad_end.assign(n, 0.0);
  if (count == 0) return out;

  // Unlabeled frames may hold arbitrary values; feed the kernel zeros there.
  std::vector<double> a(n, 0.0), b(n, 0.0), ta(n, 0.0), tb(n, 0.0), loss(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    a[i] = pred_start[i];
    b[i] = pred_end[i];
    ta[i] = targets.target_start_offsets[i];
    tb[i] = targets.target_end_offsets[i];
  }
  simd::kernels().diou_frames(a.data(), b.data(), ta.data(), tb.data(), mask.data(), loss.data(),
                              out.grad_start.data(), out.grad_end.data(), n);

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += loss[i];
  const double inv = 1.0 / static_cast<double>(count);
  out.loss = sum * inv;
  for (std::size_t i = 0; i < n; ++i) {
    out.grad_start[i] *= inv;
    out.grad_end[i] *= inv;
  }
  return out;
}

double diou(const Segment& pred, const Segment& target) {
  const double inter_raw = std::min(pred.end, target.end) - std::max(pred.start, target.start);
  const double inter = std::max(inter_raw, 0.0);
  const double uni = pred.length() + target.length() - inter;
  const double overlap = uni > 0.0 ? inter / uni : 0.0;
  const double enclosing = std::max(pred.end, target.end) - std::min(pred.start, target.start);
  const double d = 0.5 * ((pred.start + pred.end) - (target.start + target.end));
  const double penalty = enclosing > 0.0 ? (d * d) / (enclosing * enclosing) : 0.0;
  return 1.0 - overlap + penalty;
}

JointLossResult joint_loss(const FrameGrid& grid, const FrameTargets& targets,
                           const LossConfig& cfg) {
  const std::size_t n = grid.n_frames();
  if (targets.n_frames() != n) {
    throw InputError("joint_loss: grid has " + std::to_string(n) + " frames, targets have " +
                     std::to_string(targets.n_frames()));
  }
  FrameTargets masked = targets;
  for (std::size_t i = 0; i < n; ++i) masked.valid[i] = targets.valid[i] && grid.valid()[i];

  const FocalResult cls = focal_loss(grid.scores(), masked.labels, masked.valid, cfg);
  const DiouResult reg = diou_loss(grid.start_offsets(), grid.end_offsets(), masked, cfg);

  JointLossResult out;
  out.classification = cls.loss;
  out.regression = reg.loss;
  out.total = cls.loss + cfg.regression_coefficient * reg.loss;
  out.grad_logits = cls.grad_logits;
  out.grad_start = reg.grad_start;
  out.grad_end = reg.grad_end;
  for (std::size_t i = 0; i < n; ++i) {
    out.grad_start[i] *= cfg.regression_coefficient;
    out.grad_end[i] *= cfg.regression_coefficient;
  }
  return out;
}

double batch_joint_loss(std::span<const FrameGrid> grids, std::span<const FrameTargets> targets,
                        const LossConfig& cfg) {
  if (grids.size() != targets.size()) throw InputError("batch_joint_loss: size mismatch");
  if (grids.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t v = 0; v < grids.size(); ++v) sum += joint_loss(grids[v], targets[v], cfg).total;
  return sum / static_cast<double>(grids.size());
}

Activation softplus(double x) { return {log1p_exp(x), sigmoid(x)}; }

Activation relu(double x) { return {x > 0.0 ? x : 0.0, x > 0.0 ? 1.0 : 0.0}; }

}  // namespace seglock
