// Deliberately naive reference evaluators. They share no code with the
// production paths beyond the data types.

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "seglock/oracle.hpp"

namespace seglock {

double ref_iou(const Segment& a, const Segment& b) {
  if (a.end <= a.start || b.end <= b.start) return 0.0;
  if (a.end <= b.start || b.end <= a.start) return 0.0;
  const double lo = a.start > b.start ? a.start : b.start;
  const double hi = a.end < b.end ? a.end : b.end;
  const double outer_lo = a.start < b.start ? a.start : b.start;
  const double outer_hi = a.end > b.end ? a.end : b.end;
  // Overlapping intervals: the union is the hull.
  return (hi - lo) / (outer_hi - outer_lo);
}

double ref_auc(std::span<const double> scores, const std::vector<bool>& labels) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) {
        wins += 1.0;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  if (pairs == 0.0) throw InputError("ref_auc: both classes must be present");
  return wins / pairs;
}

std::vector<Segment> ref_soft_nms(std::span<const Segment> proposals, const SoftNmsConfig& cfg) {
  struct Candidate {
    Segment seg;
    std::size_t position;
  };
  std::vector<Candidate> pool;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    if (proposals[i].score >= cfg.pre_threshold) pool.push_back({proposals[i], i});
  }
  std::vector<Segment> out;
  const std::size_t limit = cfg.max_output ? *cfg.max_output : proposals.size();
  while (!pool.empty() && out.size() < limit) {
    std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
      return std::make_tuple(-a.seg.score, a.seg.start, a.seg.end, a.position) <
             std::make_tuple(-b.seg.score, b.seg.start, b.seg.end, b.position);
    });
    const Segment top = pool.front().seg;
    out.push_back(top);
    pool.erase(pool.begin());
    for (auto& c : pool) {
      const double o = ref_iou(top, c.seg);
      c.seg.score = c.seg.score * std::exp(-o * o / cfg.sigma);
    }
  }
  return out;
}

namespace {

struct Flat {
  std::string video;
  Segment seg;
};

bool flat_before(const Flat& a, const Flat& b) {
  return std::make_tuple(-a.seg.score, a.video, a.seg.start, a.seg.end) <
         std::make_tuple(-b.seg.score, b.video, b.seg.start, b.seg.end);
}

// Replays greedy matching over the first k ranked predictions and counts hits.
std::size_t replay_hits(const std::vector<Flat>& ranked, std::size_t k, const TruthSet& truth,
                        double threshold) {
  std::map<std::string, std::vector<bool>> used;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < k; ++r) {
    const auto& gt = truth.at(ranked[r].video).fake_segments;
    auto& taken = used[ranked[r].video];
    taken.resize(gt.size(), false);
    int best = -1;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (taken[g]) continue;
      const double o = ref_iou(ranked[r].seg, gt[g]);
      if (o >= threshold && o > best_iou) {
        best_iou = o;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = true;
      ++hits;
    }
  }
  return hits;
}

}  // namespace

double ref_ap(const PredictionSet& predictions, const TruthSet& truth, double iou_threshold) {
  std::size_t total = 0;
  for (const auto& [id, ann] : truth) total += ann.fake_segments.size();
  if (total == 0) throw MetricUndefined("ref_ap: no ground truth");

  std::vector<Flat> ranked;
  for (const auto& [id, segs] : predictions) {
    for (const auto& s : segs) ranked.push_back({id, s});
  }
  std::stable_sort(ranked.begin(), ranked.end(), flat_before);

  const std::size_t n = ranked.size();
  std::vector<double> precision(n + 1, 0.0), recall(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    const auto hits = static_cast<double>(replay_hits(ranked, k, truth, iou_threshold));
    precision[k] = hits / static_cast<double>(k);
    recall[k] = hits / static_cast<double>(total);
  }
  double ap = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    if (recall[k] <= recall[k - 1]) continue;
    double envelope = 0.0;
    for (std::size_t j = k; j <= n; ++j) envelope = std::max(envelope, precision[j]);
    ap += (recall[k] - recall[k - 1]) * envelope;
  }
  return ap;
}

double ref_ar(const PredictionSet& predictions, const TruthSet& truth, int n,
              std::span<const double> iou_set) {
  std::size_t total = 0;
  for (const auto& [id, ann] : truth) total += ann.fake_segments.size();
  if (total == 0) throw MetricUndefined("ref_ar: no ground truth");

  double sum = 0.0;
  for (double t : iou_set) {
    std::size_t hits = 0;
    for (const auto& [id, segs] : predictions) {
      std::vector<Flat> ranked;
      for (const auto& s : segs) ranked.push_back({id, s});
      std::stable_sort(ranked.begin(), ranked.end(), flat_before);
      ranked.resize(std::min(ranked.size(), static_cast<std::size_t>(n)));
      hits += replay_hits(ranked, ranked.size(), truth, t);
    }
    sum += static_cast<double>(hits) / static_cast<double>(total);
  }
  return sum / static_cast<double>(iou_set.size());
}

}  // namespace seglock
