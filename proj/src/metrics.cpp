#include "seglock/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "seglock/parallel.hpp"
#include "seglock/simd.hpp"

namespace seglock {
namespace {

std::size_t total_ground_truth(const TruthSet& truth) {
  std::size_t total = 0;
  for (const auto& [id, ann] : truth) total += ann.fake_segments.size();
  return total;
}

void check_predictions(const PredictionSet& predictions, const TruthSet& truth) {
  for (const auto& [id, segs] : predictions) {
    if (!truth.contains(id)) throw InputError("prediction for unknown video '" + id + "'");
    for (const auto& s : segs) validate(s);
  }
}

struct VideoRef {
  const std::string* id;
  const std::vector<Segment>* predictions;
  const std::vector<Segment>* truth;
};

std::vector<VideoRef> collect(const PredictionSet& predictions, const TruthSet& truth) {
  static const std::vector<Segment> kNone;
  std::vector<VideoRef> videos;
  for (const auto& [id, ann] : truth) {
    const auto it = predictions.find(id);
    videos.push_back({&id, it == predictions.end() ? &kNone : &it->second, &ann.fake_segments});
  }
  return videos;
}

std::vector<std::size_t> ranked_indices(const std::vector<Segment>& segs) {
  std::vector<std::size_t> idx(segs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return proposal_before(segs[a], segs[b]); });
  return idx;
}

// Greedy matching of ranked predictions against one video's ground truth.
// Returns a true-positive flag per ranked prediction.
std::vector<bool> greedy_match(const std::vector<Segment>& preds,
                               const std::vector<std::size_t>& ranked, std::size_t limit,
                               const std::vector<Segment>& gt, double threshold) {
  const std::size_t count = std::min(limit, ranked.size());
  std::vector<bool> tp(count, false);
  if (gt.empty()) return tp;
  std::vector<double> gs(gt.size()), ge(gt.size()), overlap(gt.size());
  for (std::size_t g = 0; g < gt.size(); ++g) {
    gs[g] = gt[g].start;
    ge[g] = gt[g].end;
  }
  std::vector<bool> used(gt.size(), false);
  const auto& kernels = simd::kernels();
  for (std::size_t r = 0; r < count; ++r) {
    const Segment& p = preds[ranked[r]];
    kernels.iou_one_to_many(p.start, p.end, gs.data(), ge.data(), overlap.data(), gt.size());
    std::size_t best = gt.size();
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (used[g] || overlap[g] < threshold) continue;
      if (overlap[g] > best_iou) {
        best_iou = overlap[g];
        best = g;
      }
    }
    if (best < gt.size()) {
      used[best] = true;
      tp[r] = true;
    }
  }
  return tp;
}

}  // namespace

bool proposal_before(const Segment& a, const Segment& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.start != b.start) return a.start < b.start;
  return a.end < b.end;
}

double auc(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw InputError("auc: scores and labels differ in length");
  std::size_t positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw InputError("auc: non-finite score");
    if (labels[i]) ++positives;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) throw InputError("auc: both classes must be present");

  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of (1-based, tie-averaged) ranks held by positives, kept doubled to stay integral.
  std::size_t doubled_rank_sum = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const std::size_t doubled_avg_rank = (i + 1) + j;  // 2 * mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]]) doubled_rank_sum += doubled_avg_rank;
    }
    i = j;
  }
  const double u = 0.5 * static_cast<double>(doubled_rank_sum) -
                   0.5 * static_cast<double>(positives) * static_cast<double>(positives + 1);
  return u / (static_cast<double>(positives) * static_cast<double>(negatives));
}

double ap_at_iou(const PredictionSet& predictions, const TruthSet& truth, double iou_threshold,
                 unsigned threads) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw InputError("ap_at_iou: threshold must lie in (0, 1]");
  }
  check_predictions(predictions, truth);
  const std::size_t total_gt = total_ground_truth(truth);
  if (total_gt == 0) throw MetricUndefined("AP undefined: no ground-truth segments");

  const auto videos = collect(predictions, truth);
  std::vector<std::vector<bool>> flags(videos.size());
  std::vector<std::vector<std::size_t>> ranks(videos.size());
  parallel_for(videos.size(), threads, [&](std::size_t v) {
    ranks[v] = ranked_indices(*videos[v].predictions);
    flags[v] = greedy_match(*videos[v].predictions, ranks[v], ranks[v].size(), *videos[v].truth,
                            iou_threshold);
  });

  struct Hit {
    const Segment* seg;
    std::size_t video;  // position in id-sorted order
    std::size_t rank;
    bool tp;
  };
  std::vector<Hit> pooled;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    for (std::size_t r = 0; r < ranks[v].size(); ++r) {
      pooled.push_back({&(*videos[v].predictions)[ranks[v][r]], v, r, flags[v][r]});
    }
  }
  std::sort(pooled.begin(), pooled.end(), [](const Hit& a, const Hit& b) {
    if (a.seg->score != b.seg->score) return a.seg->score > b.seg->score;
    if (a.video != b.video) return a.video < b.video;
    return a.rank < b.rank;
  });

  std::vector<double> precision(pooled.size()), recall(pooled.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < pooled.size(); ++k) {
    if (pooled[k].tp) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(total_gt);
  }
  for (std::size_t k = pooled.size(); k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < pooled.size(); ++k) {
    if (recall[k] > prev_recall) {
      ap += (recall[k] - prev_recall) * precision[k];
      prev_recall = recall[k];
    }
  }
  return ap;
}

double ar_at_n(const PredictionSet& predictions, const TruthSet& truth, int n,
               std::span<const double> iou_set, unsigned threads) {
  if (n < 1) throw InputError("ar_at_n: n must be >= 1");
  if (iou_set.empty()) throw InputError("ar_at_n: empty IoU set");
  check_predictions(predictions, truth);
  const std::size_t total_gt = total_ground_truth(truth);
  if (total_gt == 0) throw MetricUndefined("AR undefined: no ground-truth segments");

  const auto videos = collect(predictions, truth);
  // matched[v][t]: ground-truth matches in video v at threshold index t.
  std::vector<std::vector<std::size_t>> matched(videos.size());
  parallel_for(videos.size(), threads, [&](std::size_t v) {
    const auto ranked = ranked_indices(*videos[v].predictions);
    matched[v].resize(iou_set.size());
    for (std::size_t t = 0; t < iou_set.size(); ++t) {
      const auto tp = greedy_match(*videos[v].predictions, ranked, static_cast<std::size_t>(n),
                                   *videos[v].truth, iou_set[t]);
      matched[v][t] = static_cast<std::size_t>(std::count(tp.begin(), tp.end(), true));
    }
  });

  double sum = 0.0;
  for (std::size_t t = 0; t < iou_set.size(); ++t) {
    std::size_t hits = 0;
    for (const auto& per_video : matched) hits += per_video[t];
    sum += static_cast<double>(hits) / static_cast<double>(total_gt);
  }
  return sum / static_cast<double>(iou_set.size());
}

double overall_score(const std::map<double, double>& ap, const std::map<int, double>& ar,
                     const MetricConfig& cfg) {
  double total = 0.0;
  for (double t : cfg.ap_iou_thresholds) {
    const auto it = ap.find(t);
    if (it == ap.end()) throw InputError("overall_score: missing AP@" + std::to_string(t));
    total += it->second * cfg.ap_weight;
  }
  for (int n : cfg.ar_n_values) {
    const auto it = ar.find(n);
    if (it == ar.end()) throw InputError("overall_score: missing AR@" + std::to_string(n));
    total += it->second * cfg.ar_weight;
  }
  return 100.0 * total;
}

MetricReport evaluate_localization(const PredictionSet& predictions, const TruthSet& truth,
                                   const MetricConfig& cfg, unsigned threads) {
  MetricReport report;
  for (double t : cfg.ap_iou_thresholds) report.ap[t] = ap_at_iou(predictions, truth, t, threads);
  for (int n : cfg.ar_n_values) report.ar[n] = ar_at_n(predictions, truth, n, cfg.ar_iou_set, threads);
  report.overall = overall_score(report.ap, report.ar, cfg);
  return report;
}

std::string format_report_table(const MetricReport& report, const MetricConfig& cfg,
                                const std::string& label) {
  std::vector<std::string> header{"Score"};
  std::vector<double> values{report.overall};
  for (double t : cfg.ap_iou_thresholds) {
    std::ostringstream name;
    name << "AP@" << t;
    header.push_back(name.str());
    values.push_back(100.0 * report.ap.at(t));
  }
  for (int n : cfg.ar_n_values) {
    header.push_back("AR@" + std::to_string(n));
    values.push_back(100.0 * report.ar.at(n));
  }
  if (report.auc) {
    header.push_back("AUC");
    values.push_back(100.0 * *report.auc);
  }

  const std::size_t label_width = std::max<std::size_t>(label.size(), 5);
  std::ostringstream out;
  char buf[32];
  out << std::string(label_width, ' ');
  for (const auto& h : header) {
    std::snprintf(buf, sizeof(buf), " | %8s", h.c_str());
    out << buf;
  }
  out << '\n' << std::string(label_width, '-');
  for (std::size_t i = 0; i < header.size(); ++i) out << "-+---------";
  out << '\n' << label << std::string(label_width - label.size(), ' ');
  for (double v : values) {
    std::snprintf(buf, sizeof(buf), " | %8.2f", v);
    out << buf;
  }
  out << '\n';
  return out.str();
}

}  // namespace seglock
