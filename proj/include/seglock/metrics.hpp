#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seglock/core.hpp"

namespace seglock {

/// Predicted segments keyed by video id.
using PredictionSet = std::map<std::string, std::vector<Segment>>;
/// Ground truth keyed by video id.
using TruthSet = std::map<std::string, VideoAnnotation>;

struct MetricReport {
  std::map<double, double> ap;  // IoU threshold -> AP in [0,1]
  std::map<int, double> ar;     // N -> AR in [0,1]
  std::optional<double> auc;
  double overall = 0.0;         // 0..100
};

/// Mann-Whitney ROC AUC, ties counted as 1/2. Requires both classes.
double auc(std::span<const double> scores, const std::vector<bool>& labels);

/// Dataset-pooled average precision with greedy one-to-one matching and
/// all-point interpolation.
double ap_at_iou(const PredictionSet& predictions, const TruthSet& truth, double iou_threshold,
                 unsigned threads = 1);

/// Recall of the top-n proposals per video, averaged over iou_set.
double ar_at_n(const PredictionSet& predictions, const TruthSet& truth, int n,
               std::span<const double> iou_set, unsigned threads = 1);

/// 100 * (sum ap(t) * ap_weight + sum ar(N) * ar_weight).
double overall_score(const std::map<double, double>& ap, const std::map<int, double>& ar,
                     const MetricConfig& cfg);

MetricReport evaluate_localization(const PredictionSet& predictions, const TruthSet& truth,
                                   const MetricConfig& cfg = {}, unsigned threads = 1);

/// Fixed-width text table: Score, AP@t..., AR@N... in configuration order.
std::string format_report_table(const MetricReport& report, const MetricConfig& cfg,
                                const std::string& label = "");

/// Canonical ordering for proposals within one video: descending score,
/// ascending start, ascending end. std::stable_sort keeps input order for
/// full ties.
bool proposal_before(const Segment& a, const Segment& b);

}  // namespace seglock
