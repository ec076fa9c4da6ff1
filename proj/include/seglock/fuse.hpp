#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seglock/core.hpp"

namespace seglock {

struct SoftNmsConfig {
  double sigma = 0.8;
  double pre_threshold = 0.2;
  std::optional<std::size_t> max_output;
};

/// Gaussian Soft-NMS over proposals pooled from any number of models.
///
/// Proposals scoring below pre_threshold are discarded first. The remaining
/// highest score M is then selected repeatedly (ties: earlier start, earlier
/// end, earlier input position) and every other survivor decays as
/// s <- s * exp(-iou(M, s)^2 / sigma). Scores are compared as-is, so a raw
/// logit from one model can outrank probabilities from another. Output is in
/// selection order and carries the decayed scores; boundaries are untouched.
std::vector<Segment> soft_nms(std::span<const Segment> proposals, const SoftNmsConfig& cfg);

/// Row-major score table: rows are files/videos, columns are models.
using ScoreMatrix = std::vector<std::vector<double>>;

/// Number of monomials of total degree 1..degree in m variables.
std::size_t poly_feature_count(std::size_t m, int degree);

/// z-normalizes scores with (means, stds) and expands them into monomials.
/// Order: by total degree, then by index tuple i1 <= i2 <= ... ascending,
/// e.g. m=2, degree 2 gives [a, b, a*a, a*b, b*b].
std::vector<double> poly_features(std::span<const double> scores, std::span<const double> means,
                                  std::span<const double> stds, int degree);

struct FusionModel {
  std::vector<std::string> model_ids;
  std::vector<double> means;
  std::vector<double> stds;
  int degree = 2;
  std::vector<double> coefficients;
  double bias = 0.0;
  double reg_lambda = 0.0;
};

/// 13 values, 1e-4 .. 1e2, log-spaced by half decades.
std::vector<double> default_lambda_grid();

struct FusionFitOptions {
  int degree = 2;
  std::vector<double> lambda_grid = default_lambda_grid();
  /// Column names; defaults to model_1..model_m when empty.
  std::vector<std::string> model_ids;
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
  unsigned threads = 1;
};

struct FusionFit {
  FusionModel model;
  double validation_auc = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Validation AUC for each lambda, in grid order.
  std::vector<double> grid_auc;
};

/// Objective minimized for a given lambda:
///   mean_i [log(1 + exp(z_i)) - y_i z_i] + lambda/2 * |coefficients|^2,
/// with z_i = bias + coefficients . features_i (bias unpenalized). Solved by
/// damped Newton from zero. The lambda with the highest validation AUC wins,
/// ties going to the larger lambda.
FusionFit fit_fusion(const ScoreMatrix& train_scores, const std::vector<bool>& train_labels,
                     const ScoreMatrix& val_scores, const std::vector<bool>& val_labels,
                     const FusionFitOptions& options = {});

/// Gradient of the fit objective at (coefficients, bias); last entry is d/d(bias).
std::vector<double> fusion_objective_gradient(const FusionModel& model, const ScoreMatrix& scores,
                                              const std::vector<bool>& labels);

double fusion_objective(const FusionModel& model, const ScoreMatrix& scores,
                        const std::vector<bool>& labels);

/// sigmoid(bias + coefficients . poly_features(scores)).
double apply_fusion(const FusionModel& model, std::span<const double> scores);

}  // namespace seglock
