#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>

#include "seglock/fuse.hpp"
#include "seglock/metrics.hpp"
#include "seglock/parallel.hpp"

namespace seglock {
namespace {

// Calls visit(indices) for every non-decreasing index tuple of length `degree`
// over [0, m), in ascending lexicographic order.
void for_each_monomial(std::size_t m, int degree,
                       const std::function<void(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(degree), 0);
  if (m == 0) return;
  while (true) {
    visit(idx);
    int k = degree - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == m - 1) --k;
    if (k < 0) return;
    const std::size_t next = idx[static_cast<std::size_t>(k)] + 1;
    for (int j = k; j < degree; ++j) idx[static_cast<std::size_t>(j)] = next;
  }
}

void expand(std::span<const double> z, int degree, std::vector<double>& out) {
  out.clear();
  for (int d = 1; d <= degree; ++d) {
    for_each_monomial(z.size(), d, [&](const std::vector<std::size_t>& idx) {
      double v = 1.0;
      for (std::size_t i : idx) v *= z[i];
      out.push_back(v);
    });
  }
}

void check_labels(const std::vector<bool>& labels, std::size_t rows, const char* split) {
  if (labels.size() != rows) {
    throw InputError(std::string(split) + ": label count differs from score rows");
  }
  const auto positives = std::count(labels.begin(), labels.end(), true);
  if (positives == 0 || positives == static_cast<long>(labels.size())) {
    throw InputError(std::string(split) + ": both classes must be present");
  }
}

std::size_t check_matrix(const ScoreMatrix& scores, const char* split) {
  if (scores.size() < 2) throw InputError(std::string(split) + ": need at least 2 rows");
  const std::size_t m = scores.front().size();
  if (m == 0) throw InputError(std::string(split) + ": no model columns");
  for (const auto& row : scores) {
    if (row.size() != m) throw InputError(std::string(split) + ": ragged score rows");
    for (double v : row) {
      if (!std::isfinite(v)) throw InputError(std::string(split) + ": non-finite score");
    }
  }
  return m;
}

Eigen::MatrixXd design_matrix(const FusionModel& model, const ScoreMatrix& scores) {
  const std::size_t p = poly_feature_count(model.means.size(), model.degree);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(scores.size()), static_cast<Eigen::Index>(p));
  for (std::size_t r = 0; r < scores.size(); ++r) {
    const auto f = poly_features(scores[r], model.means, model.stds, model.degree);
    for (std::size_t c = 0; c < p; ++c) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = f[c];
    }
  }
  return x;
}

Eigen::VectorXd label_vector(const std::vector<bool>& labels) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i)) = labels[i] ? 1.0 : 0.0;
  return y;
}

// Objective over the stacked parameter vector theta = [coefficients; bias].
double objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                 const Eigen::VectorXd& theta) {
  const Eigen::Index p = x.cols();
  const Eigen::VectorXd z = (x * theta.head(p)).array() + theta(p);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) sum += log1p_exp(z(i)) - y(i) * z(i);
  return sum / static_cast<double>(z.size()) + 0.5 * lambda * theta.head(p).squaredNorm();
}

Eigen::VectorXd gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                         const Eigen::VectorXd& theta, Eigen::VectorXd* weights) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const Eigen::VectorXd z = (x * theta.head(p)).array() + theta(p);
  Eigen::VectorXd residual(n);
  if (weights != nullptr) weights->resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double prob = sigmoid(z(i));
    residual(i) = prob - y(i);
    if (weights != nullptr) (*weights)(i) = prob * sigmoid(-z(i));
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::VectorXd g(p + 1);
  g.head(p) = inv_n * (x.transpose() * residual) + lambda * theta.head(p);
  g(p) = inv_n * residual.sum();
  return g;
}

struct SingleFit {
  Eigen::VectorXd theta;
  int iterations = 0;
  bool converged = false;
};

SingleFit newton_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                     int max_iterations, double tolerance) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  SingleFit fit;
  fit.theta = Eigen::VectorXd::Zero(p + 1);
  double f = objective(x, y, lambda, fit.theta);

  Eigen::MatrixXd xa(n, p + 1);
  xa.leftCols(p) = x;
  xa.col(p).setOnes();

  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd w;
    const Eigen::VectorXd g = gradient(x, y, lambda, fit.theta, &w);
    if (g.lpNorm<Eigen::Infinity>() < tolerance) {
      fit.converged = true;
      break;
    }
    Eigen::MatrixXd h = (xa.transpose() * w.asDiagonal() * xa) / static_cast<double>(n);
    h.diagonal().head(p).array() += lambda;
    // Tiny ridge on the bias keeps the system solvable when all weights vanish.
    h(p, p) += 1e-12;
    const Eigen::VectorXd step = h.ldlt().solve(g);

    double t = 1.0;
    const double slope = g.dot(step);
    Eigen::VectorXd candidate = fit.theta - step;
    double fc = objective(x, y, lambda, candidate);
    while (fc > f - 1e-4 * t * slope && t > 1e-10) {
      t *= 0.5;
      candidate = fit.theta - t * step;
      fc = objective(x, y, lambda, candidate);
    }
    fit.iterations = it + 1;
    if (!(fc <= f)) break;  // no further progress in floating point
    fit.theta = candidate;
    f = fc;
  }
  if (!fit.converged) {
    fit.converged = gradient(x, y, lambda, fit.theta, nullptr).lpNorm<Eigen::Infinity>() < tolerance;
  }
  return fit;
}

}  // namespace

std::size_t poly_feature_count(std::size_t m, int degree) {
  std::size_t total = 0;
  for (int d = 1; d <= degree; ++d) {
    // C(m + d - 1, d), monomials of exact degree d.
    std::size_t c = 1;
    for (int k = 1; k <= d; ++k) c = c * (m + static_cast<std::size_t>(k) - 1) / static_cast<std::size_t>(k);
    total += c;
  }
  return total;
}

std::vector<double> poly_features(std::span<const double> scores, std::span<const double> means,
                                  std::span<const double> stds, int degree) {
  if (scores.size() != means.size() || scores.size() != stds.size()) {
    throw InputError("poly_features: expected " + std::to_string(means.size()) + " scores, got " +
                     std::to_string(scores.size()));
  }
  if (degree < 1) throw InputError("poly_features: degree must be >= 1");
  std::vector<double> z(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!(stds[i] > 0.0)) throw InputError("poly_features: standard deviations must be positive");
    z[i] = (scores[i] - means[i]) / stds[i];
  }
  std::vector<double> out;
  out.reserve(poly_feature_count(z.size(), degree));
  expand(z, degree, out);
  return out;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 12; ++k) grid.push_back(std::pow(10.0, -4.0 + 0.5 * k));
  return grid;
}

FusionFit fit_fusion(const ScoreMatrix& train_scores, const std::vector<bool>& train_labels,
                     const ScoreMatrix& val_scores, const std::vector<bool>& val_labels,
                     const FusionFitOptions& options) {
  const std::size_t m = check_matrix(train_scores, "train");
  if (check_matrix(val_scores, "validation") != m) {
    throw InputError("validation has a different number of model columns than train");
  }
  check_labels(train_labels, train_scores.size(), "train");
  check_labels(val_labels, val_scores.size(), "validation");
  if (options.degree < 1) throw InputError("fusion degree must be >= 1");
  if (options.lambda_grid.empty()) throw InputError("lambda grid is empty");
  for (double l : options.lambda_grid) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw InputError("lambda values must be finite and >= 0");
  }

  FusionModel base;
  base.degree = options.degree;
  base.model_ids = options.model_ids;
  if (base.model_ids.empty()) {
    for (std::size_t j = 0; j < m; ++j) base.model_ids.push_back("model_" + std::to_string(j + 1));
  }
  if (base.model_ids.size() != m) throw InputError("model_ids length differs from score columns");

  const double n = static_cast<double>(train_scores.size());
  base.means.assign(m, 0.0);
  base.stds.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double sum = 0.0;
    for (const auto& row : train_scores) sum += row[j];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& row : train_scores) ss += (row[j] - mean) * (row[j] - mean);
    const double sd = std::sqrt(ss / n);
    if (!(sd > 0.0)) {
      throw InputError("model '" + base.model_ids[j] + "' has zero variance in the training scores");
    }
    base.means[j] = mean;
    base.stds[j] = sd;
  }

  const Eigen::MatrixXd x = design_matrix(base, train_scores);
  const Eigen::VectorXd y = label_vector(train_labels);
  const Eigen::Index p = x.cols();

  std::vector<SingleFit> fits(options.lambda_grid.size());
  std::vector<double> aucs(options.lambda_grid.size(), 0.0);
  parallel_for(fits.size(), options.threads, [&](std::size_t k) {
    fits[k] = newton_fit(x, y, options.lambda_grid[k], options.max_iterations,
                         options.gradient_tolerance);
    FusionModel candidate = base;
    candidate.coefficients.assign(fits[k].theta.data(), fits[k].theta.data() + p);
    candidate.bias = fits[k].theta(p);
    candidate.reg_lambda = options.lambda_grid[k];
    std::vector<double> predicted;
    predicted.reserve(val_scores.size());
    for (const auto& row : val_scores) predicted.push_back(apply_fusion(candidate, row));
    aucs[k] = auc(predicted, val_labels);
  });

  std::size_t best = 0;
  for (std::size_t k = 1; k < fits.size(); ++k) {
    const double lk = options.lambda_grid[k];
    const double lb = options.lambda_grid[best];
    if (aucs[k] > aucs[best] || (aucs[k] == aucs[best] && lk > lb)) best = k;
  }

  FusionFit out;
  out.model = base;
  out.model.coefficients.assign(fits[best].theta.data(), fits[best].theta.data() + p);
  out.model.bias = fits[best].theta(p);
  out.model.reg_lambda = options.lambda_grid[best];
  out.validation_auc = aucs[best];
  out.iterations = fits[best].iterations;
  out.converged = fits[best].converged;
  out.grid_auc = aucs;
  return out;
}

std::vector<double> fusion_objective_gradient(const FusionModel& model, const ScoreMatrix& scores,
                                              const std::vector<bool>& labels) {
  const Eigen::MatrixXd x = design_matrix(model, scores);
  const Eigen::VectorXd y = label_vector(labels);
  Eigen::VectorXd theta(x.cols() + 1);
  for (Eigen::Index c = 0; c < x.cols(); ++c) theta(c) = model.coefficients[static_cast<std::size_t>(c)];
  theta(x.cols()) = model.bias;
  const Eigen::VectorXd g = gradient(x, y, model.reg_lambda, theta, nullptr);
  return {g.data(), g.data() + g.size()};
}

double fusion_objective(const FusionModel& model, const ScoreMatrix& scores,
                        const std::vector<bool>& labels) {
  const Eigen::MatrixXd x = design_matrix(model, scores);
  const Eigen::VectorXd y = label_vector(labels);
  Eigen::VectorXd theta(x.cols() + 1);
  for (Eigen::Index c = 0; c < x.cols(); ++c) theta(c) = model.coefficients[static_cast<std::size_t>(c)];
  theta(x.cols()) = model.bias;
  return objective(x, y, model.reg_lambda, theta);
}

double apply_fusion(const FusionModel& model, std::span<const double> scores) {
  if (scores.size() != model.means.size()) {
    throw InputError("apply_fusion: model expects " + std::to_string(model.means.size()) +
                     " scores, got " + std::to_string(scores.size()));
  }
  const auto features = poly_features(scores, model.means, model.stds, model.degree);
  if (features.size() != model.coefficients.size()) {
    throw InputError("apply_fusion: coefficient count does not match the feature expansion");
  }
  double z = model.bias;
  for (std::size_t i = 0; i < features.size(); ++i) z += model.coefficients[i] * features[i];
  return sigmoid(z);
}

}  // namespace seglock
