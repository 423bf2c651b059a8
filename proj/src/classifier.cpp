#include "groupanno/classifier.hpp"

#include <cmath>
#include <stdexcept>

#include "groupanno/mathutil.hpp"
#include "groupanno/parallel.hpp"

namespace groupanno {

double predict_proba(const ClassifierParams& params, const std::vector<double>& features) {
  if (features.size() != params.weights.size()) {
    throw std::invalid_argument("predict_proba: feature dimension " +
                                std::to_string(features.size()) + " does not match model (" +
                                std::to_string(params.weights.size()) + ")");
  }
  double score = params.intercept;
  for (std::size_t j = 0; j < features.size(); ++j) score += params.weights[j] * features[j];
  return clamp_prob(sigmoid(score));
}

ObjectiveGrad weighted_nll_grad(const ClassifierParams& params, const AnnotationDataset& dataset,
                                const std::vector<double>& mu, double l2) {
  const std::size_t n = dataset.instances.size();
  if (mu.size() != n) {
    throw std::invalid_argument("weighted_nll_grad: mu has " + std::to_string(mu.size()) +
                                " entries for " + std::to_string(n) + " instances");
  }
  const std::size_t d = params.weights.size();
  // Accumulator layout: [grad_w (d), grad_b, objective]
  std::vector<double> acc = blocked_accumulate(n, d + 2, [&](std::size_t i, double* out) {
    const std::vector<double>& x = dataset.instances[i].features;
    double score = params.intercept;
    for (std::size_t j = 0; j < d; ++j) score += params.weights[j] * x[j];
    const double p = clamp_prob(sigmoid(score));
    const double resid = mu[i] - p;
    for (std::size_t j = 0; j < d; ++j) out[j] += resid * x[j];
    out[d] += resid;
    out[d + 1] += mu[i] * std::log(p) + (1.0 - mu[i]) * std::log(1.0 - p);
  });

  ObjectiveGrad result;
  result.grad_weights.assign(acc.begin(), acc.begin() + static_cast<std::ptrdiff_t>(d));
  result.grad_intercept = acc[d];
  result.objective = acc[d + 1];
  double w_sq = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    result.grad_weights[j] -= l2 * params.weights[j];
    w_sq += params.weights[j] * params.weights[j];
  }
  result.objective -= 0.5 * l2 * w_sq;
  return result;
}

ClassifierParams fit(const AnnotationDataset& dataset, const std::vector<double>& mu,
                     const TrainConfig& config) {
  const std::size_t n = dataset.instances.size();
  if (n == 0) throw std::invalid_argument("fit: empty dataset");
  ClassifierParams params;
  params.weights.assign(dataset.feature_dim, 0.0);
  params.intercept = 0.0;
  const double scale = config.learning_rate / static_cast<double>(n);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    ObjectiveGrad g = weighted_nll_grad(params, dataset, mu, config.l2);
    if (!std::isfinite(g.objective)) {
      throw std::runtime_error("fit: non-finite objective at epoch " + std::to_string(epoch));
    }
    for (std::size_t j = 0; j < params.weights.size(); ++j) {
      params.weights[j] += scale * g.grad_weights[j];
    }
    params.intercept += scale * g.grad_intercept;
  }
  return params;
}

}  // namespace groupanno
