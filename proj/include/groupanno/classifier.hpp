#pragma once

#include <cstdint>
#include <vector>

#include "groupanno/types.hpp"

namespace groupanno {

/// Hyperparameters for standalone logistic-regression training
/// (used by the baseline pipelines that first infer labels, then fit).
struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 200;
  double l2 = 1e-4;
  std::uint64_t seed = 0;  // reserved; full-batch training is deterministic
};

/// P(y=1|x) = logistic(w.x + intercept), clamped to [1e-12, 1-1e-12].
double predict_proba(const ClassifierParams& params, const std::vector<double>& features);

/// Value and gradient of the soft-label log-likelihood
///   sum_i [mu_i ln p_i + (1-mu_i) ln(1-p_i)] - (l2/2) ||w||^2
/// with gradients  d/dw = sum_i (mu_i - p_i) x_i - l2 w,
///                 d/db = sum_i (mu_i - p_i).
struct ObjectiveGrad {
  double objective = 0.0;
  std::vector<double> grad_weights;
  double grad_intercept = 0.0;
};
ObjectiveGrad weighted_nll_grad(const ClassifierParams& params, const AnnotationDataset& dataset,
                                const std::vector<double>& mu, double l2);

/// Full-batch gradient ascent on the objective above for config.epochs,
/// stepping by learning_rate * gradient / N. Deterministic.
/// mu holds one soft label per instance, in dataset order.
ClassifierParams fit(const AnnotationDataset& dataset, const std::vector<double>& mu,
                     const TrainConfig& config);

}  // namespace groupanno
