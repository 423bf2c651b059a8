#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "groupanno/types.hpp"

namespace groupanno {

/// Hyperparameters for the joint EM fit of classifier, per-annotator
/// sensitivities/specificities, and group-level bias decomposition.
struct EmConfig {
  std::size_t epochs = 100;
  std::size_t m_steps_per_epoch = 1;
  double learning_rate = 0.05;
  /// Pseudo-count strength s of the Beta prior tying each annotator to its
  /// group-implied mean.
  double concentration = 10.0;
  /// Group-implied prior means are clamped to [clamp_eps, 1-clamp_eps].
  double clamp_eps = 1e-3;
  double l2_classifier = 1e-4;
  /// When false the group decomposition and Beta priors are disabled and the
  /// model reduces to independent per-annotator confusion parameters.
  bool group_model_enabled = true;
  std::uint64_t seed = 0;  // reserved; the fit itself is deterministic
  /// Run the per-instance kernels with OpenMP. The serial path is kept as a
  /// reference implementation; both produce bit-identical results.
  bool use_parallel_kernels = true;
};

/// Full model state carried across EM epochs.
struct EmState {
  ClassifierParams classifier;
  GroupBiasParams bias;
  PosteriorLabels posteriors;
  /// MAP objective recorded once per epoch (after that epoch's M-step).
  std::vector<double> objective_trace;
};

/// Per-instance likelihood pieces:
///   log_a = sum_r [ z ln(alpha_r) + (1-z) ln(1-alpha_r) ]   (truth = 1)
///   log_b = sum_r [ z ln(1-beta_r) + (1-z) ln(beta_r)  ]    (truth = 0)
/// and the classifier prior p = P(y=1|x).
struct LikelihoodTerms {
  double p = 0.5;
  double log_a = 0.0;
  double log_b = 0.0;
};

/// State with classifier weights at zero, every annotator at
/// sensitivity = specificity = 0.7, group means 0.7 with zero effects, and
/// posteriors initialised to each instance's mean annotation.
EmState init_state(const AnnotationDataset& dataset, const AnnotatorTable& table,
                   const EmConfig& config);

LikelihoodTerms likelihood_terms(const EmState& state, const Instance& instance);

/// Posterior update: mu_i = logistic(log_a_i + logit(p_i) - log_b_i),
/// clamped to [1e-12, 1-1e-12]. Writes state.posteriors.
void e_step(EmState& state, const AnnotationDataset& dataset);

/// MAP objective: expected complete-data log-likelihood under the current
/// posteriors plus the log Beta priors on annotator parameters (when the
/// group model is enabled) minus the classifier l2 penalty.
double map_objective(const EmState& state, const AnnotationDataset& dataset,
                     const AnnotatorTable& table, const EmConfig& config);

/// Analytic gradients of map_objective at the current state. Annotator
/// sensitivities/specificities are parameterised in logit space (the gradient
/// reported for annotator r is d objective / d logit(alpha_r), etc.).
/// Gradients w.r.t. the group mean u and the group effects are zero wherever
/// the raw (unclamped) prior mean falls outside (clamp_eps, 1-clamp_eps),
/// matching the flat spots the clamp creates in the objective.
struct MapGradients {
  std::vector<double> grad_weights;
  double grad_intercept = 0.0;
  std::map<std::string, double> grad_logit_alpha;
  std::map<std::string, double> grad_logit_beta;
  double grad_u_alpha = 0.0;
  double grad_u_beta = 0.0;
  std::vector<std::vector<double>> grad_effects_alpha;  // P x 2
  std::vector<std::vector<double>> grad_effects_beta;   // P x 2
};
MapGradients map_gradients(const EmState& state, const AnnotationDataset& dataset,
                           const AnnotatorTable& table, const EmConfig& config);

/// One round of gradient-ascent parameter updates holding posteriors fixed.
void m_step(EmState& state, const AnnotationDataset& dataset, const AnnotatorTable& table,
            const EmConfig& config);

/// Full fit: init, then per epoch an E-step followed by
/// config.m_steps_per_epoch M-steps, with the objective recorded each epoch;
/// posteriors are refreshed with a final E-step so they reflect the returned
/// parameters.
EmState run(const AnnotationDataset& dataset, const AnnotatorTable& table, const EmConfig& config);

/// Group-level summary: mean fitted sensitivity/specificity over the members
/// of each group of each category.
struct GroupBiasSummary {
  /// est_alpha[p][g] = mean sensitivity over annotators with group g in
  /// category p (NaN if the group is empty); est_beta likewise.
  std::vector<std::vector<double>> est_alpha;
  std::vector<std::vector<double>> est_beta;
};
GroupBiasSummary report_group_bias(const EmState& state, const AnnotatorTable& table);

}  // namespace groupanno
