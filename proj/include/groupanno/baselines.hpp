#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "groupanno/em.hpp"
#include "groupanno/types.hpp"

namespace groupanno {

/// Soft majority vote: mu_i = mean annotation of instance i
/// (hard label 1 on ties at 0.5, like every other posterior here).
PosteriorLabels majority_vote(const AnnotationDataset& dataset);

/// EM over per-annotator symmetric reliabilities.
struct ZenCrowdConfig {
  std::size_t epochs = 50;
  double class_prior = 0.5;
  double init_reliability = 0.8;
};

struct ZenCrowdResult {
  /// Posteriors from the final E-step (computed before that epoch's M-step,
  /// so a 1-epoch run with a uniform initial reliability reproduces majority
  /// vote's hard labels).
  PosteriorLabels posteriors;
  /// Reliabilities after the final M-step, clamped to [0.01, 0.99].
  std::map<std::string, double> reliability;
};

ZenCrowdResult zencrowd(const AnnotationDataset& dataset, const ZenCrowdConfig& config = {});

/// Per-annotator sensitivity/specificity EM with a jointly trained
/// classifier: the group-model fit with the group tie switched off.
EmState lfc_binary(const AnnotationDataset& dataset, const EmConfig& config);

}  // namespace groupanno
