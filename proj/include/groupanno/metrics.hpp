#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "groupanno/types.hpp"

namespace groupanno {

/// Fraction of predicted instances whose hard label matches gold. Every
/// predicted instance must appear in gold.
double accuracy(const std::map<std::string, int>& predicted,
                const std::map<std::string, int>& gold);

/// F1 of the positive class over the predicted instances.
/// Conventions: no positives anywhere (TP=FP=FN=0) scores 1.0; positives
/// exist but none are hit (TP=0) scores 0.0.
double f1_score(const std::map<std::string, int>& predicted,
                const std::map<std::string, int>& gold);

struct EvalMetrics {
  double accuracy = 0.0;
  double f1 = 0.0;
  std::size_t n_instances = 0;
};

EvalMetrics evaluate(const PosteriorLabels& posteriors, const std::map<std::string, int>& gold);

}  // namespace groupanno
