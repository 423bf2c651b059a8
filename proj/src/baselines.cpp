#include "groupanno/baselines.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "groupanno/mathutil.hpp"
#include "groupanno/parallel.hpp"

namespace groupanno {

PosteriorLabels majority_vote(const AnnotationDataset& dataset) {
  PosteriorLabels out;
  for (const Instance& inst : dataset.instances) {
    if (inst.annotations.empty()) {
      throw std::invalid_argument("majority_vote: instance '" + inst.instance_id +
                                  "' has no annotations");
    }
    double sum = 0.0;
    for (const Annotation& ann : inst.annotations) sum += ann.label;
    out.set(inst.instance_id, sum / static_cast<double>(inst.annotations.size()));
  }
  return out;
}

ZenCrowdResult zencrowd(const AnnotationDataset& dataset, const ZenCrowdConfig& config) {
  if (config.epochs == 0) {
    throw std::invalid_argument("zencrowd: epochs must be at least 1");
  }
  if (!(config.class_prior > 0.0 && config.class_prior < 1.0)) {
    throw std::invalid_argument("zencrowd: class_prior must lie in (0, 1)");
  }

  // Dense annotator index, sorted by id for determinism.
  std::map<std::string, std::size_t> index;
  for (const Instance& inst : dataset.instances) {
    if (inst.annotations.empty()) {
      throw std::invalid_argument("zencrowd: instance '" + inst.instance_id +
                                  "' has no annotations");
    }
    for (const Annotation& ann : inst.annotations) index.emplace(ann.annotator_id, 0);
  }
  std::vector<std::string> ids;
  ids.reserve(index.size());
  for (auto& [id, dense] : index) {
    dense = ids.size();
    ids.push_back(id);
  }
  const std::size_t r = ids.size();
  const std::size_t n = dataset.instances.size();
  std::vector<std::vector<std::pair<std::size_t, int>>> annotations(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const Annotation& ann : dataset.instances[i].annotations) {
      annotations[i].emplace_back(index.at(ann.annotator_id), ann.label);
    }
  }

  std::vector<double> q(r, clamp(config.init_reliability, 0.01, 0.99));
  std::vector<double> mu(n, 0.5);
  const double prior_term = logit(config.class_prior);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    // E-step: posterior of each instance under symmetric reliabilities.
    std::vector<double> lq(r), l1q(r);
    for (std::size_t j = 0; j < r; ++j) {
      lq[j] = std::log(q[j]);
      l1q[j] = std::log1p(-q[j]);
    }
    parallel_for(n, [&](std::size_t i) {
      double s1 = 0.0;  // log-likelihood of the labels given truth 1
      double s0 = 0.0;  // ... given truth 0
      for (const auto& [rr, z] : annotations[i]) {
        if (z == 1) {
          s1 += lq[rr];
          s0 += l1q[rr];
        } else {
          s1 += l1q[rr];
          s0 += lq[rr];
        }
      }
      mu[i] = sigmoid(s1 - s0 + prior_term);
    });

    // M-step: reliability = expected fraction of agreements with the truth.
    // Accumulator layout: [agreement mass (r), annotation count (r)]
    const std::vector<double> acc =
        blocked_accumulate(n, 2 * r, [&](std::size_t i, double* out) {
          for (const auto& [rr, z] : annotations[i]) {
            out[rr] += z == 1 ? mu[i] : 1.0 - mu[i];
            out[r + rr] += 1.0;
          }
        });
    for (std::size_t j = 0; j < r; ++j) {
      const double den = acc[r + j] > 1.0 ? acc[r + j] : 1.0;
      q[j] = clamp(acc[j] / den, 0.01, 0.99);
    }
  }

  ZenCrowdResult result;
  for (std::size_t i = 0; i < n; ++i) {
    result.posteriors.set(dataset.instances[i].instance_id, mu[i]);
  }
  for (std::size_t j = 0; j < r; ++j) result.reliability[ids[j]] = q[j];
  return result;
}

EmState lfc_binary(const AnnotationDataset& dataset, const EmConfig& config) {
  EmConfig flat = config;
  flat.group_model_enabled = false;
  AnnotatorTable no_groups;
  no_groups.num_categories = 0;
  return run(dataset, no_groups, flat);
}

}  // namespace groupanno
