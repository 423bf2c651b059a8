#include "groupanno/metrics.hpp"

#include <stdexcept>

namespace groupanno {

namespace {

int gold_label(const std::map<std::string, int>& gold, const std::string& instance_id) {
  auto it = gold.find(instance_id);
  if (it == gold.end()) {
    throw std::invalid_argument("no gold label for instance '" + instance_id + "'");
  }
  return it->second;
}

}  // namespace

double accuracy(const std::map<std::string, int>& predicted,
                const std::map<std::string, int>& gold) {
  if (predicted.empty()) throw std::invalid_argument("accuracy: no predictions");
  std::size_t hits = 0;
  for (const auto& [id, label] : predicted) {
    if (label == gold_label(gold, id)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double f1_score(const std::map<std::string, int>& predicted,
                const std::map<std::string, int>& gold) {
  if (predicted.empty()) throw std::invalid_argument("f1_score: no predictions");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& [id, label] : predicted) {
    const int truth = gold_label(gold, id);
    if (label == 1 && truth == 1) ++tp;
    if (label == 1 && truth == 0) ++fp;
    if (label == 0 && truth == 1) ++fn;
  }
  if (tp + fp + fn == 0) return 1.0;  // no positives anywhere: vacuously perfect
  if (tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

EvalMetrics evaluate(const PosteriorLabels& posteriors, const std::map<std::string, int>& gold) {
  EvalMetrics m;
  m.accuracy = accuracy(posteriors.hard, gold);
  m.f1 = f1_score(posteriors.hard, gold);
  m.n_instances = posteriors.hard.size();
  return m;
}

}  // namespace groupanno
