#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace groupanno {

/// One annotator's label for one instance.
struct Annotation {
  std::string annotator_id;
  int label = 0;  // 0 or 1
};

/// One labeled instance: features plus the annotations it received.
struct Instance {
  std::string instance_id;
  std::vector<double> features;  // length == AnnotationDataset::feature_dim
  std::vector<Annotation> annotations;
};

/// Crowdsourced dataset: instances with feature vectors and per-annotator labels.
struct AnnotationDataset {
  std::vector<Instance> instances;
  std::size_t feature_dim = 0;

  std::size_t num_annotations() const {
    std::size_t n = 0;
    for (const auto& inst : instances) n += inst.annotations.size();
    return n;
  }
};

/// Per-annotator demographic group memberships. Each of the num_categories
/// binary categories assigns the annotator to group 0 or group 1.
struct AnnotatorTable {
  std::map<std::string, std::vector<int>> annotators;  // id -> (g^1..g^P)
  std::size_t num_categories = 0;
};

/// Group-level and per-annotator bias parameters.
///
/// The prior mean of annotator r's sensitivity is
///   m_r = clamp(u_alpha + sum_p group_effects_alpha[p][g_r^p], eps, 1-eps)
/// and its sensitivity follows Beta(s*m_r, s*(1-m_r)); likewise specificity.
struct GroupBiasParams {
  double u_alpha = 0.0;
  double u_beta = 0.0;
  std::vector<std::vector<double>> group_effects_alpha;  // P x 2
  std::vector<std::vector<double>> group_effects_beta;   // P x 2
  std::map<std::string, double> annot_alpha;  // sensitivity per annotator, in (0,1)
  std::map<std::string, double> annot_beta;   // specificity per annotator, in (0,1)
  double concentration = 10.0;                // Beta prior strength s
};

/// Logistic-regression parameters.
struct ClassifierParams {
  std::vector<double> weights;
  double intercept = 0.0;
};

/// Posterior P(y=1 | annotations, features) and hard labels per instance.
/// Invariant: hard[i] == 1 iff mu[i] >= 0.5 (a tie at exactly 0.5 maps to 1).
struct PosteriorLabels {
  std::map<std::string, double> mu;
  std::map<std::string, int> hard;

  void set(const std::string& instance_id, double mu_value) {
    mu[instance_id] = mu_value;
    hard[instance_id] = mu_value >= 0.5 ? 1 : 0;
  }
};

/// Check an AnnotationDataset against its AnnotatorTable.
/// Returns one human-readable violation per problem; empty means valid.
std::vector<std::string> validate_dataset(const AnnotationDataset& dataset,
                                          const AnnotatorTable& table);

}  // namespace groupanno
