#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "groupanno/types.hpp"

namespace groupanno {

/// Configuration for the 2-D synthetic experiments.
///
/// target_group_alpha[p][g] / target_group_beta[p][g] are the intended
/// category-marginal sensitivity/specificity of group g in category p. The
/// generator decomposes them additively: grand mean u = mean of all targets,
/// per-category effect e[p][g] = target[p][g] - mean(target[p]); annotator r
/// gets clamp(u + sum_p e[p][g_r^p] + Normal(0, individual_noise_sd), .01, .99).
struct SynthConfig {
  std::string shape = "circle";  // "circle" or "moon"
  std::size_t instances_per_class = 400;
  std::size_t num_annotators = 40;
  std::size_t annotations_per_instance = 4;
  std::size_t num_categories = 2;
  std::vector<std::vector<double>> target_group_alpha;  // P x 2
  std::vector<std::vector<double>> target_group_beta;   // P x 2
  double individual_noise_sd = 0.02;
  std::uint64_t seed = 1;

  /// Defaults chosen so the default pool is exactly additive (both categories
  /// share one grand mean) and the four group-combination profiles span
  /// strong, asymmetric, and near-chance annotators.
  static SynthConfig defaults(const std::string& shape_name) {
    SynthConfig c;
    c.shape = shape_name;
    c.target_group_alpha = {{0.90, 0.44}, {0.75, 0.59}};
    c.target_group_beta = {{0.86, 0.40}, {0.55, 0.71}};
    return c;
  }
};

/// A generated 2-D point with its true class.
struct LabeledPoint {
  std::vector<double> features;
  int label = 0;
};

/// Generated annotator pool: memberships plus true biases.
struct AnnotatorPool {
  AnnotatorTable table;
  std::map<std::string, double> alpha;  // true sensitivity per annotator
  std::map<std::string, double> beta;   // true specificity per annotator
};

/// Everything the generator knows: the observable dataset plus ground truth.
struct GroundTruthBundle {
  AnnotationDataset dataset;
  AnnotatorTable table;
  std::map<std::string, int> gold;
  std::map<std::string, double> true_annot_alpha;
  std::map<std::string, double> true_annot_beta;
  // Empirical fraction of correct annotations per category/group, recomputable
  // from dataset+table+gold: realized_group_alpha[p][g] = #(z=1 & y=1) / #(y=1)
  // over annotations by group-g members of category p.
  std::vector<std::vector<double>> realized_group_alpha;  // P x 2
  std::vector<std::vector<double>> realized_group_beta;   // P x 2
};

/// Sample the instance cloud for the configured shape; exactly
/// instances_per_class points per class, class 0 first. Deterministic in seed.
std::vector<LabeledPoint> generate_instances(const SynthConfig& config);

/// Assign balanced random group memberships (half the pool per group,
/// independently per category) and draw each annotator's true biases from the
/// additive model. Deterministic in seed.
AnnotatorPool generate_annotators(const SynthConfig& config);

/// Sample annotations: per instance, annotations_per_instance distinct
/// annotators uniformly without replacement; each emits the correct label with
/// probability alpha_r (when y=1) or beta_r (when y=0). Deterministic in seed.
GroundTruthBundle generate_annotations(const std::vector<LabeledPoint>& points,
                                       const AnnotatorPool& pool,
                                       const SynthConfig& config);

/// Convenience: run all three stages.
GroundTruthBundle generate(const SynthConfig& config);

/// Recompute realized per-category group marginals from observable data plus
/// gold labels (used by generate_annotations and by tests).
void compute_realized_marginals(const AnnotationDataset& dataset, const AnnotatorTable& table,
                                const std::map<std::string, int>& gold,
                                std::vector<std::vector<double>>& realized_alpha,
                                std::vector<std::vector<double>>& realized_beta);

}  // namespace groupanno
