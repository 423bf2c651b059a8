#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "groupanno/types.hpp"

namespace groupanno {

/// Positive-annotation rates per demographic category, restricted (per
/// category) to the common instance set: instances annotated by at least one
/// member of each of the two groups. Restricting both groups to the same
/// instances removes instance-mix confounding from the comparison.
struct GroupPositiveRates {
  struct Category {
    /// rate[g]: fraction of positive annotations among group-g annotations on
    /// the common set; NaN when undefined.
    std::array<double, 2> rate{};
    /// Number of annotations behind each rate.
    std::array<std::size_t, 2> annotation_count{};
    /// Size of the common instance set.
    std::size_t common_instances = 0;
    bool defined = false;
  };
  std::vector<Category> categories;
};

GroupPositiveRates group_positive_rates(const AnnotationDataset& dataset,
                                        const AnnotatorTable& table);

/// Per-annotator empirical sensitivity/specificity against reference labels.
/// sensitivity = fraction of reference-positive instances the annotator
/// labelled 1 (undefined when the annotator saw none); specificity likewise
/// on reference-negatives.
struct AnnotatorBiasEstimate {
  std::string annotator_id;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::size_t n_reference_positive = 0;
  std::size_t n_reference_negative = 0;
};

/// reference maps instance_id -> hard label; instances missing from it are
/// skipped. Output is sorted by annotator_id.
std::vector<AnnotatorBiasEstimate> estimate_annotator_bias(
    const AnnotationDataset& dataset, const std::map<std::string, int>& reference);

enum class BiasResponse { kSensitivity, kSpecificity };

/// One-observation-per-annotator additive ANOVA of a bias response on the
/// demographic categories, fitted jointly (intercept plus a sum-to-zero
/// two-level factor per category) so each category's test is adjusted for the
/// others. Each category's sum of squares is the residual-sum-of-squares
/// increase from dropping that category from the joint fit; F compares it to
/// the joint-fit residual mean square.
struct CategoryAnova {
  double inter_group_ss = 0.0;
  double f_statistic = 0.0;
  double p_value = 1.0;
  /// Raw mean response per group (NaN for an empty group).
  std::array<double, 2> group_means{};
  /// Non-empty when the category could not be tested (for example all
  /// annotators fall in one group); the numeric fields are then meaningless.
  std::string error;
};

struct AnovaResult {
  std::vector<CategoryAnova> categories;  // one per table category
  double grand_mean = 0.0;                // fitted intercept of the joint model
  double residual_ss = 0.0;
  std::size_t df_residual = 0;
  /// Annotators with a defined response that entered the fit / were dropped.
  std::size_t n_used = 0;
  std::size_t n_dropped = 0;
};

AnovaResult run_anova(const std::vector<AnnotatorBiasEstimate>& estimates,
                      const AnnotatorTable& table, BiasResponse response);

}  // namespace groupanno
