#include "groupanno/bias_analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "groupanno/mathutil.hpp"

namespace groupanno {

namespace {

const std::vector<int>& groups_for(const AnnotatorTable& table, const std::string& id) {
  auto it = table.annotators.find(id);
  if (it == table.annotators.end()) {
    throw std::invalid_argument("annotator '" + id + "' is missing from the annotator table");
  }
  if (it->second.size() != table.num_categories) {
    throw std::invalid_argument("annotator '" + id + "' has a malformed group vector");
  }
  return it->second;
}

/// Least squares via normal equations with partial pivoting; the designs here
/// have at most a handful of columns. Returns false when singular.
bool solve_least_squares(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                         std::vector<double>& coef, double& rss) {
  const std::size_t n = x.size();
  const std::size_t k = n == 0 ? 0 : x[0].size();
  std::vector<std::vector<double>> ata(k, std::vector<double>(k, 0.0));
  std::vector<double> aty(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      aty[a] += x[i][a] * y[i];
      for (std::size_t b = 0; b < k; ++b) ata[a][b] += x[i][a] * x[i][b];
    }
  }
  // Gaussian elimination with partial pivoting on [ata | aty].
  std::vector<std::size_t> perm(k);
  for (std::size_t i = 0; i < k; ++i) perm[i] = i;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < k; ++row) {
      if (std::fabs(ata[row][col]) > std::fabs(ata[pivot][col])) pivot = row;
    }
    if (std::fabs(ata[pivot][col]) < 1e-10 * static_cast<double>(n)) return false;
    std::swap(ata[col], ata[pivot]);
    std::swap(aty[col], aty[pivot]);
    for (std::size_t row = col + 1; row < k; ++row) {
      const double m = ata[row][col] / ata[col][col];
      for (std::size_t c = col; c < k; ++c) ata[row][c] -= m * ata[col][c];
      aty[row] -= m * aty[col];
    }
  }
  coef.assign(k, 0.0);
  for (std::size_t col = k; col-- > 0;) {
    double v = aty[col];
    for (std::size_t c = col + 1; c < k; ++c) v -= ata[col][c] * coef[c];
    coef[col] = v / ata[col][col];
  }
  rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = 0.0;
    for (std::size_t a = 0; a < k; ++a) pred += x[i][a] * coef[a];
    const double resid = y[i] - pred;
    rss += resid * resid;
  }
  return true;
}

}  // namespace

GroupPositiveRates group_positive_rates(const AnnotationDataset& dataset,
                                        const AnnotatorTable& table) {
  const std::size_t p = table.num_categories;
  GroupPositiveRates out;
  out.categories.resize(p);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t c = 0; c < p; ++c) {
    auto& cat = out.categories[c];
    cat.rate = {nan, nan};
    // Pass 1: find the common instance set for this category.
    // Pass 2: count annotations/positives per group over that set.
    std::array<std::size_t, 2> positives{0, 0};
    for (const Instance& inst : dataset.instances) {
      bool seen[2] = {false, false};
      for (const Annotation& ann : inst.annotations) {
        const auto g = static_cast<std::size_t>(groups_for(table, ann.annotator_id)[c]);
        seen[g] = true;
      }
      if (!(seen[0] && seen[1])) continue;
      ++cat.common_instances;
      for (const Annotation& ann : inst.annotations) {
        const auto g = static_cast<std::size_t>(groups_for(table, ann.annotator_id)[c]);
        ++cat.annotation_count[g];
        if (ann.label == 1) ++positives[g];
      }
    }
    if (cat.common_instances > 0 && cat.annotation_count[0] > 0 && cat.annotation_count[1] > 0) {
      cat.defined = true;
      for (std::size_t g = 0; g < 2; ++g) {
        cat.rate[g] =
            static_cast<double>(positives[g]) / static_cast<double>(cat.annotation_count[g]);
      }
    }
  }
  return out;
}

std::vector<AnnotatorBiasEstimate> estimate_annotator_bias(
    const AnnotationDataset& dataset, const std::map<std::string, int>& reference) {
  struct Counts {
    std::size_t pos_hits = 0, pos_total = 0;
    std::size_t neg_hits = 0, neg_total = 0;
  };
  std::map<std::string, Counts> counts;
  for (const Instance& inst : dataset.instances) {
    auto ref = reference.find(inst.instance_id);
    if (ref == reference.end()) continue;
    for (const Annotation& ann : inst.annotations) {
      Counts& c = counts[ann.annotator_id];
      if (ref->second == 1) {
        ++c.pos_total;
        if (ann.label == 1) ++c.pos_hits;
      } else {
        ++c.neg_total;
        if (ann.label == 0) ++c.neg_hits;
      }
    }
  }
  std::vector<AnnotatorBiasEstimate> out;
  out.reserve(counts.size());
  for (const auto& [id, c] : counts) {
    AnnotatorBiasEstimate est;
    est.annotator_id = id;
    est.n_reference_positive = c.pos_total;
    est.n_reference_negative = c.neg_total;
    if (c.pos_total > 0) {
      est.sensitivity = static_cast<double>(c.pos_hits) / static_cast<double>(c.pos_total);
    }
    if (c.neg_total > 0) {
      est.specificity = static_cast<double>(c.neg_hits) / static_cast<double>(c.neg_total);
    }
    out.push_back(std::move(est));
  }
  return out;
}

AnovaResult run_anova(const std::vector<AnnotatorBiasEstimate>& estimates,
                      const AnnotatorTable& table, BiasResponse response) {
  const std::size_t p = table.num_categories;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  AnovaResult result;
  result.categories.resize(p);
  result.grand_mean = nan;
  result.residual_ss = nan;

  // Collect (response, group vector) rows, dropping undefined responses and
  // annotators absent from the table.
  std::vector<double> y;
  std::vector<std::vector<int>> g;
  for (const AnnotatorBiasEstimate& est : estimates) {
    const std::optional<double>& value =
        response == BiasResponse::kSensitivity ? est.sensitivity : est.specificity;
    auto it = table.annotators.find(est.annotator_id);
    if (!value.has_value() || it == table.annotators.end() ||
        it->second.size() != p) {
      ++result.n_dropped;
      continue;
    }
    y.push_back(*value);
    g.push_back(it->second);
  }
  result.n_used = y.size();
  const std::size_t n = y.size();

  // Raw group means (reported even when a category cannot be tested).
  for (std::size_t c = 0; c < p; ++c) {
    double sum[2] = {0.0, 0.0};
    std::size_t cnt[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      const auto gg = static_cast<std::size_t>(g[i][c]);
      sum[gg] += y[i];
      ++cnt[gg];
    }
    for (std::size_t gg = 0; gg < 2; ++gg) {
      result.categories[c].group_means[gg] =
          cnt[gg] > 0 ? sum[gg] / static_cast<double>(cnt[gg]) : nan;
    }
    result.categories[c].inter_group_ss = nan;
    result.categories[c].f_statistic = nan;
    result.categories[c].p_value = nan;
    if (cnt[0] == 0 || cnt[1] == 0) {
      result.categories[c].error = "all annotators fall in one group";
    }
  }

  // Categories that can enter the joint design.
  std::vector<std::size_t> live;
  for (std::size_t c = 0; c < p; ++c) {
    if (result.categories[c].error.empty()) live.push_back(c);
  }
  const auto fail_live = [&](const std::string& message) {
    for (std::size_t c : live) result.categories[c].error = message;
  };
  if (live.empty()) return result;
  if (n < live.size() + 2) {
    fail_live("not enough annotators for the joint fit");
    return result;
  }

  // Joint design: intercept plus one sum-to-zero column per live category
  // (+1 for group 0, -1 for group 1).
  const std::size_t k = live.size() + 1;
  std::vector<std::vector<double>> x(n, std::vector<double>(k, 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < live.size(); ++j) {
      x[i][j + 1] = 1.0 - 2.0 * static_cast<double>(g[i][live[j]]);
    }
  }
  std::vector<double> coef;
  double rss_full = 0.0;
  if (!solve_least_squares(x, y, coef, rss_full)) {
    fail_live("collinear group structure across categories");
    return result;
  }
  const std::size_t df = n - k;
  result.grand_mean = coef[0];
  result.residual_ss = rss_full;
  result.df_residual = df;
  if (df == 0) {
    fail_live("no residual degrees of freedom");
    return result;
  }

  for (std::size_t j = 0; j < live.size(); ++j) {
    // Drop category j's column and measure the residual-sum-of-squares rise.
    std::vector<std::vector<double>> xr(n, std::vector<double>(k - 1));
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t col = 0;
      for (std::size_t a = 0; a < k; ++a) {
        if (a == j + 1) continue;
        xr[i][col++] = x[i][a];
      }
    }
    std::vector<double> coef_r;
    double rss_r = 0.0;
    CategoryAnova& cat = result.categories[live[j]];
    if (!solve_least_squares(xr, y, coef_r, rss_r)) {
      cat.error = "collinear group structure across categories";
      continue;
    }
    cat.inter_group_ss = rss_r - rss_full;
    cat.f_statistic = cat.inter_group_ss / (rss_full / static_cast<double>(df));
    cat.p_value = f_sf(cat.f_statistic, 1.0, static_cast<double>(df));
  }
  return result;
}

}  // namespace groupanno
