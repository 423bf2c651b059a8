#include "groupanno/synthgen.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "groupanno/mathutil.hpp"
#include "groupanno/rng.hpp"

namespace groupanno {

namespace {

// Independent sub-stream tags so the three generation stages decouple:
// changing the annotator pool never perturbs the instance cloud.
constexpr std::uint64_t kInstanceStream = 0x696e7374ULL;
constexpr std::uint64_t kPoolStream = 0x706f6f6cULL;
constexpr std::uint64_t kLabelStream = 0x6c61626cULL;

// Circle geometry: class 0 uniform on a disk, class 1 on a jittered annulus.
constexpr double kCircleInnerRadius = 1.0;
constexpr double kAnnulusLow = 1.8;
constexpr double kAnnulusHigh = 2.2;
constexpr double kCircleJitterSd = 0.15;
constexpr double kMoonJitterSd = 0.1;

std::string padded_id(char prefix, std::size_t index, std::size_t count) {
  std::size_t width = 1;
  for (std::size_t v = count > 0 ? count - 1 : 0; v >= 10; v /= 10) ++width;
  std::string digits = std::to_string(index);
  std::string out(1, prefix);
  out.append(width - digits.size(), '0');
  out += digits;
  return out;
}

void validate_config(const SynthConfig& c) {
  if (c.shape != "circle" && c.shape != "moon") {
    throw std::invalid_argument("synth config: shape must be circle or moon");
  }
  if (c.annotations_per_instance > c.num_annotators) {
    throw std::invalid_argument(
        "synth config: annotations_per_instance exceeds num_annotators");
  }
  if (c.num_annotators < 2 || c.instances_per_class == 0 || c.num_categories == 0) {
    throw std::invalid_argument("synth config: degenerate pool or instance count");
  }
  auto check_targets = [&](const std::vector<std::vector<double>>& t, const char* name) {
    if (t.size() != c.num_categories) {
      throw std::invalid_argument(std::string("synth config: ") + name +
                                  " must have one row per category");
    }
    for (const auto& row : t) {
      if (row.size() != 2) {
        throw std::invalid_argument(std::string("synth config: ") + name +
                                    " rows must have exactly two groups");
      }
      for (double v : row) {
        if (!(v > 0.0 && v < 1.0)) {
          throw std::invalid_argument(std::string("synth config: ") + name +
                                      " entries must lie strictly in (0,1)");
        }
      }
    }
  };
  check_targets(c.target_group_alpha, "target_group_alpha");
  check_targets(c.target_group_beta, "target_group_beta");
}

// Grand mean and per-category sum-to-zero effects of a P x 2 target matrix.
void additive_decomposition(const std::vector<std::vector<double>>& targets, double& grand_mean,
                            std::vector<std::vector<double>>& effects) {
  const std::size_t P = targets.size();
  double total = 0.0;
  for (const auto& row : targets) total += 0.5 * (row[0] + row[1]);
  grand_mean = total / static_cast<double>(P);
  effects.assign(P, {0.0, 0.0});
  for (std::size_t p = 0; p < P; ++p) {
    const double row_mean = 0.5 * (targets[p][0] + targets[p][1]);
    effects[p][0] = targets[p][0] - row_mean;
    effects[p][1] = targets[p][1] - row_mean;
  }
}

}  // namespace

std::vector<LabeledPoint> generate_instances(const SynthConfig& config) {
  validate_config(config);
  Rng rng(mix_seed(config.seed ^ kInstanceStream));
  const std::size_t n = config.instances_per_class;
  std::vector<LabeledPoint> points;
  points.reserve(2 * n);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (config.shape == "circle") {
    for (std::size_t i = 0; i < n; ++i) {
      const double theta = rng.uniform(0.0, two_pi);
      const double r = kCircleInnerRadius * std::sqrt(rng.uniform01());
      points.push_back({{r * std::cos(theta), r * std::sin(theta)}, 0});
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double theta = rng.uniform(0.0, two_pi);
      const double r = rng.uniform(kAnnulusLow, kAnnulusHigh);
      const double jx = rng.normal(0.0, kCircleJitterSd);
      const double jy = rng.normal(0.0, kCircleJitterSd);
      points.push_back({{r * std::cos(theta) + jx, r * std::sin(theta) + jy}, 1});
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double t = rng.uniform(0.0, std::numbers::pi);
      const double jx = rng.normal(0.0, kMoonJitterSd);
      const double jy = rng.normal(0.0, kMoonJitterSd);
      points.push_back({{std::cos(t) + jx, std::sin(t) + jy}, 0});
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double t = rng.uniform(0.0, std::numbers::pi);
      const double jx = rng.normal(0.0, kMoonJitterSd);
      const double jy = rng.normal(0.0, kMoonJitterSd);
      points.push_back({{1.0 - std::cos(t) + jx, 0.5 - std::sin(t) + jy}, 1});
    }
  }
  return points;
}

AnnotatorPool generate_annotators(const SynthConfig& config) {
  validate_config(config);
  Rng rng(mix_seed(config.seed ^ kPoolStream));
  const std::size_t R = config.num_annotators;
  const std::size_t P = config.num_categories;

  // Balanced assignment: a shuffled pool per category, first half in group 0.
  std::vector<std::vector<int>> membership(R, std::vector<int>(P, 0));
  for (std::size_t p = 0; p < P; ++p) {
    std::vector<std::size_t> order(R);
    for (std::size_t r = 0; r < R; ++r) order[r] = r;
    rng.shuffle(order);
    for (std::size_t rank = 0; rank < R; ++rank) {
      membership[order[rank]][p] = rank < R / 2 ? 0 : 1;
    }
  }

  double u_alpha = 0.0;
  double u_beta = 0.0;
  std::vector<std::vector<double>> eff_alpha;
  std::vector<std::vector<double>> eff_beta;
  additive_decomposition(config.target_group_alpha, u_alpha, eff_alpha);
  additive_decomposition(config.target_group_beta, u_beta, eff_beta);

  AnnotatorPool pool;
  pool.table.num_categories = P;
  for (std::size_t r = 0; r < R; ++r) {
    const std::string id = padded_id('a', r, R);
    pool.table.annotators[id] = membership[r];
    double a = u_alpha;
    double b = u_beta;
    for (std::size_t p = 0; p < P; ++p) {
      a += eff_alpha[p][membership[r][p]];
      b += eff_beta[p][membership[r][p]];
    }
    a += rng.normal(0.0, config.individual_noise_sd);
    b += rng.normal(0.0, config.individual_noise_sd);
    pool.alpha[id] = clamp(a, 0.01, 0.99);
    pool.beta[id] = clamp(b, 0.01, 0.99);
  }
  return pool;
}

void compute_realized_marginals(const AnnotationDataset& dataset, const AnnotatorTable& table,
                                const std::map<std::string, int>& gold,
                                std::vector<std::vector<double>>& realized_alpha,
                                std::vector<std::vector<double>>& realized_beta) {
  const std::size_t P = table.num_categories;
  std::vector<std::vector<double>> correct_pos(P, {0.0, 0.0});
  std::vector<std::vector<double>> total_pos(P, {0.0, 0.0});
  std::vector<std::vector<double>> correct_neg(P, {0.0, 0.0});
  std::vector<std::vector<double>> total_neg(P, {0.0, 0.0});
  for (const auto& inst : dataset.instances) {
    const int y = gold.at(inst.instance_id);
    for (const auto& ann : inst.annotations) {
      const auto& groups = table.annotators.at(ann.annotator_id);
      for (std::size_t p = 0; p < P; ++p) {
        const int g = groups[p];
        if (y == 1) {
          total_pos[p][g] += 1.0;
          if (ann.label == 1) correct_pos[p][g] += 1.0;
        } else {
          total_neg[p][g] += 1.0;
          if (ann.label == 0) correct_neg[p][g] += 1.0;
        }
      }
    }
  }
  realized_alpha.assign(P, {0.0, 0.0});
  realized_beta.assign(P, {0.0, 0.0});
  for (std::size_t p = 0; p < P; ++p) {
    for (int g = 0; g < 2; ++g) {
      realized_alpha[p][g] =
          total_pos[p][g] > 0.0 ? correct_pos[p][g] / total_pos[p][g]
                                : std::numeric_limits<double>::quiet_NaN();
      realized_beta[p][g] =
          total_neg[p][g] > 0.0 ? correct_neg[p][g] / total_neg[p][g]
                                : std::numeric_limits<double>::quiet_NaN();
    }
  }
}

GroundTruthBundle generate_annotations(const std::vector<LabeledPoint>& points,
                                       const AnnotatorPool& pool, const SynthConfig& config) {
  validate_config(config);
  Rng rng(mix_seed(config.seed ^ kLabelStream));
  const std::size_t R = config.num_annotators;
  std::vector<std::string> annotator_ids;
  annotator_ids.reserve(R);
  for (const auto& [id, _] : pool.table.annotators) annotator_ids.push_back(id);
  if (annotator_ids.size() != R) {
    throw std::invalid_argument("generate_annotations: pool size does not match config");
  }

  GroundTruthBundle bundle;
  bundle.table = pool.table;
  bundle.true_annot_alpha = pool.alpha;
  bundle.true_annot_beta = pool.beta;
  bundle.dataset.feature_dim = points.empty() ? 0 : points.front().features.size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    Instance inst;
    inst.instance_id = padded_id('i', i, points.size());
    inst.features = points[i].features;
    const int y = points[i].label;
    bundle.gold[inst.instance_id] = y;
    for (std::size_t r_idx : rng.sample_without_replacement(R, config.annotations_per_instance)) {
      const std::string& id = annotator_ids[r_idx];
      const double p_correct = y == 1 ? pool.alpha.at(id) : pool.beta.at(id);
      const bool correct = rng.uniform01() < p_correct;
      const int z = correct ? y : 1 - y;
      inst.annotations.push_back({id, z});
    }
    bundle.dataset.instances.push_back(std::move(inst));
  }
  compute_realized_marginals(bundle.dataset, bundle.table, bundle.gold,
                             bundle.realized_group_alpha, bundle.realized_group_beta);
  return bundle;
}

GroundTruthBundle generate(const SynthConfig& config) {
  return generate_annotations(generate_instances(config), generate_annotators(config), config);
}

}  // namespace groupanno
