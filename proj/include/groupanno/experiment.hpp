#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "groupanno/baselines.hpp"
#include "groupanno/classifier.hpp"
#include "groupanno/em.hpp"
#include "groupanno/synthgen.hpp"
#include "groupanno/types.hpp"

namespace groupanno {

/// Held-out split: a seeded shuffle of the instances, the first
/// floor(N * test_fraction) becoming the test set.
struct SplitConfig {
  double test_fraction = 0.2;
  std::uint64_t seed = 7;
};

/// A full comparison run: one data source, several truth-inference methods.
struct ExperimentConfig {
  /// Exactly one data source: generate synthetically, or load a directory
  /// containing annotations.csv / annotators.csv / gold.csv.
  std::optional<SynthConfig> synth;
  std::string data_dir;

  /// Any of: "mv", "zencrowd", "lfc", "groupanno".
  std::vector<std::string> methods{"mv", "zencrowd", "lfc", "groupanno"};

  SplitConfig split;
  EmConfig em;                  // lfc + groupanno
  ZenCrowdConfig zencrowd;      // zencrowd
  TrainConfig train;            // classifier fit for mv + zencrowd
};

/// Load an experiment config from a JSON file. Unknown keys are rejected so
/// typos fail loudly. Throws ValidationError on schema problems.
ExperimentConfig load_experiment_config(const std::string& path);

/// Per-method results. Truth metrics compare inferred hard labels with gold
/// on every instance; test metrics apply the method's classifier to the
/// held-out instances' features. bias_mae is the mean absolute difference
/// between group-mean fitted biases and the realized per-group marginals
/// (synthetic data only, confusion-model methods only).
struct MethodMetrics {
  double truth_accuracy = 0.0;
  double truth_f1 = 0.0;
  double test_accuracy = 0.0;
  double test_f1 = 0.0;
  std::optional<double> bias_mae;
  std::optional<double> bias_max_error;
};

struct MetricsReport {
  std::string data_source;  // shape name or directory
  std::uint64_t seed = 0;   // generation seed (0 for directory data)
  std::size_t n_instances = 0;
  std::size_t n_annotators = 0;
  std::size_t n_annotations = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::vector<std::pair<std::string, MethodMetrics>> methods;  // in config order
};

MetricsReport run_experiment(const ExperimentConfig& config);

/// Fixed-width text table of the report (byte-stable for a given report).
std::string format_report(const MetricsReport& report);

/// Write report.json and report.txt into dir.
void write_report(const MetricsReport& report, const std::string& dir);

}  // namespace groupanno
