#include "groupanno/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "groupanno/io.hpp"
#include "groupanno/metrics.hpp"
#include "groupanno/rng.hpp"

namespace groupanno {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Sub-stream tag so the split shuffle is independent of generation streams.
constexpr std::uint64_t kSplitStream = 0x73706c74;  // "splt"

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (allowed.find(key) == allowed.end()) {
      throw ValidationError(where + ": unknown key '" + key + "'");
    }
  }
}

std::vector<std::vector<double>> parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected an array of [g0, g1] pairs");
  std::vector<std::vector<double>> out;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != 2) {
      throw ValidationError(where + ": each row must hold exactly two numbers");
    }
    out.push_back({row[0].get<double>(), row[1].get<double>()});
  }
  return out;
}

SynthConfig parse_synth(const json& j) {
  check_keys(j,
             {"shape", "instances_per_class", "num_annotators", "annotations_per_instance",
              "num_categories", "target_group_alpha", "target_group_beta", "individual_noise_sd",
              "seed"},
             "data.synthetic");
  SynthConfig c = SynthConfig::defaults(j.value("shape", std::string("circle")));
  if (j.contains("instances_per_class")) c.instances_per_class = j["instances_per_class"];
  if (j.contains("num_annotators")) c.num_annotators = j["num_annotators"];
  if (j.contains("annotations_per_instance"))
    c.annotations_per_instance = j["annotations_per_instance"];
  if (j.contains("num_categories")) c.num_categories = j["num_categories"];
  if (j.contains("target_group_alpha"))
    c.target_group_alpha = parse_matrix(j["target_group_alpha"], "data.synthetic.target_group_alpha");
  if (j.contains("target_group_beta"))
    c.target_group_beta = parse_matrix(j["target_group_beta"], "data.synthetic.target_group_beta");
  if (j.contains("individual_noise_sd")) c.individual_noise_sd = j["individual_noise_sd"];
  if (j.contains("seed")) c.seed = j["seed"];
  return c;
}

EmConfig parse_em(const json& j) {
  check_keys(j,
             {"epochs", "m_steps_per_epoch", "learning_rate", "concentration", "clamp_eps",
              "l2_classifier", "group_model_enabled", "seed"},
             "em");
  EmConfig c;
  if (j.contains("epochs")) c.epochs = j["epochs"];
  if (j.contains("m_steps_per_epoch")) c.m_steps_per_epoch = j["m_steps_per_epoch"];
  if (j.contains("learning_rate")) c.learning_rate = j["learning_rate"];
  if (j.contains("concentration")) c.concentration = j["concentration"];
  if (j.contains("clamp_eps")) c.clamp_eps = j["clamp_eps"];
  if (j.contains("l2_classifier")) c.l2_classifier = j["l2_classifier"];
  if (j.contains("group_model_enabled")) c.group_model_enabled = j["group_model_enabled"];
  if (j.contains("seed")) c.seed = j["seed"];
  return c;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
  }
  check_keys(j, {"data", "methods", "split", "em", "zencrowd", "train"}, "config");

  ExperimentConfig config;
  if (!j.contains("data")) throw ValidationError("config: missing 'data'");
  check_keys(j["data"], {"synthetic", "directory"}, "data");
  const bool has_synth = j["data"].contains("synthetic");
  const bool has_dir = j["data"].contains("directory");
  if (has_synth == has_dir) {
    throw ValidationError("data: provide exactly one of 'synthetic' or 'directory'");
  }
  if (has_synth) {
    config.synth = parse_synth(j["data"]["synthetic"]);
  } else {
    config.data_dir = j["data"]["directory"].get<std::string>();
  }

  if (j.contains("methods")) {
    config.methods.clear();
    for (const auto& m : j["methods"]) config.methods.push_back(m.get<std::string>());
    if (config.methods.empty()) throw ValidationError("methods: list is empty");
  }
  for (const std::string& m : config.methods) {
    if (m != "mv" && m != "zencrowd" && m != "lfc" && m != "groupanno") {
      throw ValidationError("methods: unknown method '" + m +
                            "' (expected mv, zencrowd, lfc, or groupanno)");
    }
  }

  if (j.contains("split")) {
    check_keys(j["split"], {"test_fraction", "seed"}, "split");
    if (j["split"].contains("test_fraction"))
      config.split.test_fraction = j["split"]["test_fraction"];
    if (j["split"].contains("seed")) config.split.seed = j["split"]["seed"];
  }
  if (!(config.split.test_fraction >= 0.0 && config.split.test_fraction < 1.0)) {
    throw ValidationError("split.test_fraction must lie in [0, 1)");
  }

  if (j.contains("em")) config.em = parse_em(j["em"]);
  if (j.contains("zencrowd")) {
    check_keys(j["zencrowd"], {"epochs", "class_prior", "init_reliability"}, "zencrowd");
    const json& z = j["zencrowd"];
    if (z.contains("epochs")) config.zencrowd.epochs = z["epochs"];
    if (z.contains("class_prior")) config.zencrowd.class_prior = z["class_prior"];
    if (z.contains("init_reliability")) config.zencrowd.init_reliability = z["init_reliability"];
  }
  if (j.contains("train")) {
    check_keys(j["train"], {"learning_rate", "epochs", "l2", "seed"}, "train");
    const json& t = j["train"];
    if (t.contains("learning_rate")) config.train.learning_rate = t["learning_rate"];
    if (t.contains("epochs")) config.train.epochs = t["epochs"];
    if (t.contains("l2")) config.train.l2 = t["l2"];
    if (t.contains("seed")) config.train.seed = t["seed"];
  }
  return config;
}

namespace {

AnnotationDataset subset_dataset(const AnnotationDataset& ds, const std::vector<bool>& keep) {
  AnnotationDataset out;
  out.feature_dim = ds.feature_dim;
  for (std::size_t i = 0; i < ds.instances.size(); ++i) {
    if (keep[i]) out.instances.push_back(ds.instances[i]);
  }
  return out;
}

/// Hard labels of train instances as a soft-label vector for classifier
/// training (the infer-then-train baseline pipeline).
std::vector<double> hard_labels_vector(const AnnotationDataset& ds,
                                       const PosteriorLabels& posteriors) {
  std::vector<double> mu;
  mu.reserve(ds.instances.size());
  for (const Instance& inst : ds.instances) {
    mu.push_back(static_cast<double>(posteriors.hard.at(inst.instance_id)));
  }
  return mu;
}

PosteriorLabels classify_instances(const ClassifierParams& params, const AnnotationDataset& ds) {
  PosteriorLabels out;
  for (const Instance& inst : ds.instances) {
    out.set(inst.instance_id, predict_proba(params, inst.features));
  }
  return out;
}

/// Mean/max absolute difference between fitted group-mean biases and the
/// realized marginals, over entries where both sides are defined.
std::pair<std::optional<double>, std::optional<double>> bias_errors(
    const GroupBiasSummary& summary, const std::vector<std::vector<double>>& realized_alpha,
    const std::vector<std::vector<double>>& realized_beta) {
  double sum = 0.0;
  double worst = 0.0;
  std::size_t count = 0;
  const auto visit = [&](const std::vector<std::vector<double>>& est,
                         const std::vector<std::vector<double>>& truth) {
    for (std::size_t c = 0; c < est.size() && c < truth.size(); ++c) {
      for (std::size_t g = 0; g < 2; ++g) {
        const double e = est[c][g];
        const double t = truth[c][g];
        if (std::isnan(e) || std::isnan(t)) continue;
        const double err = std::fabs(e - t);
        sum += err;
        worst = std::max(worst, err);
        ++count;
      }
    }
  };
  visit(summary.est_alpha, realized_alpha);
  visit(summary.est_beta, realized_beta);
  if (count == 0) return {std::nullopt, std::nullopt};
  return {sum / static_cast<double>(count), worst};
}

}  // namespace

MetricsReport run_experiment(const ExperimentConfig& config) {
  // Acquire data.
  AnnotationDataset dataset;
  AnnotatorTable table;
  std::map<std::string, int> gold;
  std::vector<std::vector<double>> realized_alpha, realized_beta;
  MetricsReport report;
  if (config.synth.has_value()) {
    GroundTruthBundle bundle = generate(*config.synth);
    dataset = std::move(bundle.dataset);
    table = std::move(bundle.table);
    gold = std::move(bundle.gold);
    realized_alpha = std::move(bundle.realized_group_alpha);
    realized_beta = std::move(bundle.realized_group_beta);
    report.data_source = config.synth->shape;
    report.seed = config.synth->seed;
  } else {
    LoadedData data = load_data_dir(config.data_dir);
    dataset = std::move(data.dataset);
    table = std::move(data.table);
    gold = read_gold(config.data_dir + "/gold.csv");
    report.data_source = config.data_dir;
  }
  for (const Instance& inst : dataset.instances) {
    if (gold.find(inst.instance_id) == gold.end()) {
      throw ValidationError("gold labels missing instance '" + inst.instance_id + "'");
    }
  }

  const std::size_t n = dataset.instances.size();
  report.n_instances = n;
  report.n_annotations = dataset.num_annotations();
  {
    std::set<std::string> ids;
    for (const Instance& inst : dataset.instances) {
      for (const Annotation& ann : inst.annotations) ids.insert(ann.annotator_id);
    }
    report.n_annotators = ids.size();
  }

  // Held-out split.
  const auto n_test =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) * config.split.test_fraction));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng split_rng(mix_seed(config.split.seed ^ kSplitStream));
  split_rng.shuffle(order);
  std::vector<bool> is_test(n, false);
  for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = true;
  std::vector<bool> is_train(n);
  for (std::size_t i = 0; i < n; ++i) is_train[i] = !is_test[i];
  const AnnotationDataset train_ds = subset_dataset(dataset, is_train);
  const AnnotationDataset test_ds = subset_dataset(dataset, is_test);
  report.n_train = train_ds.instances.size();
  report.n_test = test_ds.instances.size();

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const std::string& method : config.methods) {
    MethodMetrics mm;
    PosteriorLabels truth_labels;
    ClassifierParams test_classifier;
    bool have_classifier = false;

    if (method == "mv" || method == "zencrowd") {
      if (method == "mv") {
        truth_labels = majority_vote(dataset);
      } else {
        truth_labels = zencrowd(dataset, config.zencrowd).posteriors;
      }
      if (!test_ds.instances.empty()) {
        PosteriorLabels train_labels = method == "mv"
                                           ? majority_vote(train_ds)
                                           : zencrowd(train_ds, config.zencrowd).posteriors;
        test_classifier = fit(train_ds, hard_labels_vector(train_ds, train_labels), config.train);
        have_classifier = true;
      }
    } else {
      EmConfig em_cfg = config.em;
      em_cfg.group_model_enabled = method == "groupanno";
      EmState full_state = method == "groupanno" ? run(dataset, table, em_cfg)
                                                 : lfc_binary(dataset, em_cfg);
      truth_labels = full_state.posteriors;
      if (!realized_alpha.empty()) {
        const GroupBiasSummary summary = report_group_bias(full_state, table);
        std::tie(mm.bias_mae, mm.bias_max_error) =
            bias_errors(summary, realized_alpha, realized_beta);
      }
      if (!test_ds.instances.empty()) {
        EmState train_state = method == "groupanno" ? run(train_ds, table, em_cfg)
                                                    : lfc_binary(train_ds, em_cfg);
        test_classifier = train_state.classifier;
        have_classifier = true;
      }
    }

    const EvalMetrics truth_metrics = evaluate(truth_labels, gold);
    mm.truth_accuracy = truth_metrics.accuracy;
    mm.truth_f1 = truth_metrics.f1;
    if (have_classifier) {
      const EvalMetrics test_metrics = evaluate(classify_instances(test_classifier, test_ds), gold);
      mm.test_accuracy = test_metrics.accuracy;
      mm.test_f1 = test_metrics.f1;
    } else {
      mm.test_accuracy = nan;
      mm.test_f1 = nan;
    }
    report.methods.emplace_back(method, mm);
  }
  return report;
}

std::string format_report(const MetricsReport& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "source: %s (seed %llu)\n", report.data_source.c_str(),
                static_cast<unsigned long long>(report.seed));
  out += line;
  std::snprintf(line, sizeof(line),
                "instances: %zu  annotators: %zu  annotations: %zu  train: %zu  test: %zu\n\n",
                report.n_instances, report.n_annotators, report.n_annotations, report.n_train,
                report.n_test);
  out += line;
  std::snprintf(line, sizeof(line), "%-10s %10s %9s %9s %8s %9s %9s\n", "method", "truth_acc",
                "truth_f1", "test_acc", "test_f1", "bias_mae", "bias_max");
  out += line;
  const auto cell = [](double v) {
    char buf[32];
    if (std::isnan(v)) {
      std::snprintf(buf, sizeof(buf), "%s", "-");
    } else {
      std::snprintf(buf, sizeof(buf), "%.4f", v);
    }
    return std::string(buf);
  };
  const double undefined = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [name, mm] : report.methods) {
    std::snprintf(line, sizeof(line), "%-10s %10s %9s %9s %8s %9s %9s\n", name.c_str(),
                  cell(mm.truth_accuracy).c_str(), cell(mm.truth_f1).c_str(),
                  cell(mm.test_accuracy).c_str(), cell(mm.test_f1).c_str(),
                  cell(mm.bias_mae.value_or(undefined)).c_str(),
                  cell(mm.bias_max_error.value_or(undefined)).c_str());
    out += line;
  }
  return out;
}

void write_report(const MetricsReport& report, const std::string& dir) {
  ordered_json j;
  j["data_source"] = report.data_source;
  j["seed"] = report.seed;
  j["n_instances"] = report.n_instances;
  j["n_annotators"] = report.n_annotators;
  j["n_annotations"] = report.n_annotations;
  j["n_train"] = report.n_train;
  j["n_test"] = report.n_test;
  j["methods"] = ordered_json::array();
  for (const auto& [name, mm] : report.methods) {
    ordered_json m;
    m["method"] = name;
    m["truth_accuracy"] = mm.truth_accuracy;
    m["truth_f1"] = mm.truth_f1;
    if (std::isnan(mm.test_accuracy)) {
      m["test_accuracy"] = nullptr;
      m["test_f1"] = nullptr;
    } else {
      m["test_accuracy"] = mm.test_accuracy;
      m["test_f1"] = mm.test_f1;
    }
    if (mm.bias_mae.has_value()) {
      m["bias_mae"] = *mm.bias_mae;
      m["bias_max_error"] = *mm.bias_max_error;
    } else {
      m["bias_mae"] = nullptr;
      m["bias_max_error"] = nullptr;
    }
    j["methods"].push_back(m);
  }
  {
    std::ofstream out(dir + "/report.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + dir + "/report.json");
    out << j.dump(2) << '\n';
  }
  {
    std::ofstream out(dir + "/report.txt", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + dir + "/report.txt");
    out << format_report(report);
  }
}

}  // namespace groupanno
