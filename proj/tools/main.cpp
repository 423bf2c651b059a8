#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "groupanno/baselines.hpp"
#include "groupanno/bias_analysis.hpp"
#include "groupanno/em.hpp"
#include "groupanno/experiment.hpp"
#include "groupanno/io.hpp"
#include "groupanno/metrics.hpp"
#include "groupanno/parallel.hpp"
#include "groupanno/synthgen.hpp"
#include "groupanno/types.hpp"

namespace {

using groupanno::ValidationError;
using ordered_json = nlohmann::ordered_json;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

void require_valid(const groupanno::AnnotationDataset& dataset,
                   const groupanno::AnnotatorTable& table) {
  const std::vector<std::string> problems = groupanno::validate_dataset(dataset, table);
  if (!problems.empty()) {
    std::string message = "invalid dataset:";
    const std::size_t shown = problems.size() < 8 ? problems.size() : 8;
    for (std::size_t i = 0; i < shown; ++i) message += "\n  - " + problems[i];
    if (problems.size() > shown) {
      message += "\n  (" + std::to_string(problems.size() - shown) + " more)";
    }
    throw ValidationError(message);
  }
}

int run_generate(const std::string& shape, std::size_t instances_per_class,
                 std::size_t num_annotators, std::size_t annotations_per_instance, double noise_sd,
                 std::uint64_t seed, const std::string& out_dir) {
  groupanno::SynthConfig config = groupanno::SynthConfig::defaults(shape);
  config.instances_per_class = instances_per_class;
  config.num_annotators = num_annotators;
  config.annotations_per_instance = annotations_per_instance;
  config.individual_noise_sd = noise_sd;
  config.seed = seed;
  const groupanno::GroundTruthBundle bundle = groupanno::generate(config);
  ensure_dir(out_dir);
  groupanno::write_bundle(bundle, out_dir);
  std::printf("wrote %zu instances, %zu annotators, %zu annotations to %s\n",
              bundle.dataset.instances.size(), bundle.table.annotators.size(),
              bundle.dataset.num_annotations(), out_dir.c_str());
  return 0;
}

std::string format_rate(double v) {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

int run_analyze(const std::string& data_dir, const std::string& reference_kind,
                const std::string& out_dir) {
  const groupanno::LoadedData data = groupanno::load_data_dir(data_dir);
  require_valid(data.dataset, data.table);
  std::vector<std::string> names = groupanno::read_annotator_category_names(
      data_dir + "/annotators.csv");
  if (names.size() != data.table.num_categories) {
    names.clear();
    for (std::size_t c = 0; c < data.table.num_categories; ++c) {
      names.push_back("category_" + std::to_string(c));
    }
  }

  std::map<std::string, int> reference;
  if (reference_kind == "mv") {
    reference = groupanno::majority_vote(data.dataset).hard;
  } else {
    reference = groupanno::read_gold(data_dir + "/gold.csv");
  }

  const groupanno::GroupPositiveRates rates =
      groupanno::group_positive_rates(data.dataset, data.table);
  const std::vector<groupanno::AnnotatorBiasEstimate> estimates =
      groupanno::estimate_annotator_bias(data.dataset, reference);
  const groupanno::AnovaResult sens =
      groupanno::run_anova(estimates, data.table, groupanno::BiasResponse::kSensitivity);
  const groupanno::AnovaResult spec =
      groupanno::run_anova(estimates, data.table, groupanno::BiasResponse::kSpecificity);

  std::string text;
  text += "reference labels: " + reference_kind + "\n\n";
  text += "positive annotation rates on common instance sets\n";
  for (std::size_t c = 0; c < rates.categories.size(); ++c) {
    const auto& cat = rates.categories[c];
    text += "  " + names[c] + ": group0 " + format_rate(cat.rate[0]) + " (" +
            std::to_string(cat.annotation_count[0]) + " annotations), group1 " +
            format_rate(cat.rate[1]) + " (" + std::to_string(cat.annotation_count[1]) +
            " annotations), common instances " + std::to_string(cat.common_instances) + "\n";
  }
  const auto anova_block = [&](const char* title, const groupanno::AnovaResult& r) {
    text += "\nanova: ";
    text += title;
    char buf[160];
    std::snprintf(buf, sizeof(buf), " (n=%zu, dropped=%zu, residual df=%zu)\n", r.n_used,
                  r.n_dropped, r.df_residual);
    text += buf;
    for (std::size_t c = 0; c < r.categories.size(); ++c) {
      const auto& cat = r.categories[c];
      if (!cat.error.empty()) {
        text += "  " + names[c] + ": not testable (" + cat.error + ")\n";
        continue;
      }
      std::snprintf(buf, sizeof(buf),
                    "  %s: mean0 %.4f mean1 %.4f ss %.6f F %.3f p %.6g\n", names[c].c_str(),
                    cat.group_means[0], cat.group_means[1], cat.inter_group_ss, cat.f_statistic,
                    cat.p_value);
      text += buf;
    }
  };
  anova_block("sensitivity", sens);
  anova_block("specificity", spec);
  std::fputs(text.c_str(), stdout);

  ordered_json j;
  j["reference"] = reference_kind;
  j["positive_rates"] = ordered_json::array();
  for (std::size_t c = 0; c < rates.categories.size(); ++c) {
    const auto& cat = rates.categories[c];
    ordered_json cj;
    cj["category"] = names[c];
    cj["defined"] = cat.defined;
    cj["rate_group0"] = cat.defined ? ordered_json(cat.rate[0]) : ordered_json(nullptr);
    cj["rate_group1"] = cat.defined ? ordered_json(cat.rate[1]) : ordered_json(nullptr);
    cj["annotations_group0"] = cat.annotation_count[0];
    cj["annotations_group1"] = cat.annotation_count[1];
    cj["common_instances"] = cat.common_instances;
    j["positive_rates"].push_back(cj);
  }
  const auto anova_json = [&](const groupanno::AnovaResult& r) {
    ordered_json block;
    block["n_used"] = r.n_used;
    block["n_dropped"] = r.n_dropped;
    block["df_residual"] = r.df_residual;
    block["residual_ss"] = std::isnan(r.residual_ss) ? ordered_json(nullptr)
                                                     : ordered_json(r.residual_ss);
    block["grand_mean"] = std::isnan(r.grand_mean) ? ordered_json(nullptr)
                                                   : ordered_json(r.grand_mean);
    block["categories"] = ordered_json::array();
    for (std::size_t c = 0; c < r.categories.size(); ++c) {
      const auto& cat = r.categories[c];
      ordered_json cj;
      cj["category"] = names[c];
      if (!cat.error.empty()) {
        cj["error"] = cat.error;
      } else {
        cj["group_mean0"] = cat.group_means[0];
        cj["group_mean1"] = cat.group_means[1];
        cj["inter_group_ss"] = cat.inter_group_ss;
        cj["f_statistic"] = cat.f_statistic;
        cj["p_value"] = cat.p_value;
      }
      block["categories"].push_back(cj);
    }
    return block;
  };
  j["anova_sensitivity"] = anova_json(sens);
  j["anova_specificity"] = anova_json(spec);

  ensure_dir(out_dir);
  {
    std::ofstream out(out_dir + "/bias_report.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write bias_report.json");
    out << j.dump(2) << '\n';
  }
  {
    std::ofstream out(out_dir + "/bias_report.txt", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write bias_report.txt");
    out << text;
  }
  return 0;
}

int run_infer(const std::string& data_dir, const std::string& method,
              const groupanno::EmConfig& em_cfg, const groupanno::ZenCrowdConfig& zc_cfg,
              const std::string& out_dir) {
  const groupanno::LoadedData data = groupanno::load_data_dir(data_dir);
  require_valid(data.dataset, data.table);
  ensure_dir(out_dir);

  if (method == "mv") {
    groupanno::write_posteriors(groupanno::majority_vote(data.dataset),
                                out_dir + "/posteriors.csv");
  } else if (method == "zencrowd") {
    const groupanno::ZenCrowdResult result = groupanno::zencrowd(data.dataset, zc_cfg);
    groupanno::write_posteriors(result.posteriors, out_dir + "/posteriors.csv");
    ordered_json j;
    for (const auto& [id, q] : result.reliability) j[id] = q;
    std::ofstream out(out_dir + "/reliability.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write reliability.json");
    out << j.dump(2) << '\n';
  } else {
    groupanno::EmConfig cfg = em_cfg;
    cfg.group_model_enabled = method == "groupanno";
    const groupanno::EmState state = method == "groupanno"
                                         ? groupanno::run(data.dataset, data.table, cfg)
                                         : groupanno::lfc_binary(data.dataset, cfg);
    groupanno::write_posteriors(state.posteriors, out_dir + "/posteriors.csv");
    groupanno::write_bias_params(state.bias, out_dir + "/bias_params.json");
    groupanno::write_classifier_params(state.classifier, out_dir + "/classifier_params.json");
    groupanno::write_trace(state.objective_trace, out_dir + "/trace.csv");
  }
  std::printf("wrote posteriors for %zu instances to %s\n", data.dataset.instances.size(),
              out_dir.c_str());
  return 0;
}

int run_evaluate(const std::string& posteriors_path, const std::string& gold_path,
                 const std::string& out_dir) {
  const groupanno::PosteriorLabels posteriors = groupanno::read_posteriors(posteriors_path);
  const std::map<std::string, int> gold = groupanno::read_gold(gold_path);
  for (const auto& [id, label] : posteriors.hard) {
    (void)label;
    if (gold.find(id) == gold.end()) {
      throw ValidationError("gold file has no label for inferred instance '" + id + "'");
    }
  }
  const groupanno::EvalMetrics metrics = groupanno::evaluate(posteriors, gold);
  std::printf("instances %zu  accuracy %.6f  f1 %.6f\n", metrics.n_instances, metrics.accuracy,
              metrics.f1);
  ensure_dir(out_dir);
  ordered_json j;
  j["n_instances"] = metrics.n_instances;
  j["accuracy"] = metrics.accuracy;
  j["f1"] = metrics.f1;
  std::ofstream out(out_dir + "/metrics.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write metrics.json");
  out << j.dump(2) << '\n';
  return 0;
}

int run_experiment_cmd(const std::string& config_path, bool seed_given, std::uint64_t seed,
                       const std::string& out_dir) {
  groupanno::ExperimentConfig config = groupanno::load_experiment_config(config_path);
  if (seed_given && config.synth.has_value()) config.synth->seed = seed;
  const groupanno::MetricsReport report = groupanno::run_experiment(config);
  const std::string text = groupanno::format_report(report);
  std::fputs(text.c_str(), stdout);
  ensure_dir(out_dir);
  groupanno::write_report(report, out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group-level annotator bias modelling for crowdsourced binary labels"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  bool seed_given = false;
  int threads = 0;
  std::string out_dir = ".";
  app.add_option("--seed", seed, "Seed override for data generation")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_option("--threads", threads, "OpenMP thread count (0 = library default)");
  app.add_option("--out-dir", out_dir, "Directory for output files (created if missing)");

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic annotation dataset");
  std::string shape = "circle";
  std::size_t instances_per_class = 400;
  std::size_t num_annotators = 40;
  std::size_t annotations_per_instance = 4;
  double noise_sd = 0.02;
  gen->add_option("--shape", shape, "Instance cloud shape")
      ->check(CLI::IsMember({"circle", "moon"}));
  gen->add_option("--instances-per-class", instances_per_class, "Instances per class");
  gen->add_option("--num-annotators", num_annotators, "Annotator pool size");
  gen->add_option("--annotations-per-instance", annotations_per_instance,
                  "Annotators sampled per instance");
  gen->add_option("--noise-sd", noise_sd, "Individual bias noise around the group means");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Group positive rates and bias ANOVA");
  std::string data_dir;
  std::string reference_kind = "mv";
  analyze->add_option("--data", data_dir, "Dataset directory")->required();
  analyze->add_option("--reference", reference_kind,
                      "Reference labels for per-annotator bias estimates")
      ->check(CLI::IsMember({"mv", "gold"}));

  // infer
  auto* infer = app.add_subcommand("infer", "Infer truth labels from annotations");
  std::string infer_data_dir;
  std::string method = "groupanno";
  groupanno::EmConfig em_cfg;
  groupanno::ZenCrowdConfig zc_cfg;
  infer->add_option("--data", infer_data_dir, "Dataset directory")->required();
  infer->add_option("--method", method, "Truth-inference method")
      ->check(CLI::IsMember({"mv", "zencrowd", "lfc", "groupanno"}));
  infer->add_option("--epochs", em_cfg.epochs, "EM epochs (lfc/groupanno)");
  infer->add_option("--learning-rate", em_cfg.learning_rate, "M-step learning rate");
  infer->add_option("--concentration", em_cfg.concentration, "Beta prior strength");
  infer->add_option("--l2", em_cfg.l2_classifier, "Classifier l2 penalty");
  infer->add_option("--m-steps", em_cfg.m_steps_per_epoch, "M-steps per epoch");
  infer->add_option("--zc-epochs", zc_cfg.epochs, "EM epochs (zencrowd)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score posteriors against gold labels");
  std::string posteriors_path;
  std::string gold_path;
  evaluate->add_option("--posteriors", posteriors_path, "posteriors.csv path")->required();
  evaluate->add_option("--gold", gold_path, "gold.csv path")->required();

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run a multi-method comparison");
  std::string config_path;
  experiment->add_option("--config", config_path, "Experiment config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  groupanno::set_num_threads(threads);
  try {
    if (gen->parsed()) {
      return run_generate(shape, instances_per_class, num_annotators, annotations_per_instance,
                          noise_sd, seed, out_dir);
    }
    if (analyze->parsed()) return run_analyze(data_dir, reference_kind, out_dir);
    if (infer->parsed()) return run_infer(infer_data_dir, method, em_cfg, zc_cfg, out_dir);
    if (evaluate->parsed()) return run_evaluate(posteriors_path, gold_path, out_dir);
    if (experiment->parsed()) return run_experiment_cmd(config_path, seed_given, seed, out_dir);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
