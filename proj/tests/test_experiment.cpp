#include <doctest.h>

#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "groupanno/experiment.hpp"
#include "groupanno/io.hpp"

using namespace groupanno;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("groupanno_exp_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string write_config(const TempDir& tmp, const std::string& body,
                         const std::string& name = "config.json") {
  std::ofstream out(tmp.file(name), std::ios::binary);
  out << body;
  out.close();
  return tmp.file(name);
}

const char* kSmallSynthConfig = R"({
  "data": {"synthetic": {"shape": "moon", "instances_per_class": 40,
                         "num_annotators": 10, "annotations_per_instance": 3,
                         "seed": 4}},
  "methods": ["mv", "zencrowd", "lfc", "groupanno"],
  "split": {"test_fraction": 0.25, "seed": 7},
  "em": {"epochs": 15, "learning_rate": 0.05, "concentration": 10.0},
  "zencrowd": {"epochs": 20},
  "train": {"epochs": 60}
})";

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("load_experiment_config parses every section") {
  TempDir tmp;
  const auto cfg = load_experiment_config(write_config(tmp, kSmallSynthConfig));
  REQUIRE(cfg.synth.has_value());
  CHECK(cfg.synth->shape == "moon");
  CHECK(cfg.synth->instances_per_class == 40);
  CHECK(cfg.synth->num_annotators == 10);
  CHECK(cfg.synth->seed == 4);
  CHECK(cfg.data_dir.empty());
  CHECK(cfg.methods == std::vector<std::string>{"mv", "zencrowd", "lfc", "groupanno"});
  CHECK(cfg.split.test_fraction == 0.25);
  CHECK(cfg.split.seed == 7);
  CHECK(cfg.em.epochs == 15);
  CHECK(cfg.em.concentration == 10.0);
  CHECK(cfg.zencrowd.epochs == 20);
  CHECK(cfg.train.epochs == 60);
  // Unspecified fields keep their defaults.
  CHECK(cfg.em.m_steps_per_epoch == 1);
  CHECK(cfg.train.learning_rate == 0.1);
}

TEST_CASE("load_experiment_config rejects unknown keys loudly") {
  TempDir tmp;
  CHECK_THROWS_WITH_AS(
      load_experiment_config(write_config(
          tmp, R"({"data": {"synthetic": {"shape": "circle"}}, "typo_key": 1})")),
      doctest::Contains("unknown key 'typo_key'"), ValidationError);
  CHECK_THROWS_WITH_AS(
      load_experiment_config(write_config(
          tmp, R"({"data": {"synthetic": {"shape": "circle"}}, "em": {"lr": 0.1}})")),
      doctest::Contains("unknown key 'lr'"), ValidationError);
  CHECK_THROWS_WITH_AS(
      load_experiment_config(write_config(
          tmp, R"({"data": {"synthetic": {"shape": "circle", "shapes": 2}}})")),
      doctest::Contains("unknown key 'shapes'"), ValidationError);
}

TEST_CASE("load_experiment_config demands exactly one data source") {
  TempDir tmp;
  CHECK_THROWS_WITH_AS(load_experiment_config(write_config(tmp, R"({"data": {}})")),
                       doctest::Contains("exactly one"), ValidationError);
  CHECK_THROWS_WITH_AS(
      load_experiment_config(write_config(
          tmp,
          R"({"data": {"synthetic": {"shape": "circle"}, "directory": "x"}})")),
      doctest::Contains("exactly one"), ValidationError);
  CHECK_THROWS_WITH_AS(load_experiment_config(write_config(tmp, R"({"methods": ["mv"]})")),
                       doctest::Contains("missing 'data'"), ValidationError);
}

TEST_CASE("load_experiment_config validates methods and the split") {
  TempDir tmp;
  CHECK_THROWS_WITH_AS(
      load_experiment_config(write_config(
          tmp, R"({"data": {"synthetic": {"shape": "circle"}}, "methods": ["svm"]})")),
      doctest::Contains("unknown method 'svm'"), ValidationError);
  CHECK_THROWS_WITH_AS(
      load_experiment_config(write_config(
          tmp, R"({"data": {"synthetic": {"shape": "circle"}}, "methods": []})")),
      doctest::Contains("list is empty"), ValidationError);
  CHECK_THROWS_WITH_AS(
      load_experiment_config(write_config(
          tmp,
          R"({"data": {"synthetic": {"shape": "circle"}}, "split": {"test_fraction": 1.0}})")),
      doctest::Contains("test_fraction"), ValidationError);
  CHECK_THROWS_AS(
      load_experiment_config(write_config(
          tmp,
          R"({"data": {"synthetic": {"shape": "circle"}}, "split": {"test_fraction": -0.1}})")),
      ValidationError);
}

TEST_CASE("load_experiment_config rejects malformed JSON and missing files") {
  TempDir tmp;
  CHECK_THROWS_WITH_AS(load_experiment_config(write_config(tmp, "{not json")),
                       doctest::Contains("not valid JSON"), ValidationError);
  CHECK_THROWS_AS(load_experiment_config(tmp.file("does_not_exist.json")), ValidationError);
}

TEST_CASE("run_experiment produces a full report over all methods") {
  TempDir tmp;
  const auto cfg = load_experiment_config(write_config(tmp, kSmallSynthConfig));
  const MetricsReport report = run_experiment(cfg);
  CHECK(report.data_source == "moon");
  CHECK(report.seed == 4);
  CHECK(report.n_instances == 80);
  CHECK(report.n_annotators == 10);
  CHECK(report.n_annotations == 240);
  CHECK(report.n_test == 20);  // floor(80 * 0.25)
  CHECK(report.n_train == 60);
  REQUIRE(report.methods.size() == 4);
  CHECK(report.methods[0].first == "mv");
  CHECK(report.methods[3].first == "groupanno");
  for (const auto& [name, mm] : report.methods) {
    CHECK(mm.truth_accuracy >= 0.0);
    CHECK(mm.truth_accuracy <= 1.0);
    CHECK(mm.truth_f1 >= 0.0);
    CHECK(mm.test_accuracy >= 0.0);  // split is non-empty here
    CHECK(mm.test_accuracy <= 1.0);
    if (name == "lfc" || name == "groupanno") {
      CHECK(mm.bias_mae.has_value());  // synthetic truth available
      CHECK(mm.bias_max_error.has_value());
      CHECK(*mm.bias_max_error >= *mm.bias_mae);
    } else {
      CHECK_FALSE(mm.bias_mae.has_value());
    }
  }
  // Annotator modelling should not lose to raw majority vote on this data.
  CHECK(report.methods[3].second.truth_accuracy >= report.methods[0].second.truth_accuracy);
}

TEST_CASE("run_experiment is deterministic end to end") {
  TempDir tmp;
  const auto cfg = load_experiment_config(write_config(tmp, kSmallSynthConfig));
  const std::string r1 = format_report(run_experiment(cfg));
  const std::string r2 = format_report(run_experiment(cfg));
  CHECK(r1 == r2);
}

TEST_CASE("test_fraction 0 disables held-out metrics") {
  TempDir tmp;
  const auto path = write_config(tmp, R"({
    "data": {"synthetic": {"shape": "circle", "instances_per_class": 30,
                           "num_annotators": 8, "annotations_per_instance": 3, "seed": 2}},
    "methods": ["mv"],
    "split": {"test_fraction": 0.0},
    "train": {"epochs": 10}
  })");
  const MetricsReport report = run_experiment(load_experiment_config(path));
  CHECK(report.n_test == 0);
  CHECK(report.n_train == 60);
  REQUIRE(report.methods.size() == 1);
  CHECK(std::isnan(report.methods[0].second.test_accuracy));
  // Text report renders undefined cells as '-'.
  const std::string text = format_report(report);
  CHECK(text.find('-') != std::string::npos);
  // JSON renders them as null.
  TempDir out;
  write_report(report, out.path.string());
  const auto j = nlohmann::json::parse(slurp(out.file("report.json")));
  CHECK(j["methods"][0]["test_accuracy"].is_null());
  CHECK(j["methods"][0]["bias_mae"].is_null());
  CHECK(j["methods"][0]["truth_accuracy"].is_number());
}

TEST_CASE("write_report emits parseable JSON plus the text table") {
  TempDir tmp;
  const auto cfg = load_experiment_config(write_config(tmp, kSmallSynthConfig));
  const MetricsReport report = run_experiment(cfg);
  TempDir out1, out2;
  write_report(report, out1.path.string());
  write_report(report, out2.path.string());
  const auto j = nlohmann::json::parse(slurp(out1.file("report.json")));
  CHECK(j["data_source"] == "moon");
  CHECK(j["n_instances"] == 80);
  CHECK(j["methods"].size() == 4);
  CHECK(j["methods"][3]["method"] == "groupanno");
  CHECK(j["methods"][3]["bias_mae"].is_number());
  // Byte-identical across writes.
  CHECK(slurp(out1.file("report.json")) == slurp(out2.file("report.json")));
  CHECK(slurp(out1.file("report.txt")) == slurp(out2.file("report.txt")));
  CHECK(slurp(out1.file("report.txt")) == format_report(report));
}

TEST_CASE("run_experiment loads directory data and skips bias truth") {
  SynthConfig sc = SynthConfig::defaults("circle");
  sc.instances_per_class = 30;
  sc.num_annotators = 8;
  sc.annotations_per_instance = 3;
  sc.seed = 6;
  const auto bundle = generate(sc);
  TempDir data;
  write_bundle(bundle, data.path.string());
  TempDir tmp;
  const auto path = write_config(tmp, std::string(R"({
    "data": {"directory": ")") + data.path.string() + R"("},
    "methods": ["mv", "lfc"],
    "split": {"test_fraction": 0.2},
    "em": {"epochs": 10},
    "train": {"epochs": 20}
  })");
  const MetricsReport report = run_experiment(load_experiment_config(path));
  CHECK(report.data_source == data.path.string());
  CHECK(report.seed == 0);
  CHECK(report.n_instances == 60);
  REQUIRE(report.methods.size() == 2);
  // Directory data carries no generator truth: no bias errors for any method.
  CHECK_FALSE(report.methods[1].second.bias_mae.has_value());
}

TEST_CASE("run_experiment requires gold coverage") {
  SynthConfig sc = SynthConfig::defaults("circle");
  sc.instances_per_class = 10;
  sc.num_annotators = 6;
  sc.annotations_per_instance = 2;
  sc.seed = 8;
  const auto bundle = generate(sc);
  TempDir data;
  write_bundle(bundle, data.path.string());
  // Drop one instance from gold.csv.
  auto gold = bundle.gold;
  gold.erase(gold.begin()->first);
  write_gold(gold, data.file("gold.csv"));
  TempDir tmp;
  const auto path = write_config(tmp, std::string(R"({
    "data": {"directory": ")") + data.path.string() + R"("},
    "methods": ["mv"]
  })");
  CHECK_THROWS_WITH_AS(run_experiment(load_experiment_config(path)),
                       doctest::Contains("gold labels missing"), ValidationError);
}
