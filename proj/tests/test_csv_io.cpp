#include <doctest.h>

#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "groupanno/csv.hpp"
#include "groupanno/io.hpp"
#include "groupanno/synthgen.hpp"

using namespace groupanno;
namespace fs = std::filesystem;

namespace {

/// Unique scratch directory removed on scope exit.
struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("groupanno_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace

TEST_CASE("split_csv_line handles quoting, embedded commas/quotes, and CR") {
  CHECK(split_csv_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_csv_line("a,,c") == std::vector<std::string>{"a", "", "c"});
  CHECK(split_csv_line("\"a,b\",c") == std::vector<std::string>{"a,b", "c"});
  CHECK(split_csv_line("\"he said \"\"hi\"\"\",x") ==
        std::vector<std::string>{"he said \"hi\"", "x"});
  CHECK(split_csv_line("a,b\r") == std::vector<std::string>{"a", "b"});
  CHECK(split_csv_line("") == std::vector<std::string>{""});
}

TEST_CASE("csv_escape quotes only when needed and write/read round-trips") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("q\"q") == "\"q\"\"q\"");
  TempDir tmp;
  const std::vector<std::string> header = {"id", "text"};
  const std::vector<std::vector<std::string>> rows = {
      {"1", "hello, world"}, {"2", "say \"hi\""}, {"3", ""}};
  write_csv(tmp.file("t.csv"), header, rows);
  const auto table = read_csv(tmp.file("t.csv"));
  CHECK(table.header == header);
  CHECK(table.rows == rows);
  CHECK(table.column("text") == 1);
  CHECK(table.column("missing") == -1);
}

TEST_CASE("read_csv reports structural problems with line numbers") {
  TempDir tmp;
  write_text(tmp.file("ragged.csv"), "a,b\n1,2\n1,2,3\n");
  CHECK_THROWS_WITH_AS(read_csv(tmp.file("ragged.csv")),
                       doctest::Contains(":3: expected 2 fields, got 3"),
                       std::runtime_error);
  write_text(tmp.file("empty.csv"), "");
  CHECK_THROWS_WITH_AS(read_csv(tmp.file("empty.csv")), doctest::Contains("empty file"),
                       std::runtime_error);
  CHECK_THROWS_AS(read_csv(tmp.file("nonexistent.csv")), std::runtime_error);
}

TEST_CASE("read_csv skips blank lines and accepts CRLF") {
  TempDir tmp;
  write_text(tmp.file("crlf.csv"), "a,b\r\n1,2\r\n\r\n3,4\r\n");
  const auto table = read_csv(tmp.file("crlf.csv"));
  CHECK(table.rows.size() == 2);
  CHECK(table.rows[1] == std::vector<std::string>{"3", "4"});
}

TEST_CASE("format_double round-trips exactly through strtod") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, 123456789.123456789,
                   0.30000000000000004}) {
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("write_annotations + write_instances round-trip through their readers") {
  AnnotationDataset d;
  d.feature_dim = 2;
  d.instances.push_back({"i0", {0.25, -1.5}, {{"a0", 1}, {"a1", 0}}});
  d.instances.push_back({"i1", {1.0 / 3.0, 2.0}, {{"a1", 1}}});
  TempDir tmp;
  write_annotations(d, tmp.file("ann.csv"));
  write_instances(d, tmp.file("inst.csv"));
  auto back = read_annotations(tmp.file("ann.csv"));
  REQUIRE(back.instances.size() == 2);
  CHECK(back.feature_dim == 0);  // the long format carries no features
  attach_features(back, read_instances(tmp.file("inst.csv")));
  CHECK(back.feature_dim == 2);
  CHECK(back.instances[0].instance_id == "i0");
  CHECK(back.instances[0].features == d.instances[0].features);  // exact via 17 digits
  CHECK(back.instances[1].features == d.instances[1].features);
  REQUIRE(back.instances[0].annotations.size() == 2);
  CHECK(back.instances[0].annotations[0].annotator_id == "a0");
  CHECK(back.instances[0].annotations[0].label == 1);
  CHECK(back.instances[1].annotations[0].label == 1);
}

TEST_CASE("read_annotations accepts inline feature columns") {
  TempDir tmp;
  write_text(tmp.file("ann.csv"),
             "instance_id,annotator_id,label,feature_0,feature_1\n"
             "i0,a0,1,0.25,-1.5\n"
             "i0,a1,0,0.25,-1.5\n"
             "i1,a1,1,2,3.5\n");
  const auto d = read_annotations(tmp.file("ann.csv"));
  REQUIRE(d.instances.size() == 2);
  CHECK(d.feature_dim == 2);
  CHECK(d.instances[0].features == std::vector<double>{0.25, -1.5});
  CHECK(d.instances[1].features == std::vector<double>{2.0, 3.5});
  CHECK(d.instances[0].annotations.size() == 2);
}

TEST_CASE("annotations with a text column run through the featurizer") {
  TempDir tmp;
  write_text(tmp.file("ann.csv"),
             "instance_id,annotator_id,label,text\n"
             "i0,a0,1,\"good movie, great cast\"\n"
             "i0,a1,0,\"good movie, great cast\"\n"
             "i1,a0,0,terrible\n");
  HashingFeaturizer fz;
  fz.num_buckets = 32;
  const auto d = read_annotations(tmp.file("ann.csv"), fz);
  REQUIRE(d.instances.size() == 2);
  CHECK(d.feature_dim == 32);
  CHECK(d.instances[0].features == fz.transform("good movie, great cast"));
  CHECK(d.instances[0].annotations.size() == 2);
}

TEST_CASE("annotation ingestion rejects malformed inputs with ValidationError") {
  TempDir tmp;
  write_text(tmp.file("nohdr.csv"), "foo,bar\n1,2\n");
  CHECK_THROWS_AS(read_annotations(tmp.file("nohdr.csv")), ValidationError);

  write_text(tmp.file("badlabel.csv"),
             "instance_id,annotator_id,label\ni0,a0,2\n");
  CHECK_THROWS_WITH_AS(read_annotations(tmp.file("badlabel.csv")),
                       doctest::Contains("must be 0 or 1"), ValidationError);

  write_text(tmp.file("dup.csv"),
             "instance_id,annotator_id,label\ni0,a0,1\ni0,a0,0\n");
  CHECK_THROWS_WITH_AS(read_annotations(tmp.file("dup.csv")),
                       doctest::Contains("duplicate annotation"), ValidationError);

  write_text(tmp.file("both.csv"),
             "instance_id,annotator_id,label,feature_0,text\ni0,a0,1,0.5,hello\n");
  CHECK_THROWS_WITH_AS(read_annotations(tmp.file("both.csv")),
                       doctest::Contains("not both"), ValidationError);

  write_text(tmp.file("gap.csv"),
             "instance_id,annotator_id,label,feature_0,feature_2\ni0,a0,1,0.5,0.5\n");
  CHECK_THROWS_AS(read_annotations(tmp.file("gap.csv")), ValidationError);

  write_text(tmp.file("badnum.csv"),
             "instance_id,annotator_id,label,feature_0\ni0,a0,1,abc\n");
  CHECK_THROWS_WITH_AS(read_annotations(tmp.file("badnum.csv")),
                       doctest::Contains("cannot parse number"), ValidationError);

  // Same instance appearing with different feature values.
  write_text(tmp.file("incons.csv"),
             "instance_id,annotator_id,label,feature_0\ni0,a0,1,0.5\ni0,a1,1,0.6\n");
  CHECK_THROWS_AS(read_annotations(tmp.file("incons.csv")), ValidationError);
}

TEST_CASE("read_instances + attach_features joins features onto a dataset") {
  TempDir tmp;
  write_text(tmp.file("ann.csv"),
             "instance_id,annotator_id,label\ni0,a0,1\ni1,a0,0\n");
  write_text(tmp.file("inst.csv"),
             "instance_id,feature_0,feature_1\ni0,1.5,2.5\ni1,-1,0\n");
  auto d = read_annotations(tmp.file("ann.csv"));
  CHECK(d.feature_dim == 0);
  const auto feats = read_instances(tmp.file("inst.csv"));
  REQUIRE(feats.size() == 2);
  attach_features(d, feats);
  CHECK(d.feature_dim == 2);
  CHECK(d.instances[0].features == std::vector<double>{1.5, 2.5});
  CHECK(d.instances[1].features == std::vector<double>{-1.0, 0.0});

  // Missing instance in the feature file.
  write_text(tmp.file("short.csv"), "instance_id,feature_0\ni0,1.5\n");
  auto d2 = read_annotations(tmp.file("ann.csv"));
  const auto feats2 = read_instances(tmp.file("short.csv"));
  CHECK_THROWS_WITH_AS(attach_features(d2, feats2), doctest::Contains("no features"),
                       ValidationError);

  write_text(tmp.file("dupinst.csv"), "instance_id,feature_0\ni0,1\ni0,2\n");
  CHECK_THROWS_WITH_AS(read_instances(tmp.file("dupinst.csv")),
                       doctest::Contains("duplicate instance_id"), ValidationError);
}

TEST_CASE("annotator table round-trips with category names") {
  AnnotatorTable t;
  t.num_categories = 2;
  t.annotators["a0"] = {0, 1};
  t.annotators["a1"] = {1, 0};
  TempDir tmp;
  write_annotators(t, tmp.file("annot.csv"), {"gender", "age"});
  const auto names = read_annotator_category_names(tmp.file("annot.csv"));
  CHECK(names == std::vector<std::string>{"gender", "age"});
  const auto back = read_annotators(tmp.file("annot.csv"));
  CHECK(back.num_categories == 2);
  CHECK(back.annotators == t.annotators);

  // Default category names when none are given.
  write_annotators(t, tmp.file("annot2.csv"));
  const auto names2 = read_annotator_category_names(tmp.file("annot2.csv"));
  REQUIRE(names2.size() == 2);
  const auto back2 = read_annotators(tmp.file("annot2.csv"));
  CHECK(back2.annotators == t.annotators);

  write_text(tmp.file("badgroup.csv"), "annotator_id,g\na0,2\n");
  CHECK_THROWS_AS(read_annotators(tmp.file("badgroup.csv")), ValidationError);
  write_text(tmp.file("dupannot.csv"), "annotator_id,g\na0,1\na0,0\n");
  CHECK_THROWS_WITH_AS(read_annotators(tmp.file("dupannot.csv")),
                       doctest::Contains("duplicate annotator_id"), ValidationError);
  write_text(tmp.file("nohdr.csv"), "id,g\na0,1\n");
  CHECK_THROWS_AS(read_annotators(tmp.file("nohdr.csv")), ValidationError);
}

TEST_CASE("gold labels round-trip and reject bad values") {
  std::map<std::string, int> gold{{"i0", 1}, {"i1", 0}, {"i2", 1}};
  TempDir tmp;
  write_gold(gold, tmp.file("gold.csv"));
  CHECK(read_gold(tmp.file("gold.csv")) == gold);
  write_text(tmp.file("bad.csv"), "instance_id,label\ni0,5\n");
  CHECK_THROWS_AS(read_gold(tmp.file("bad.csv")), ValidationError);
  write_text(tmp.file("dup.csv"), "instance_id,label\ni0,1\ni0,0\n");
  CHECK_THROWS_AS(read_gold(tmp.file("dup.csv")), ValidationError);
}

TEST_CASE("posteriors round-trip mu exactly") {
  PosteriorLabels p;
  p.set("i0", 1.0 / 3.0);
  p.set("i1", 0.5);
  p.set("i2", 0.9999999999999999);
  TempDir tmp;
  write_posteriors(p, tmp.file("post.csv"));
  const auto back = read_posteriors(tmp.file("post.csv"));
  CHECK(back.mu == p.mu);  // exact doubles via 17-significant-digit printing
  CHECK(back.hard == p.hard);
}

TEST_CASE("bias params JSON round-trips exactly") {
  GroupBiasParams b;
  b.u_alpha = 0.7123456789012345;
  b.u_beta = 0.65;
  b.group_effects_alpha = {{0.1, -0.1}, {0.023456789, -0.023456789}};
  b.group_effects_beta = {{-0.05, 0.05}, {0.0, 0.0}};
  b.annot_alpha = {{"a0", 0.91}, {"a1", 1.0 / 3.0}};
  b.annot_beta = {{"a0", 0.82}, {"a1", 0.77}};
  b.concentration = 100.0;
  TempDir tmp;
  write_bias_params(b, tmp.file("bias.json"));
  const auto back = read_bias_params(tmp.file("bias.json"));
  CHECK(back.u_alpha == b.u_alpha);
  CHECK(back.u_beta == b.u_beta);
  CHECK(back.group_effects_alpha == b.group_effects_alpha);
  CHECK(back.group_effects_beta == b.group_effects_beta);
  CHECK(back.annot_alpha == b.annot_alpha);
  CHECK(back.annot_beta == b.annot_beta);
  CHECK(back.concentration == b.concentration);
  write_text(tmp.file("bad.json"), "{not json");
  CHECK_THROWS_AS(read_bias_params(tmp.file("bad.json")), ValidationError);
}

TEST_CASE("classifier params JSON round-trips exactly") {
  ClassifierParams c;
  c.weights = {0.1, -2.5, 1.0 / 7.0};
  c.intercept = -0.333333333333333314;
  TempDir tmp;
  write_classifier_params(c, tmp.file("clf.json"));
  const auto back = read_classifier_params(tmp.file("clf.json"));
  CHECK(back.weights == c.weights);
  CHECK(back.intercept == c.intercept);
}

TEST_CASE("objective trace writes epoch,objective rows") {
  TempDir tmp;
  write_trace({-10.5, -9.25, -9.0}, tmp.file("trace.csv"));
  const auto table = read_csv(tmp.file("trace.csv"));
  CHECK(table.header == std::vector<std::string>{"epoch", "objective"});
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0][0] == "1");
  CHECK(std::strtod(table.rows[2][1].c_str(), nullptr) == -9.0);
}

TEST_CASE("write_bundle -> load_data_dir round-trips a generated dataset") {
  SynthConfig cfg = SynthConfig::defaults("circle");
  cfg.instances_per_class = 25;
  cfg.num_annotators = 8;
  cfg.seed = 5;
  const auto bundle = generate(cfg);
  TempDir tmp;
  write_bundle(bundle, tmp.path.string());
  const auto loaded = load_data_dir(tmp.path.string());
  REQUIRE(loaded.dataset.instances.size() == bundle.dataset.instances.size());
  CHECK(loaded.dataset.feature_dim == bundle.dataset.feature_dim);
  for (std::size_t i = 0; i < loaded.dataset.instances.size(); ++i) {
    const auto& a = loaded.dataset.instances[i];
    const auto& b = bundle.dataset.instances[i];
    CHECK(a.instance_id == b.instance_id);
    CHECK(a.features == b.features);
    REQUIRE(a.annotations.size() == b.annotations.size());
    for (std::size_t k = 0; k < a.annotations.size(); ++k) {
      CHECK(a.annotations[k].annotator_id == b.annotations[k].annotator_id);
      CHECK(a.annotations[k].label == b.annotations[k].label);
    }
  }
  CHECK(loaded.table.annotators == bundle.table.annotators);
  CHECK(loaded.table.num_categories == bundle.table.num_categories);
  CHECK(read_gold((tmp.path / "gold.csv").string()) == bundle.gold);
  CHECK(validate_dataset(loaded.dataset, loaded.table).empty());
  CHECK(fs::exists(tmp.path / "truth.json"));
}
