#include "groupanno/io.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "groupanno/csv.hpp"

namespace groupanno {

namespace {

using ordered_json = nlohmann::ordered_json;

int parse_binary(const std::string& field, const std::string& context) {
  if (field == "0") return 0;
  if (field == "1") return 1;
  throw ValidationError(context + ": value '" + field + "' must be 0 or 1");
}

double parse_double(const std::string& field, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(context + ": cannot parse number '" + field + "'");
  }
}

/// Indices of feature_{k} columns in order 0..d-1; throws on gaps.
std::vector<int> feature_columns(const CsvTable& table, const std::string& path) {
  std::vector<std::pair<int, int>> found;  // (feature index, column)
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const auto& name = table.header[c];
    if (name.rfind("feature_", 0) == 0) {
      try {
        found.emplace_back(std::stoi(name.substr(8)), static_cast<int>(c));
      } catch (const std::exception&) {
        throw ValidationError(path + ": bad feature column name '" + name + "'");
      }
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<int> cols;
  for (std::size_t k = 0; k < found.size(); ++k) {
    if (found[k].first != static_cast<int>(k)) {
      throw ValidationError(path + ": feature columns must be feature_0..feature_{d-1}");
    }
    cols.push_back(found[k].second);
  }
  return cols;
}

std::vector<double> row_features(const std::vector<std::string>& row,
                                 const std::vector<int>& feature_cols, int text_col,
                                 const HashingFeaturizer& featurizer,
                                 const std::string& context) {
  if (text_col >= 0) return featurizer.transform(row[text_col]);
  std::vector<double> f;
  f.reserve(feature_cols.size());
  for (int c : feature_cols) f.push_back(parse_double(row[c], context));
  return f;
}

void dump_json(const ordered_json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

ordered_json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  try {
    return ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw ValidationError(path + ": invalid JSON: " + e.what());
  }
}

ordered_json matrix_to_json(const std::vector<std::vector<double>>& m) {
  ordered_json j = ordered_json::array();
  for (const auto& row : m) j.push_back(row);
  return j;
}

std::vector<std::vector<double>> matrix_from_json(const ordered_json& j) {
  std::vector<std::vector<double>> m;
  for (const auto& row : j) m.push_back(row.get<std::vector<double>>());
  return m;
}

}  // namespace

AnnotationDataset read_annotations(const std::string& path, const HashingFeaturizer& featurizer) {
  const CsvTable table = read_csv(path);
  const int id_col = table.column("instance_id");
  const int annot_col = table.column("annotator_id");
  const int label_col = table.column("label");
  if (id_col < 0 || annot_col < 0 || label_col < 0) {
    throw ValidationError(path + ": header must contain instance_id, annotator_id, label");
  }
  const int text_col = table.column("text");
  const auto feature_cols = feature_columns(table, path);
  if (text_col >= 0 && !feature_cols.empty()) {
    throw ValidationError(path + ": provide either feature_* columns or text, not both");
  }

  AnnotationDataset dataset;
  std::map<std::string, std::size_t> index_of;  // instance_id -> dense index
  std::set<std::pair<std::string, std::string>> seen_pairs;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string context = path + ":" + std::to_string(r + 2);
    const std::string& instance_id = row[id_col];
    const std::string& annotator_id = row[annot_col];
    if (!seen_pairs.insert({instance_id, annotator_id}).second) {
      throw ValidationError(context + ": duplicate annotation (" + instance_id + ", " +
                            annotator_id + ")");
    }
    const int label = parse_binary(row[label_col], context + ": label");
    auto [it, inserted] = index_of.try_emplace(instance_id, dataset.instances.size());
    if (inserted) {
      Instance inst;
      inst.instance_id = instance_id;
      inst.features = row_features(row, feature_cols, text_col, featurizer, context);
      dataset.instances.push_back(std::move(inst));
    } else if (!feature_cols.empty() || text_col >= 0) {
      // Repeated rows for one instance must agree on its features.
      const std::vector<double> feats =
          row_features(row, feature_cols, text_col, featurizer, context);
      if (feats != dataset.instances[it->second].features) {
        throw ValidationError(context + ": instance " + instance_id +
                              " repeats with different features");
      }
    }
    dataset.instances[it->second].annotations.push_back({annotator_id, label});
  }
  dataset.feature_dim =
      text_col >= 0 ? featurizer.num_buckets : feature_cols.size();
  for (const auto& inst : dataset.instances) {
    if (inst.features.size() != dataset.feature_dim) {
      throw ValidationError(path + ": instance " + inst.instance_id +
                            " has inconsistent feature dimension");
    }
  }
  return dataset;
}

std::map<std::string, std::vector<double>> read_instances(const std::string& path,
                                                          const HashingFeaturizer& featurizer) {
  const CsvTable table = read_csv(path);
  const int id_col = table.column("instance_id");
  if (id_col < 0) throw ValidationError(path + ": header must contain instance_id");
  const int text_col = table.column("text");
  const auto feature_cols = feature_columns(table, path);
  if (text_col < 0 && feature_cols.empty()) {
    throw ValidationError(path + ": need feature_* columns or a text column");
  }
  std::map<std::string, std::vector<double>> features;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string context = path + ":" + std::to_string(r + 2);
    if (!features.emplace(row[id_col],
                          row_features(row, feature_cols, text_col, featurizer, context))
             .second) {
      throw ValidationError(context + ": duplicate instance_id " + row[id_col]);
    }
  }
  return features;
}

void attach_features(AnnotationDataset& dataset,
                     const std::map<std::string, std::vector<double>>& features) {
  std::size_t dim = 0;
  for (auto& inst : dataset.instances) {
    auto it = features.find(inst.instance_id);
    if (it == features.end()) {
      throw ValidationError("no features for instance " + inst.instance_id);
    }
    inst.features = it->second;
    if (dim == 0) dim = inst.features.size();
    if (inst.features.size() != dim) {
      throw ValidationError("inconsistent feature dimension at instance " + inst.instance_id);
    }
  }
  dataset.feature_dim = dim;
}

AnnotatorTable read_annotators(const std::string& path) {
  const CsvTable csv = read_csv(path);
  const int id_col = csv.column("annotator_id");
  if (id_col < 0) throw ValidationError(path + ": header must contain annotator_id");
  AnnotatorTable table;
  table.num_categories = csv.header.size() - 1;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& row = csv.rows[r];
    const std::string context = path + ":" + std::to_string(r + 2);
    std::vector<int> groups;
    for (std::size_t c = 0; c < csv.header.size(); ++c) {
      if (static_cast<int>(c) == id_col) continue;
      groups.push_back(parse_binary(
          row[c], context + ": column " + csv.header[c] +
                      " (demographic groups must be pre-encoded to 0/1)"));
    }
    if (!table.annotators.emplace(row[id_col], std::move(groups)).second) {
      throw ValidationError(context + ": duplicate annotator_id " + row[id_col]);
    }
  }
  return table;
}

std::vector<std::string> read_annotator_category_names(const std::string& path) {
  const CsvTable csv = read_csv(path);
  std::vector<std::string> names;
  for (const auto& name : csv.header) {
    if (name != "annotator_id") names.push_back(name);
  }
  return names;
}

std::map<std::string, int> read_gold(const std::string& path) {
  const CsvTable csv = read_csv(path);
  const int id_col = csv.column("instance_id");
  const int label_col = csv.column("label");
  if (id_col < 0 || label_col < 0) {
    throw ValidationError(path + ": header must contain instance_id, label");
  }
  std::map<std::string, int> gold;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& row = csv.rows[r];
    const std::string context = path + ":" + std::to_string(r + 2);
    if (!gold.emplace(row[id_col], parse_binary(row[label_col], context + ": label")).second) {
      throw ValidationError(context + ": duplicate instance_id " + row[id_col]);
    }
  }
  return gold;
}

void write_annotations(const AnnotationDataset& dataset, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& inst : dataset.instances) {
    for (const auto& ann : inst.annotations) {
      rows.push_back({inst.instance_id, ann.annotator_id, std::to_string(ann.label)});
    }
  }
  write_csv(path, {"instance_id", "annotator_id", "label"}, rows);
}

void write_instances(const AnnotationDataset& dataset, const std::string& path) {
  std::vector<std::string> header = {"instance_id"};
  for (std::size_t d = 0; d < dataset.feature_dim; ++d) {
    header.push_back("feature_" + std::to_string(d));
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& inst : dataset.instances) {
    std::vector<std::string> row = {inst.instance_id};
    for (double f : inst.features) row.push_back(format_double(f));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

void write_annotators(const AnnotatorTable& table, const std::string& path,
                      const std::vector<std::string>& category_names) {
  std::vector<std::string> header = {"annotator_id"};
  for (std::size_t p = 0; p < table.num_categories; ++p) {
    header.push_back(p < category_names.size() ? category_names[p]
                                               : "category_" + std::to_string(p));
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& [id, groups] : table.annotators) {
    std::vector<std::string> row = {id};
    for (int g : groups) row.push_back(std::to_string(g));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

void write_gold(const std::map<std::string, int>& gold, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& [id, label] : gold) rows.push_back({id, std::to_string(label)});
  write_csv(path, {"instance_id", "label"}, rows);
}

void write_posteriors(const PosteriorLabels& posteriors, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& [id, mu] : posteriors.mu) {
    rows.push_back({id, format_double(mu), std::to_string(posteriors.hard.at(id))});
  }
  write_csv(path, {"instance_id", "mu", "hard"}, rows);
}

PosteriorLabels read_posteriors(const std::string& path) {
  const CsvTable csv = read_csv(path);
  const int id_col = csv.column("instance_id");
  const int mu_col = csv.column("mu");
  if (id_col < 0 || mu_col < 0) {
    throw ValidationError(path + ": header must contain instance_id, mu");
  }
  PosteriorLabels out;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& row = csv.rows[r];
    out.set(row[id_col],
            parse_double(row[mu_col], path + ":" + std::to_string(r + 2) + ": mu"));
  }
  return out;
}

void write_bias_params(const GroupBiasParams& params, const std::string& path) {
  ordered_json j;
  j["u_alpha"] = params.u_alpha;
  j["u_beta"] = params.u_beta;
  j["group_effects_alpha"] = matrix_to_json(params.group_effects_alpha);
  j["group_effects_beta"] = matrix_to_json(params.group_effects_beta);
  j["concentration"] = params.concentration;
  j["annot_alpha"] = params.annot_alpha;
  j["annot_beta"] = params.annot_beta;
  dump_json(j, path);
}

GroupBiasParams read_bias_params(const std::string& path) {
  const ordered_json j = load_json(path);
  GroupBiasParams p;
  p.u_alpha = j.at("u_alpha").get<double>();
  p.u_beta = j.at("u_beta").get<double>();
  p.group_effects_alpha = matrix_from_json(j.at("group_effects_alpha"));
  p.group_effects_beta = matrix_from_json(j.at("group_effects_beta"));
  p.concentration = j.at("concentration").get<double>();
  p.annot_alpha = j.at("annot_alpha").get<std::map<std::string, double>>();
  p.annot_beta = j.at("annot_beta").get<std::map<std::string, double>>();
  return p;
}

void write_classifier_params(const ClassifierParams& params, const std::string& path) {
  ordered_json j;
  j["weights"] = params.weights;
  j["intercept"] = params.intercept;
  dump_json(j, path);
}

ClassifierParams read_classifier_params(const std::string& path) {
  const ordered_json j = load_json(path);
  ClassifierParams p;
  p.weights = j.at("weights").get<std::vector<double>>();
  p.intercept = j.at("intercept").get<double>();
  return p;
}

void write_truth(const GroundTruthBundle& bundle, const std::string& path) {
  ordered_json j;
  j["true_annot_alpha"] = bundle.true_annot_alpha;
  j["true_annot_beta"] = bundle.true_annot_beta;
  j["realized_group_alpha"] = matrix_to_json(bundle.realized_group_alpha);
  j["realized_group_beta"] = matrix_to_json(bundle.realized_group_beta);
  dump_json(j, path);
}

void write_trace(const std::vector<double>& objective_trace, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t e = 0; e < objective_trace.size(); ++e) {
    rows.push_back({std::to_string(e + 1), format_double(objective_trace[e])});
  }
  write_csv(path, {"epoch", "objective"}, rows);
}

void write_bundle(const GroundTruthBundle& bundle, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_annotations(bundle.dataset, (base / "annotations.csv").string());
  write_instances(bundle.dataset, (base / "instances.csv").string());
  write_annotators(bundle.table, (base / "annotators.csv").string());
  write_gold(bundle.gold, (base / "gold.csv").string());
  write_truth(bundle, (base / "truth.json").string());
}

LoadedData load_data_dir(const std::string& dir, const HashingFeaturizer& featurizer) {
  const std::filesystem::path base(dir);
  LoadedData data;
  data.dataset = read_annotations((base / "annotations.csv").string(), featurizer);
  const auto instances_path = base / "instances.csv";
  if (std::filesystem::exists(instances_path)) {
    attach_features(data.dataset, read_instances(instances_path.string(), featurizer));
  }
  data.table = read_annotators((base / "annotators.csv").string());
  return data;
}

}  // namespace groupanno
