#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "groupanno/featurize.hpp"
#include "groupanno/synthgen.hpp"
#include "groupanno/types.hpp"

namespace groupanno {

/// Input-content problem (bad schema, bad value, inconsistent dimensions).
/// The CLI maps this to exit code 2; other failures exit 1.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Read long-format annotations: header instance_id,annotator_id,label plus
/// optionally inline feature_0..feature_{d-1} columns or a text column (run
/// through the featurizer). Instance features may instead be supplied via
/// read_instances + attach_features.
AnnotationDataset read_annotations(const std::string& path,
                                   const HashingFeaturizer& featurizer = {});

/// Read instance features: header instance_id plus feature_* columns or text.
std::map<std::string, std::vector<double>> read_instances(
    const std::string& path, const HashingFeaturizer& featurizer = {});

/// Attach per-instance features to a dataset parsed without them.
void attach_features(AnnotationDataset& dataset,
                     const std::map<std::string, std::vector<double>>& features);

/// Read annotator demographics: header annotator_id plus one binary column per
/// category (category names taken from the header).
AnnotatorTable read_annotators(const std::string& path);

/// Category names from an annotators.csv header, for table output.
std::vector<std::string> read_annotator_category_names(const std::string& path);

/// Read gold labels: header instance_id,label.
std::map<std::string, int> read_gold(const std::string& path);

/// Write the observable side of a dataset.
void write_annotations(const AnnotationDataset& dataset, const std::string& path);
void write_instances(const AnnotationDataset& dataset, const std::string& path);
void write_annotators(const AnnotatorTable& table, const std::string& path,
                      const std::vector<std::string>& category_names = {});
void write_gold(const std::map<std::string, int>& gold, const std::string& path);

/// Posteriors as CSV: instance_id,mu,hard (mu printed with 17 significant digits).
void write_posteriors(const PosteriorLabels& posteriors, const std::string& path);
PosteriorLabels read_posteriors(const std::string& path);

/// Parameter dumps as JSON (exact round-trip doubles).
void write_bias_params(const GroupBiasParams& params, const std::string& path);
GroupBiasParams read_bias_params(const std::string& path);
void write_classifier_params(const ClassifierParams& params, const std::string& path);
ClassifierParams read_classifier_params(const std::string& path);

/// Ground-truth bundle sidecar (true biases + realized marginals) as JSON.
void write_truth(const GroundTruthBundle& bundle, const std::string& path);

/// Objective trace as CSV: epoch,objective.
void write_trace(const std::vector<double>& objective_trace, const std::string& path);

/// Write a whole generated bundle into a directory (annotations.csv,
/// instances.csv, annotators.csv, gold.csv, truth.json).
void write_bundle(const GroundTruthBundle& bundle, const std::string& dir);

/// Load a dataset + table from a directory produced by write_bundle (or
/// hand-assembled with the same file names). gold.csv is only read on demand.
struct LoadedData {
  AnnotationDataset dataset;
  AnnotatorTable table;
};
LoadedData load_data_dir(const std::string& dir, const HashingFeaturizer& featurizer = {});

}  // namespace groupanno
