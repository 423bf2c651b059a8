#include "groupanno/types.hpp"

#include <set>
#include <utility>

namespace groupanno {

std::vector<std::string> validate_dataset(const AnnotationDataset& dataset,
                                          const AnnotatorTable& table) {
  std::vector<std::string> violations;
  std::set<std::string> seen_instance_ids;
  for (const auto& inst : dataset.instances) {
    if (!seen_instance_ids.insert(inst.instance_id).second) {
      violations.push_back("duplicate instance_id: " + inst.instance_id);
    }
    if (inst.features.size() != dataset.feature_dim) {
      violations.push_back("instance " + inst.instance_id + ": feature vector length " +
                           std::to_string(inst.features.size()) + " != feature_dim " +
                           std::to_string(dataset.feature_dim));
    }
    if (inst.annotations.empty()) {
      violations.push_back("instance " + inst.instance_id + ": empty annotation list");
    }
    std::set<std::string> seen_annotators;
    for (const auto& ann : inst.annotations) {
      if (ann.label != 0 && ann.label != 1) {
        violations.push_back("instance " + inst.instance_id + ", annotator " +
                             ann.annotator_id + ": label " + std::to_string(ann.label) +
                             " not in {0,1}");
      }
      if (!seen_annotators.insert(ann.annotator_id).second) {
        violations.push_back("instance " + inst.instance_id +
                             ": duplicate annotation by annotator " + ann.annotator_id);
      }
      auto it = table.annotators.find(ann.annotator_id);
      if (it == table.annotators.end()) {
        violations.push_back("unknown annotator: " + ann.annotator_id);
      } else if (it->second.size() != table.num_categories) {
        violations.push_back("annotator " + ann.annotator_id + ": group vector length " +
                             std::to_string(it->second.size()) + " != num_categories " +
                             std::to_string(table.num_categories));
      }
    }
  }
  for (const auto& [id, groups] : table.annotators) {
    for (std::size_t p = 0; p < groups.size(); ++p) {
      if (groups[p] != 0 && groups[p] != 1) {
        violations.push_back("annotator " + id + ": group value " +
                             std::to_string(groups[p]) + " in category " +
                             std::to_string(p) + " not in {0,1}");
      }
    }
  }
  return violations;
}

}  // namespace groupanno
