#pragma once

// The feature table shared by extraction and learning: one row per trial,
// serialized as CSV with the feature columns followed by subject_id,group.

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gaitmtl/features.hpp"
#include "gaitmtl/gcf_data.hpp"
#include "gaitmtl/mmtfl.hpp"

namespace gaitmtl {

struct Dataset {
  Eigen::MatrixXd X;  // rows = trials
  std::vector<std::string> subject_ids;
  std::vector<Group> groups;
  std::vector<std::string> feature_names;

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }
};

struct ExtractedTrial {
  std::string subject_id;
  FeatureVector features;
};

// Row order follows `trials`. Throws JoinError for an unknown subject.
Dataset build_dataset(const std::vector<ExtractedTrial>& trials,
                      const std::vector<Subject>& subjects);

// Throws DomainError when dimensions disagree or an entry is not finite.
void check_dataset(const Dataset& ds);

// Values printed with 17 significant digits.
void write_dataset_csv(std::ostream& out, const Dataset& ds);
Dataset read_dataset_csv(std::istream& in);
Dataset load_dataset(const std::string& path);

// Plain multi-task table: feature columns, then task,label (label +-1).
// Tasks keep their order of first appearance.
struct MultitaskTable {
  std::vector<TaskData> tasks;
  std::vector<std::string> feature_names;
};

void write_multitask_csv(std::ostream& out, const MultitaskTable& table);
MultitaskTable read_multitask_csv(std::istream& in);

// Which of the two tables a CSV header describes.
enum class TableKind { Dataset, Multitask };
TableKind detect_table_kind(const std::string& path);

}  // namespace gaitmtl
