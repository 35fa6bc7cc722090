#pragma once

// Evaluation protocol: task construction, method registry, stratified random
// partitions, leave-one-subject-out rounds, grid search and AUC/confusion
// summaries.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gaitmtl/dataset.hpp"
#include "gaitmtl/mmtfl.hpp"

namespace gaitmtl {

struct TaskDefinition {
  std::string name;
  Group positive = Group::PD;
  Group negative = Group::H;

  // Throws DomainError when both groups are the same.
  static TaskDefinition make(std::string name, Group positive, Group negative);
};

// PD vs H, ST vs H, ST vs PD.
std::vector<TaskDefinition> canonical_tasks();

// Rows of the two groups, +1 for the positive group; ids are dataset rows.
std::vector<TaskData> make_tasks(const Dataset& ds, const std::vector<TaskDefinition>& defs);

// Tasks plus the per-row metadata the protocols need. Task ids index `strata`
// and `subjects`.
struct EvalData {
  std::vector<TaskData> tasks;
  std::vector<std::string> strata;    // stratification label per id
  std::vector<std::string> subjects;  // subject per id, empty when unknown
  std::vector<std::string> subject_groups;
  std::vector<std::string> feature_names;
  // Display names of the classes, per task (positive, negative).
  std::vector<std::array<std::string, 2>> class_names;

  std::size_t num_ids() const { return strata.size(); }
};

EvalData eval_data_from_dataset(const Dataset& ds, const std::vector<TaskDefinition>& defs);
// Ids are assigned sequentially across tasks; strata are task x class.
EvalData eval_data_from_tasks(std::vector<TaskData> tasks,
                              std::vector<std::string> feature_names = {});

// Keeps the rows whose id has mask[id] set.
std::vector<TaskData> subset_tasks(const std::vector<TaskData>& tasks, const std::vector<bool>& mask);

enum class MethodKind { Mmtfl, Stl };

struct MethodSpec {
  std::string name;
  MethodKind kind = MethodKind::Mmtfl;
  RegularizerSpec reg;                             // MMTFL powers and gammas
  StlRegularizer stl = StlRegularizer::Ridge;
  double lambda = 1.0;                             // STL strength
  LossKind loss = LossKind::Logistic;
  OuterConfig solver;
};

// mmtfl21, mmtfl12, mmtfl11, mmtfl22, stl_ridge, stl_lasso.
const std::vector<std::string>& method_names();
// MMTFL defaults to the logistic loss, STL to least squares.
MethodSpec method_from_name(std::string_view name);

struct TrainedModel {
  MethodSpec method;
  std::optional<MmtflModel> mmtfl;
  std::vector<StlModel> stl;  // one per task
  std::vector<std::string> task_names;
  std::vector<std::string> feature_names;

  Prediction predict(std::size_t task, const Eigen::MatrixXd& X) const;
  // |alpha_t| per task, d x T.
  Eigen::MatrixXd task_weights() const;
};

// Standardizes each task on its rows, then fits jointly (MMTFL) or per task.
TrainedModel train_method(const MethodSpec& method, const std::vector<TaskData>& tasks,
                          const std::vector<std::string>& feature_names = {},
                          std::uint64_t seed = 0);

// Mann-Whitney AUC; ties count one half. Throws DomainError for one class.
double auc(std::span<const double> scores, std::span<const int> labels);

// Rows are the true class (positive first), columns the prediction.
struct Confusion {
  std::array<std::array<long, 2>, 2> m{};

  long total() const { return m[0][0] + m[0][1] + m[1][0] + m[1][1]; }
  Confusion& operator+=(const Confusion& o);
};

Confusion confusion(std::span<const int> predicted, std::span<const int> truth);

struct AucSummary {
  double mean = 0.0;
  double sd = 0.0;
  std::vector<double> values;
};

AucSummary summarize(std::vector<double> values);

struct TaskResult {
  std::string task;
  std::array<std::string, 2> class_names;
  AucSummary auc;
  Confusion confusion;
};

// Table-6 row: how often one subject's trials were predicted as each class.
struct SubjectCounts {
  std::string task;
  std::string subject;
  std::string group;
  long predicted_positive = 0;
  long predicted_negative = 0;
};

struct ImportanceColumn {
  std::string name;
  std::vector<std::pair<std::string, double>> ranked;  // descending value
};

struct ImportanceTable {
  std::vector<ImportanceColumn> columns;
};

// c (MMTFL only) and |alpha_t| per task, each sorted descending with ties in
// feature order.
ImportanceTable importance_report(const TrainedModel& model);

// Hyperparameters chosen by an in-protocol grid search over the training rows
// named by `scope`.
struct TunedSetting {
  std::string scope;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double lambda = 0.0;
  double score = 0.0;  // mean validation AUC of the chosen cell
};

struct EvalReport {
  std::string method;
  std::string scheme;  // random_partition | leave_one_subject_out
  std::optional<double> ratio;
  int repeats = 0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double lambda = 0.0;
  std::vector<TaskResult> tasks;
  AucSummary all_tasks;  // unweighted mean over tasks
  std::vector<SubjectCounts> per_subject;
  std::vector<std::string> notices;
  std::vector<TunedSetting> tuning;
  ImportanceTable importance;
};

inline constexpr std::array<double, 5> kPartitionRatios = {0.16, 0.20, 0.25, 0.33, 0.50};

// Per-stratum train selection of round(ratio * n) ids. Throws DomainError if a
// stratum would end with an empty train or test side.
std::vector<bool> stratified_split(const EvalData& data, double ratio, std::uint64_t seed,
                                   const std::vector<bool>& within = {});

// Fold index per id (-1 outside `within`), dealt round-robin per stratum.
std::vector<int> stratified_folds(const EvalData& data, int folds, std::uint64_t seed,
                                  const std::vector<bool>& within = {});

// Seven log-spaced values 1e-3 ... 1e3.
std::vector<double> default_grid();

struct GridCell {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double lambda = 0.0;
  double score = 0.0;  // mean validation AUC
  bool ok = false;
  std::string message;
};

struct GridResult {
  MethodSpec best;  // input method with the chosen hyperparameters
  double best_score = 0.0;
  std::vector<GridCell> cells;
};

struct GridConfig {
  std::vector<double> values = default_grid();
  int folds = 3;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct RandomPartitionConfig {
  double ratio = 0.16;
  int repeats = 10;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool importance = true;
  // Tuned once on the first repeat's training split, then fixed.
  std::optional<GridConfig> grid;
};

EvalReport random_partition_eval(const EvalData& data, const MethodSpec& method,
                                 const RandomPartitionConfig& cfg);

struct LosoConfig {
  std::uint64_t seed = 0;
  int jobs = 1;
  bool importance = true;
  // Tuned per round on the remaining subjects.
  std::optional<GridConfig> grid;
};

// One round per subject; task AUCs are computed on the pooled held-out
// predictions since each round's test set holds a single class.
EvalReport leave_one_subject_out_eval(const EvalData& data, const MethodSpec& method,
                                      const LosoConfig& cfg = {});

// Scores every cell by stratified k-fold CV restricted to `within` ids and
// returns the argmax; ties prefer larger gamma2, then larger gamma1 (larger
// lambda for STL).
GridResult grid_search(const EvalData& data, const MethodSpec& method, const GridConfig& cfg,
                       const std::vector<bool>& within = {});

}  // namespace gaitmtl
