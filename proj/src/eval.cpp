#include "gaitmtl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <fmt/format.h>

#include "gaitmtl/errors.hpp"
#include "gaitmtl/parallel.hpp"

namespace gaitmtl {

TaskDefinition TaskDefinition::make(std::string name, Group positive, Group negative) {
  if (positive == negative) {
    throw DomainError(fmt::format("task '{}' uses group {} on both sides", name, to_string(positive)));
  }
  return {std::move(name), positive, negative};
}

std::vector<TaskDefinition> canonical_tasks() {
  return {TaskDefinition::make("PD_vs_H", Group::PD, Group::H),
          TaskDefinition::make("ST_vs_H", Group::ST, Group::H),
          TaskDefinition::make("ST_vs_PD", Group::ST, Group::PD)};
}

std::vector<TaskData> make_tasks(const Dataset& ds, const std::vector<TaskDefinition>& defs) {
  check_dataset(ds);
  std::vector<TaskData> tasks;
  for (const auto& def : defs) {
    if (def.positive == def.negative) throw DomainError("task groups must differ");
    std::vector<Eigen::Index> rows;
    bool has_pos = false;
    bool has_neg = false;
    for (Eigen::Index r = 0; r < ds.rows(); ++r) {
      const Group g = ds.groups[static_cast<std::size_t>(r)];
      if (g == def.positive) has_pos = true;
      if (g == def.negative) has_neg = true;
      if (g == def.positive || g == def.negative) rows.push_back(r);
    }
    if (!has_pos || !has_neg) {
      throw DomainError(fmt::format("dataset lacks group {} for task '{}'",
                                    to_string(has_pos ? def.negative : def.positive), def.name));
    }
    TaskData t;
    t.name = def.name;
    t.X.resize(static_cast<Eigen::Index>(rows.size()), ds.cols());
    t.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      t.X.row(ii) = ds.X.row(rows[i]);
      t.y(ii) = ds.groups[static_cast<std::size_t>(rows[i])] == def.positive ? 1.0 : -1.0;
      t.ids.push_back(static_cast<std::size_t>(rows[i]));
    }
    tasks.push_back(std::move(t));
  }
  return tasks;
}

EvalData eval_data_from_dataset(const Dataset& ds, const std::vector<TaskDefinition>& defs) {
  EvalData data;
  data.tasks = make_tasks(ds, defs);
  data.feature_names = ds.feature_names;
  for (std::size_t r = 0; r < ds.subject_ids.size(); ++r) {
    data.strata.emplace_back(to_string(ds.groups[r]));
    data.subjects.push_back(ds.subject_ids[r]);
    data.subject_groups.emplace_back(to_string(ds.groups[r]));
  }
  for (const auto& def : defs) {
    data.class_names.push_back({std::string(to_string(def.positive)),
                                std::string(to_string(def.negative))});
  }
  return data;
}

EvalData eval_data_from_tasks(std::vector<TaskData> tasks, std::vector<std::string> feature_names) {
  EvalData data;
  std::size_t next = 0;
  for (auto& t : tasks) {
    check_task(t, false);
    t.ids.resize(static_cast<std::size_t>(t.rows()));
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      t.ids[static_cast<std::size_t>(i)] = next++;
      data.strata.push_back(t.name + (t.y(i) > 0 ? "/+1" : "/-1"));
      data.subjects.emplace_back();
      data.subject_groups.emplace_back();
    }
    data.class_names.push_back({"+1", "-1"});
  }
  if (feature_names.empty() && !tasks.empty()) {
    for (Eigen::Index j = 0; j < tasks.front().cols(); ++j) feature_names.push_back(fmt::format("f{}", j));
  }
  data.feature_names = std::move(feature_names);
  data.tasks = std::move(tasks);
  return data;
}

std::vector<TaskData> subset_tasks(const std::vector<TaskData>& tasks, const std::vector<bool>& mask) {
  std::vector<TaskData> out;
  out.reserve(tasks.size());
  for (const auto& t : tasks) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      if (mask.at(t.ids[static_cast<std::size_t>(i)])) keep.push_back(i);
    }
    TaskData s;
    s.name = t.name;
    s.X.resize(static_cast<Eigen::Index>(keep.size()), t.cols());
    s.y.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
      s.X.row(static_cast<Eigen::Index>(k)) = t.X.row(keep[k]);
      s.y(static_cast<Eigen::Index>(k)) = t.y(keep[k]);
      s.ids.push_back(t.ids[static_cast<std::size_t>(keep[k])]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = {"mmtfl21", "mmtfl12",   "mmtfl11",
                                                 "mmtfl22", "stl_ridge", "stl_lasso"};
  return names;
}

MethodSpec method_from_name(std::string_view name) {
  MethodSpec m;
  m.name = std::string(name);
  if (name.size() == 7 && name.substr(0, 5) == "mmtfl" && (name[5] == '1' || name[5] == '2') &&
      (name[6] == '1' || name[6] == '2')) {
    m.kind = MethodKind::Mmtfl;
    m.reg.p = name[5] - '0';
    m.reg.k = name[6] - '0';
    m.loss = LossKind::Logistic;
    return m;
  }
  if (name == "stl_ridge" || name == "stl_lasso") {
    m.kind = MethodKind::Stl;
    m.stl = name == "stl_ridge" ? StlRegularizer::Ridge : StlRegularizer::Lasso;
    m.loss = LossKind::LeastSquares;
    return m;
  }
  throw DomainError(fmt::format("unknown method '{}' (expected one of mmtfl21, mmtfl12, mmtfl11, "
                                "mmtfl22, stl_ridge, stl_lasso)",
                                name));
}

Prediction TrainedModel::predict(std::size_t task, const Eigen::MatrixXd& X) const {
  if (mmtfl) return gaitmtl::predict(*mmtfl, static_cast<Eigen::Index>(task), X);
  if (task >= stl.size()) throw DomainError("predict: task index out of range");
  return gaitmtl::predict(stl[task], X);
}

Eigen::MatrixXd TrainedModel::task_weights() const {
  if (mmtfl) return mmtfl->alphas.cwiseAbs();
  if (stl.empty()) return {};
  Eigen::MatrixXd w(stl.front().alpha.size(), static_cast<Eigen::Index>(stl.size()));
  for (std::size_t t = 0; t < stl.size(); ++t) w.col(static_cast<Eigen::Index>(t)) = stl[t].alpha.cwiseAbs();
  return w;
}

TrainedModel train_method(const MethodSpec& method, const std::vector<TaskData>& tasks,
                          const std::vector<std::string>& feature_names, std::uint64_t seed) {
  if (tasks.empty()) throw DomainError("train_method: no tasks");
  TrainedModel tm;
  tm.method = method;
  tm.feature_names = feature_names;
  std::vector<TaskData> scaled;
  std::vector<Standardizer> scalers;
  for (const auto& t : tasks) {
    tm.task_names.push_back(t.name);
    Standardizer s = Standardizer::fit(t.X);
    TaskData z = t;
    z.X = s.apply(t.X);
    scaled.push_back(std::move(z));
    scalers.push_back(std::move(s));
  }
  if (method.kind == MethodKind::Mmtfl) {
    MmtflModel m = fit_mmtfl(scaled, method.reg, method.loss, seed, method.solver);
    m.scaling = std::move(scalers);
    m.feature_names = feature_names;
    tm.mmtfl = std::move(m);
  } else {
    for (std::size_t t = 0; t < scaled.size(); ++t) {
      StlModel m = fit_stl(scaled[t], method.lambda, method.stl, method.loss, method.solver.inner);
      m.scaling = scalers[t];
      tm.stl.push_back(std::move(m));
    }
  }
  return tm;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DomainError("auc: scores and labels differ in length");
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1 && labels[i] != -1) throw DomainError("auc: labels must be +-1");
    if (std::isnan(scores[i])) throw DomainError("auc: NaN score");
    if (labels[i] == 1) ++n_pos;
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DomainError("auc: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of (1-based, tie-averaged) ranks of the positives, kept doubled so
  // it stays an exact integer.
  long long rank_sum_x2 = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const auto avg_rank_x2 = static_cast<long long>(i + 1 + j);  // 2 * mean of i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) rank_sum_x2 += avg_rank_x2;
    }
    i = j;
  }
  const auto np = static_cast<long long>(n_pos);
  const long long u_x2 = rank_sum_x2 - np * (np + 1);
  return (static_cast<double>(u_x2) / 2.0) / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

Confusion& Confusion::operator+=(const Confusion& o) {
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) m[r][c] += o.m[r][c];
  return *this;
}

Confusion confusion(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw DomainError("confusion: length mismatch");
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if ((truth[i] != 1 && truth[i] != -1) || (predicted[i] != 1 && predicted[i] != -1)) {
      throw DomainError("confusion: labels must be +-1");
    }
    ++c.m[truth[i] == 1 ? 0 : 1][predicted[i] == 1 ? 0 : 1];
  }
  return c;
}

AucSummary summarize(std::vector<double> values) {
  AucSummary s;
  s.values = std::move(values);
  if (s.values.empty()) return s;
  const auto n = static_cast<double>(s.values.size());
  s.mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / n;
  if (s.values.size() > 1) {
    double ss = 0.0;
    for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

ImportanceTable importance_report(const TrainedModel& model) {
  ImportanceTable table;
  const Eigen::MatrixXd w = model.task_weights();
  auto name_of = [&](std::size_t j) {
    return j < model.feature_names.size() ? model.feature_names[j] : fmt::format("f{}", j);
  };
  auto ranked = [&](const Eigen::VectorXd& v) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(v.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return v(static_cast<Eigen::Index>(a)) > v(static_cast<Eigen::Index>(b));
    });
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t j : idx) out.emplace_back(name_of(j), v(static_cast<Eigen::Index>(j)));
    return out;
  };
  if (model.mmtfl) table.columns.push_back({"c", ranked(model.mmtfl->c)});
  for (std::size_t t = 0; t < static_cast<std::size_t>(w.cols()); ++t) {
    const std::string task = t < model.task_names.size() ? model.task_names[t] : fmt::format("task{}", t);
    table.columns.push_back({"|alpha| " + task, ranked(w.col(static_cast<Eigen::Index>(t)))});
  }
  return table;
}

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

std::map<std::string, std::vector<std::size_t>> ids_by_stratum(const EvalData& data,
                                                               const std::vector<bool>& within) {
  // Only ids referenced by some task take part.
  std::vector<bool> used(data.num_ids(), false);
  for (const auto& t : data.tasks)
    for (std::size_t id : t.ids) used.at(id) = true;
  std::map<std::string, std::vector<std::size_t>> out;
  for (std::size_t id = 0; id < data.num_ids(); ++id) {
    if (!used[id] || (!within.empty() && !within[id])) continue;
    out[data.strata[id]].push_back(id);
  }
  return out;
}

struct TaskEval {
  std::vector<double> scores;
  std::vector<int> predicted;
  std::vector<int> truth;
  std::vector<std::size_t> ids;
};

// Predictions of `model` on the rows of each task selected by `test`.
std::vector<TaskEval> evaluate_on(const TrainedModel& model, const EvalData& data,
                                  const std::vector<bool>& test) {
  const auto tests = subset_tasks(data.tasks, test);
  std::vector<TaskEval> out(tests.size());
  for (std::size_t t = 0; t < tests.size(); ++t) {
    if (tests[t].rows() == 0) continue;
    const Prediction p = model.predict(t, tests[t].X);
    out[t].scores.assign(p.scores.data(), p.scores.data() + p.scores.size());
    out[t].predicted = p.labels;
    for (Eigen::Index i = 0; i < tests[t].rows(); ++i) out[t].truth.push_back(tests[t].y(i) > 0 ? 1 : -1);
    out[t].ids = tests[t].ids;
  }
  return out;
}

bool has_both_classes(const std::vector<int>& truth) {
  const bool pos = std::find(truth.begin(), truth.end(), 1) != truth.end();
  const bool neg = std::find(truth.begin(), truth.end(), -1) != truth.end();
  return pos && neg;
}

std::vector<bool> complement(const std::vector<bool>& mask, const std::vector<bool>& within) {
  std::vector<bool> out(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = !mask[i] && (within.empty() || within[i]);
  return out;
}

void fill_hyperparameters(EvalReport& r, const MethodSpec& m) {
  r.method = m.name;
  if (m.kind == MethodKind::Mmtfl) {
    r.gamma1 = m.reg.gamma1;
    r.gamma2 = m.reg.gamma2;
  } else {
    r.lambda = m.lambda;
  }
}

TunedSetting tuned_setting(std::string scope, const GridResult& g) {
  return {std::move(scope), g.best.reg.gamma1, g.best.reg.gamma2, g.best.lambda, g.best_score};
}

}  // namespace

std::vector<bool> stratified_split(const EvalData& data, double ratio, std::uint64_t seed,
                                   const std::vector<bool>& within) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("partition ratio must lie in (0, 1)");
  std::vector<bool> train(data.num_ids(), false);
  auto rng = make_rng(seed, 0x5b117ULL);
  for (auto& [stratum, ids] : ids_by_stratum(data, within)) {
    const auto n_train = static_cast<std::size_t>(std::lround(ratio * static_cast<double>(ids.size())));
    if (n_train == 0 || n_train >= ids.size()) {
      throw DomainError(fmt::format("ratio {} leaves stratum '{}' ({} rows) without {} rows", ratio,
                                    stratum, ids.size(), n_train == 0 ? "training" : "test"));
    }
    std::shuffle(ids.begin(), ids.end(), rng);
    for (std::size_t i = 0; i < n_train; ++i) train[ids[i]] = true;
  }
  return train;
}

std::vector<int> stratified_folds(const EvalData& data, int folds, std::uint64_t seed,
                                  const std::vector<bool>& within) {
  if (folds < 2) throw DomainError("need at least two folds");
  std::vector<int> fold(data.num_ids(), -1);
  auto rng = make_rng(seed, 0xf01dULL);
  int offset = 0;
  for (auto& [stratum, ids] : ids_by_stratum(data, within)) {
    std::shuffle(ids.begin(), ids.end(), rng);
    // Rotating the start keeps small strata from piling into fold 0.
    for (std::size_t i = 0; i < ids.size(); ++i) {
      fold[ids[i]] = static_cast<int>((i + static_cast<std::size_t>(offset)) % static_cast<std::size_t>(folds));
    }
    offset = (offset + static_cast<int>(ids.size())) % folds;
  }
  return fold;
}

EvalReport random_partition_eval(const EvalData& data, const MethodSpec& base,
                                 const RandomPartitionConfig& cfg) {
  if (cfg.repeats < 1) throw DomainError("repeats must be positive");
  const std::size_t T = data.tasks.size();
  MethodSpec method = base;
  std::optional<TunedSetting> tuned;
  if (cfg.grid) {
    const GridResult g = grid_search(data, base, *cfg.grid, stratified_split(data, cfg.ratio, cfg.seed));
    method = g.best;
    tuned = tuned_setting("repeat 0 training split", g);
  }
  struct RepeatResult {
    std::vector<double> auc;
    std::vector<Confusion> conf;
  };
  std::vector<RepeatResult> results(static_cast<std::size_t>(cfg.repeats));
  parallel_for(results.size(), cfg.jobs, [&](std::size_t r) {
    const auto train = stratified_split(data, cfg.ratio, cfg.seed + 1000003ULL * r);
    const auto model = train_method(method, subset_tasks(data.tasks, train), data.feature_names, cfg.seed);
    const auto evals = evaluate_on(model, data, complement(train, {}));
    for (std::size_t t = 0; t < T; ++t) {
      results[r].auc.push_back(auc(evals[t].scores, evals[t].truth));
      results[r].conf.push_back(confusion(evals[t].predicted, evals[t].truth));
    }
  });

  EvalReport report;
  fill_hyperparameters(report, method);
  report.scheme = "random_partition";
  if (tuned) report.tuning.push_back(*tuned);
  report.ratio = cfg.ratio;
  report.repeats = cfg.repeats;
  std::vector<double> all;
  for (const auto& r : results) {
    all.push_back(std::accumulate(r.auc.begin(), r.auc.end(), 0.0) / static_cast<double>(T));
  }
  for (std::size_t t = 0; t < T; ++t) {
    TaskResult tr;
    tr.task = data.tasks[t].name;
    tr.class_names = data.class_names[t];
    std::vector<double> v;
    for (const auto& r : results) {
      v.push_back(r.auc[t]);
      tr.confusion += r.conf[t];
    }
    tr.auc = summarize(std::move(v));
    report.tasks.push_back(std::move(tr));
  }
  report.all_tasks = summarize(std::move(all));
  if (cfg.importance) {
    report.importance = importance_report(train_method(method, data.tasks, data.feature_names, cfg.seed));
  }
  return report;
}

EvalReport leave_one_subject_out_eval(const EvalData& data, const MethodSpec& method,
                                      const LosoConfig& cfg) {
  const std::size_t T = data.tasks.size();
  // Subjects in order of first appearance among task rows.
  std::vector<std::string> subjects;
  std::map<std::string, std::string> group_of;
  std::set<std::string> seen;
  for (std::size_t id = 0; id < data.num_ids(); ++id) {
    const auto& s = data.subjects[id];
    if (s.empty()) throw DomainError("leave-one-subject-out needs subject ids for every row");
    if (seen.insert(s).second) {
      subjects.push_back(s);
      group_of[s] = data.subject_groups[id];
    }
  }
  std::map<std::string, std::set<std::string>> subjects_per_group;
  std::vector<std::set<std::string>> task_subjects(T);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t id : data.tasks[t].ids) {
      task_subjects[t].insert(data.subjects[id]);
      subjects_per_group[data.subject_groups[id]].insert(data.subjects[id]);
    }
  }
  for (const auto& [g, members] : subjects_per_group) {
    if (members.size() < 2) {
      throw DomainError(fmt::format("leave-one-subject-out needs >= 2 subjects in group {}", g));
    }
  }

  EvalReport report;
  fill_hyperparameters(report, method);
  report.scheme = "leave_one_subject_out";

  std::vector<std::string> rounds;
  for (const auto& s : subjects) {
    bool used = false;
    for (std::size_t t = 0; t < T; ++t) used = used || task_subjects[t].count(s) > 0;
    if (used) rounds.push_back(s);
    else report.notices.push_back(fmt::format("subject {} (group {}) belongs to no task; skipped", s, group_of[s]));
  }
  report.repeats = static_cast<int>(rounds.size());

  std::vector<std::vector<TaskEval>> round_evals(rounds.size());
  std::vector<MethodSpec> round_methods(rounds.size(), method);
  std::vector<TunedSetting> round_tuning(rounds.size());
  // Rounds run in parallel, so each round's grid runs on one thread.
  std::optional<GridConfig> grid = cfg.grid;
  if (grid) grid->jobs = 1;
  parallel_for(rounds.size(), cfg.jobs, [&](std::size_t r) {
    std::vector<bool> test(data.num_ids(), false);
    for (std::size_t id = 0; id < data.num_ids(); ++id) test[id] = data.subjects[id] == rounds[r];
    const auto train = complement(test, {});
    if (grid) {
      const GridResult g = grid_search(data, method, *grid, train);
      round_methods[r] = g.best;
      round_tuning[r] = tuned_setting("without " + rounds[r], g);
    }
    const auto model = train_method(round_methods[r], subset_tasks(data.tasks, train), data.feature_names, cfg.seed);
    round_evals[r] = evaluate_on(model, data, test);
  });
  // The headline setting is the one chosen in most rounds (earliest on ties).
  MethodSpec headline = method;
  if (grid) {
    report.tuning = round_tuning;
    std::size_t best_count = 0;
    for (std::size_t r = 0; r < rounds.size(); ++r) {
      const auto same = [&](const TunedSetting& x) {
        return x.gamma1 == round_tuning[r].gamma1 && x.gamma2 == round_tuning[r].gamma2 &&
               x.lambda == round_tuning[r].lambda;
      };
      const auto n = static_cast<std::size_t>(std::count_if(round_tuning.begin(), round_tuning.end(), same));
      if (n > best_count) {
        best_count = n;
        headline = round_methods[r];
      }
    }
    fill_hyperparameters(report, headline);
  }

  std::vector<double> task_auc;
  for (std::size_t t = 0; t < T; ++t) {
    TaskEval pooled;
    std::vector<SubjectCounts> counts;
    for (std::size_t r = 0; r < rounds.size(); ++r) {
      const auto& e = round_evals[r][t];
      if (e.ids.empty()) continue;
      SubjectCounts sc{data.tasks[t].name, rounds[r], group_of[rounds[r]], 0, 0};
      for (int p : e.predicted) (p == 1 ? sc.predicted_positive : sc.predicted_negative) += 1;
      counts.push_back(sc);
      pooled.scores.insert(pooled.scores.end(), e.scores.begin(), e.scores.end());
      pooled.predicted.insert(pooled.predicted.end(), e.predicted.begin(), e.predicted.end());
      pooled.truth.insert(pooled.truth.end(), e.truth.begin(), e.truth.end());
    }
    // Positive-class subjects first, as in the per-subject tables.
    std::stable_partition(counts.begin(), counts.end(), [&](const SubjectCounts& c) {
      return c.group == data.class_names[t][0];
    });
    report.per_subject.insert(report.per_subject.end(), counts.begin(), counts.end());
    TaskResult tr;
    tr.task = data.tasks[t].name;
    tr.class_names = data.class_names[t];
    tr.confusion = confusion(pooled.predicted, pooled.truth);
    if (!has_both_classes(pooled.truth)) throw DomainError("pooled predictions lack a class");
    tr.auc = summarize({auc(pooled.scores, pooled.truth)});
    task_auc.push_back(tr.auc.mean);
    report.tasks.push_back(std::move(tr));
  }
  report.all_tasks = summarize(task_auc);
  if (cfg.importance) {
    report.importance = importance_report(train_method(headline, data.tasks, data.feature_names, cfg.seed));
  }
  return report;
}

std::vector<double> default_grid() { return {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3}; }

GridResult grid_search(const EvalData& data, const MethodSpec& method, const GridConfig& cfg,
                       const std::vector<bool>& within) {
  if (cfg.values.empty()) throw DomainError("grid search needs at least one grid value");
  const bool mmtfl = method.kind == MethodKind::Mmtfl;
  std::vector<GridCell> cells;
  if (mmtfl) {
    for (double g1 : cfg.values)
      for (double g2 : cfg.values) cells.push_back({g1, g2, 0.0, 0.0, false, {}});
  } else {
    for (double l : cfg.values) cells.push_back({0.0, 0.0, l, 0.0, false, {}});
  }
  const auto folds = stratified_folds(data, cfg.folds, cfg.seed, within);

  auto with_cell = [&](const GridCell& c) {
    MethodSpec m = method;
    if (mmtfl) {
      m.reg.gamma1 = c.gamma1;
      m.reg.gamma2 = c.gamma2;
    } else {
      m.lambda = c.lambda;
    }
    return m;
  };

  parallel_for(cells.size(), cfg.jobs, [&](std::size_t ci) {
    GridCell& cell = cells[ci];
    const MethodSpec m = with_cell(cell);
    try {
      double total = 0.0;
      int count = 0;
      for (int f = 0; f < cfg.folds; ++f) {
        std::vector<bool> train(data.num_ids(), false);
        std::vector<bool> test(data.num_ids(), false);
        for (std::size_t id = 0; id < data.num_ids(); ++id) {
          if (folds[id] < 0) continue;
          (folds[id] == f ? test : train)[id] = true;
        }
        const auto model = train_method(m, subset_tasks(data.tasks, train), data.feature_names, cfg.seed);
        for (const auto& e : evaluate_on(model, data, test)) {
          if (!has_both_classes(e.truth)) continue;
          total += auc(e.scores, e.truth);
          ++count;
        }
      }
      if (count == 0) throw DomainError("no validation fold contained both classes");
      cell.score = total / count;
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.message = e.what();
    }
  });

  const GridCell* best = nullptr;
  for (const auto& c : cells) {
    if (!c.ok) continue;
    if (best == nullptr || c.score > best->score) {
      best = &c;
    } else if (c.score == best->score) {
      const bool better = mmtfl ? (c.gamma2 > best->gamma2 ||
                                   (c.gamma2 == best->gamma2 && c.gamma1 > best->gamma1))
                                : c.lambda > best->lambda;
      if (better) best = &c;
    }
  }
  if (best == nullptr) {
    std::string why;
    for (const auto& c : cells) why += "\n  " + c.message;
    throw std::runtime_error("grid search: every cell failed to train:" + why);
  }
  GridResult out;
  out.best = with_cell(*best);
  out.best_score = best->score;
  out.cells = std::move(cells);
  return out;
}

}  // namespace gaitmtl
