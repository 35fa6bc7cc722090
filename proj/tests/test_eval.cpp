#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "gaitmtl/dataset.hpp"
#include "gaitmtl/errors.hpp"
#include "gaitmtl/eval.hpp"

using namespace gaitmtl;

namespace {

double pair_count_auc(const std::vector<double>& s, const std::vector<int>& l) {
  double wins = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (l[i] != 1 || l[j] != -1) continue;
      ++pairs;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / static_cast<double>(pairs);
}

// Subjects P1..P4 (PD), S1..S3 (ST), H1..H3 (H); four trials each. Feature 0
// separates the groups, the rest is noise.
Dataset toy_dataset(std::uint64_t seed, int trials = 4) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const std::vector<std::pair<std::string, Group>> subjects = {
      {"P1", Group::PD}, {"P2", Group::PD}, {"P3", Group::PD}, {"P4", Group::PD}, {"S1", Group::ST},
      {"S2", Group::ST}, {"S3", Group::ST}, {"H1", Group::H},  {"H2", Group::H},  {"H3", Group::H}};
  Dataset ds;
  const int d = 5;
  ds.X.resize(static_cast<Eigen::Index>(subjects.size()) * trials, d);
  Eigen::Index r = 0;
  for (const auto& [id, g] : subjects) {
    for (int k = 0; k < trials; ++k, ++r) {
      for (int j = 0; j < d; ++j) ds.X(r, j) = z(rng);
      ds.X(r, 0) += g == Group::PD ? 3.0 : (g == Group::ST ? 6.0 : 0.0);
      ds.X(r, 1) += g == Group::ST ? 2.0 : 0.0;
      ds.subject_ids.push_back(id);
      ds.groups.push_back(g);
    }
  }
  for (int j = 0; j < d; ++j) ds.feature_names.push_back("x" + std::to_string(j));
  return ds;
}

MethodSpec quick(std::string_view name) {
  MethodSpec m = method_from_name(name);
  m.reg.gamma1 = m.reg.gamma2 = 0.1;
  m.lambda = 1.0;
  return m;
}

}  // namespace

TEST(Auc, Examples) {
  EXPECT_EQ(auc(std::vector<double>{0.9, 0.8, 0.1, 0.2}, std::vector<int>{1, 1, -1, -1}), 1.0);
  EXPECT_EQ(auc(std::vector<double>{0.1, 0.2, 0.9, 0.8}, std::vector<int>{1, 1, -1, -1}), 0.0);
  EXPECT_EQ(auc(std::vector<double>{0.5, 0.5, 0.5}, std::vector<int>{1, -1, -1}), 0.5);
  // Pairs: (0.8>0.4) (0.8>0.6) (0.5>0.4) (0.5<0.6) -> 3/4.
  EXPECT_EQ(auc(std::vector<double>{0.8, 0.5, 0.4, 0.6}, std::vector<int>{1, 1, -1, -1}), 0.75);
  EXPECT_THROW(auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), DomainError);
  EXPECT_THROW(auc(std::vector<double>{0.1}, std::vector<int>{1, -1}), DomainError);
}

TEST(Auc, EqualsPairCounting) {
  std::mt19937_64 rng(131);
  std::uniform_int_distribution<int> n_dist(2, 12), val(0, 5);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto n = static_cast<std::size_t>(n_dist(rng));
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = val(rng) / 3.0;
      l[i] = val(rng) % 2 ? 1 : -1;
    }
    l[0] = 1;
    l[1] = -1;
    EXPECT_EQ(auc(s, l), pair_count_auc(s, l));
  }
}

TEST(Auc, SymmetryAndMonotoneInvariance) {
  std::mt19937_64 rng(137);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> s(20);
    std::vector<int> l(20);
    for (std::size_t i = 0; i < 20; ++i) {
      s[i] = std::round(4.0 * z(rng)) / 4.0;
      l[i] = z(rng) > 0.0 ? 1 : -1;
    }
    l[0] = 1;
    l[1] = -1;
    const double a = auc(s, l);
    std::vector<double> neg(s), mono(s);
    std::vector<int> flipped(l);
    for (double& v : neg) v = -v;
    for (double& v : mono) v = std::exp(v) * 3.0 + 1.0;
    for (int& v : flipped) v = -v;
    EXPECT_DOUBLE_EQ(auc(neg, l), 1.0 - a);
    EXPECT_DOUBLE_EQ(auc(s, flipped), 1.0 - a);
    EXPECT_EQ(auc(mono, l), a);
  }
}

TEST(Confusion, CountsAndAccumulates) {
  const Confusion c = confusion(std::vector<int>{1, -1, 1, 1, -1}, std::vector<int>{1, 1, -1, 1, -1});
  EXPECT_EQ(c.m[0][0], 2);
  EXPECT_EQ(c.m[0][1], 1);
  EXPECT_EQ(c.m[1][0], 1);
  EXPECT_EQ(c.m[1][1], 1);
  Confusion total = c;
  total += c;
  EXPECT_EQ(total.total(), 10);
  EXPECT_THROW(confusion(std::vector<int>{0}, std::vector<int>{1}), DomainError);
}

TEST(Summarize, SampleStandardDeviation) {
  const AucSummary s = summarize({0.8, 0.9, 1.0});
  EXPECT_NEAR(s.mean, 0.9, 1e-15);
  EXPECT_NEAR(s.sd, 0.1, 1e-15);
  EXPECT_EQ(summarize({0.7}).sd, 0.0);
}

TEST(Tasks, CanonicalTasksFromDataset) {
  const Dataset ds = toy_dataset(1);
  const auto tasks = make_tasks(ds, canonical_tasks());
  ASSERT_EQ(tasks.size(), 3u);
  EXPECT_EQ(tasks[0].name, "PD_vs_H");
  EXPECT_EQ(tasks[0].rows(), 28);
  EXPECT_EQ(tasks[1].rows(), 24);
  EXPECT_EQ(tasks[2].rows(), 28);
  EXPECT_EQ((tasks[0].y.array() > 0).count(), 16);
  for (const auto& t : tasks) {
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      EXPECT_EQ(t.X.row(i), ds.X.row(static_cast<Eigen::Index>(t.ids[static_cast<std::size_t>(i)])));
    }
  }
  EXPECT_THROW(TaskDefinition::make("x", Group::H, Group::H), DomainError);

  Dataset no_st = ds;
  for (auto& g : no_st.groups)
    if (g == Group::ST) g = Group::H;
  EXPECT_THROW(make_tasks(no_st, canonical_tasks()), DomainError);
}

TEST(Methods, Registry) {
  for (const auto& n : method_names()) EXPECT_EQ(method_from_name(n).name, n);
  const MethodSpec m = method_from_name("mmtfl12");
  EXPECT_EQ(m.reg.p, 1);
  EXPECT_EQ(m.reg.k, 2);
  EXPECT_EQ(m.loss, LossKind::Logistic);
  EXPECT_EQ(method_from_name("stl_lasso").loss, LossKind::LeastSquares);
  EXPECT_THROW(method_from_name("mmtfl31"), DomainError);
  EXPECT_THROW(method_from_name("svm"), DomainError);
}

TEST(Split, StratumCountsAndDisjointness) {
  const EvalData data = eval_data_from_dataset(toy_dataset(2, 10), canonical_tasks());
  for (double ratio : kPartitionRatios) {
    const auto train = stratified_split(data, ratio, 7);
    std::map<std::string, int> per_stratum;
    for (std::size_t id = 0; id < train.size(); ++id)
      if (train[id]) ++per_stratum[data.strata[id]];
    EXPECT_EQ(per_stratum["PD"], std::lround(ratio * 40));
    EXPECT_EQ(per_stratum["ST"], std::lround(ratio * 30));
    EXPECT_EQ(per_stratum["H"], std::lround(ratio * 30));

    const auto tr = subset_tasks(data.tasks, train);
    std::vector<bool> test(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) test[i] = !train[i];
    const auto te = subset_tasks(data.tasks, test);
    for (std::size_t t = 0; t < tr.size(); ++t) {
      std::set<std::size_t> a(tr[t].ids.begin(), tr[t].ids.end());
      for (std::size_t id : te[t].ids) EXPECT_EQ(a.count(id), 0u);
      EXPECT_EQ(tr[t].rows() + te[t].rows(), data.tasks[t].rows());
    }
  }
  EXPECT_EQ(stratified_split(data, 0.25, 3), stratified_split(data, 0.25, 3));
  EXPECT_NE(stratified_split(data, 0.25, 3), stratified_split(data, 0.25, 4));
}

TEST(Split, EmptySideRejected) {
  const EvalData data = eval_data_from_dataset(toy_dataset(3, 2), canonical_tasks());
  // ST and H hold six rows: 0.05 * 6 rounds to zero training rows.
  EXPECT_THROW(stratified_split(data, 0.05, 0), DomainError);
  EXPECT_THROW(stratified_split(data, 0.95, 0), DomainError);
  EXPECT_THROW(stratified_split(data, 1.0, 0), DomainError);
}

TEST(Folds, PartitionAndBalance) {
  const EvalData data = eval_data_from_dataset(toy_dataset(4, 5), canonical_tasks());
  const auto folds = stratified_folds(data, 3, 11);
  std::map<std::string, std::vector<int>> sizes;
  for (std::size_t id = 0; id < folds.size(); ++id) {
    ASSERT_GE(folds[id], 0);
    ASSERT_LT(folds[id], 3);
    auto& v = sizes[data.strata[id]];
    v.resize(3);
    ++v[static_cast<std::size_t>(folds[id])];
  }
  for (const auto& [stratum, v] : sizes) {
    EXPECT_LE(*std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end()), 1) << stratum;
  }
  std::vector<bool> within(data.num_ids(), false);
  for (std::size_t id = 0; id < within.size(); id += 2) within[id] = true;
  const auto restricted = stratified_folds(data, 3, 11, within);
  for (std::size_t id = 0; id < within.size(); ++id) EXPECT_EQ(restricted[id] >= 0, within[id]);
  EXPECT_THROW(stratified_folds(data, 1, 0), DomainError);
}

TEST(RandomPartition, ReportShapeAndDeterminism) {
  const EvalData data = eval_data_from_dataset(toy_dataset(5, 8), canonical_tasks());
  RandomPartitionConfig cfg;
  cfg.ratio = 0.5;
  cfg.repeats = 3;
  cfg.seed = 2;
  for (const char* name : {"mmtfl21", "stl_ridge"}) {
    const EvalReport a = random_partition_eval(data, quick(name), cfg);
    EXPECT_EQ(a.tasks.size(), 3u);
    EXPECT_EQ(a.all_tasks.values.size(), 3u);
    EXPECT_EQ(a.repeats, 3);
    long tested = 0;
    for (const auto& t : a.tasks) {
      tested += t.confusion.total();
      EXPECT_GE(t.auc.mean, 0.9) << name << " " << t.task;
    }
    // Half of every task's rows are held out in each repeat.
    EXPECT_EQ(tested, 3 * (56 + 48 + 56) / 2);
    EXPECT_FALSE(a.importance.columns.empty());
    cfg.jobs = 3;
    const EvalReport b = random_partition_eval(data, quick(name), cfg);
    cfg.jobs = 1;
    EXPECT_EQ(a.all_tasks.values, b.all_tasks.values);
  }
}

TEST(Loso, RoundsCoverEverySubjectOnce) {
  const EvalData data = eval_data_from_dataset(toy_dataset(6), canonical_tasks());
  const EvalReport r = leave_one_subject_out_eval(data, quick("mmtfl21"));
  EXPECT_EQ(r.repeats, 10);
  EXPECT_EQ(r.scheme, "leave_one_subject_out");
  // Each subject appears in the two tasks that involve its group.
  std::map<std::string, int> appearances;
  for (const auto& s : r.per_subject) {
    ++appearances[s.subject];
    EXPECT_EQ(s.predicted_positive + s.predicted_negative, 4);
  }
  EXPECT_EQ(appearances.size(), 10u);
  for (const auto& [s, n] : appearances) EXPECT_EQ(n, 2) << s;
  // Positive class listed first within each task.
  EXPECT_EQ(r.per_subject.front().subject, "P1");
  EXPECT_EQ(r.per_subject.front().task, "PD_vs_H");
  for (const auto& t : r.tasks) EXPECT_EQ(t.auc.values.size(), 1u);
}

TEST(Loso, NeedsTwoSubjectsPerGroup) {
  Dataset ds = toy_dataset(7);
  for (std::size_t i = 0; i < ds.subject_ids.size(); ++i) {
    if (ds.groups[i] == Group::H) ds.subject_ids[i] = "H1";
  }
  EXPECT_THROW(leave_one_subject_out_eval(eval_data_from_dataset(ds, canonical_tasks()), quick("stl_ridge")),
               DomainError);
}

TEST(Loso, SubjectOutsideTasksIsSkipped) {
  const Dataset ds = toy_dataset(8);
  const std::vector<TaskDefinition> pd_h = {TaskDefinition::make("PD_vs_H", Group::PD, Group::H)};
  const EvalReport r = leave_one_subject_out_eval(eval_data_from_dataset(ds, pd_h), quick("stl_lasso"));
  EXPECT_EQ(r.repeats, 7);
  EXPECT_EQ(r.notices.size(), 3u);
}

TEST(Loso, NoiseFeaturesDoNotSeparate) {
  Dataset ds = toy_dataset(9);
  ds.X.col(0).setZero();
  ds.X.col(1).setZero();
  const EvalData data = eval_data_from_dataset(ds, canonical_tasks());
  const EvalReport r = leave_one_subject_out_eval(data, quick("stl_ridge"));
  for (const auto& t : r.tasks) EXPECT_LT(t.auc.mean, 0.9) << t.task;
}

TEST(RandomPartition, TunesOnFirstTrainingSplitOnly) {
  const EvalData data = eval_data_from_dataset(toy_dataset(13, 6), canonical_tasks());
  GridConfig grid;
  grid.values = {0.01, 1.0, 100.0};
  RandomPartitionConfig cfg;
  cfg.ratio = 0.5;
  cfg.repeats = 2;
  cfg.seed = 4;
  cfg.importance = false;
  cfg.grid = grid;
  const EvalReport a = random_partition_eval(data, method_from_name("stl_ridge"), cfg);
  const auto train = stratified_split(data, cfg.ratio, cfg.seed);
  const GridResult oracle = grid_search(data, method_from_name("stl_ridge"), grid, train);
  ASSERT_EQ(a.tuning.size(), 1u);
  EXPECT_EQ(a.tuning[0].lambda, oracle.best.lambda);
  EXPECT_EQ(a.tuning[0].score, oracle.best_score);
  EXPECT_EQ(a.lambda, oracle.best.lambda);

  // Held-out rows of that split cannot move the chosen setting.
  EvalData altered = data;
  for (auto& t : altered.tasks) {
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      if (!train[t.ids[static_cast<std::size_t>(i)]]) t.X.row(i).setConstant(1e3);
    }
  }
  const EvalReport b = random_partition_eval(altered, method_from_name("stl_ridge"), cfg);
  EXPECT_EQ(b.tuning[0].lambda, a.tuning[0].lambda);
  EXPECT_EQ(b.tuning[0].score, a.tuning[0].score);
}

TEST(Loso, TunesEachRoundOnRemainingSubjects) {
  const EvalData data = eval_data_from_dataset(toy_dataset(14), canonical_tasks());
  GridConfig grid;
  grid.values = {0.01, 10.0};
  LosoConfig cfg;
  cfg.importance = false;
  cfg.grid = grid;
  const EvalReport a = leave_one_subject_out_eval(data, method_from_name("mmtfl21"), cfg);
  ASSERT_EQ(a.tuning.size(), 10u);
  EXPECT_EQ(a.tuning[0].scope, "without P1");
  for (std::size_t r : {0u, 5u, 9u}) {
    const std::string held = a.tuning[r].scope.substr(std::string("without ").size());
    std::vector<bool> train(data.num_ids());
    for (std::size_t id = 0; id < data.num_ids(); ++id) train[id] = data.subjects[id] != held;
    const GridResult oracle = grid_search(data, method_from_name("mmtfl21"), grid, train);
    EXPECT_EQ(a.tuning[r].gamma1, oracle.best.reg.gamma1) << held;
    EXPECT_EQ(a.tuning[r].gamma2, oracle.best.reg.gamma2) << held;
  }
  cfg.jobs = 3;
  const EvalReport b = leave_one_subject_out_eval(data, method_from_name("mmtfl21"), cfg);
  EXPECT_EQ(a.all_tasks.values, b.all_tasks.values);
  EXPECT_EQ(a.gamma1, b.gamma1);
  EXPECT_EQ(a.gamma2, b.gamma2);
}

TEST(GridSearch, SingleCellAndTieBreak) {
  const EvalData data = eval_data_from_dataset(toy_dataset(10, 6), canonical_tasks());
  GridConfig one;
  one.values = {0.5};
  const GridResult g1 = grid_search(data, method_from_name("mmtfl21"), one);
  EXPECT_EQ(g1.cells.size(), 1u);
  EXPECT_EQ(g1.best.reg.gamma1, 0.5);
  EXPECT_EQ(g1.best.reg.gamma2, 0.5);

  // Single separating feature: every small-gamma cell ranks perfectly.
  Dataset ds = toy_dataset(10, 6);
  ds.X = ds.X.leftCols(1).eval();
  ds.feature_names.resize(1);
  const EvalData sep = eval_data_from_tasks(
      {make_tasks(ds, canonical_tasks())[0]});
  GridConfig tie;
  tie.values = {1e-3, 1e-2};
  const GridResult g2 = grid_search(sep, method_from_name("mmtfl22"), tie);
  ASSERT_EQ(g2.cells.size(), 4u);
  for (const auto& c : g2.cells) EXPECT_EQ(c.score, g2.cells.front().score);
  EXPECT_EQ(g2.best.reg.gamma1, 1e-2);
  EXPECT_EQ(g2.best.reg.gamma2, 1e-2);

  const GridResult g3 = grid_search(sep, method_from_name("stl_ridge"), tie);
  EXPECT_EQ(g3.best.lambda, 1e-2);
}

TEST(GridSearch, WithinRestrictsValidationRows) {
  const EvalData data = eval_data_from_dataset(toy_dataset(11, 6), canonical_tasks());
  GridConfig cfg;
  cfg.values = {0.1, 1.0};
  const auto train = stratified_split(data, 0.5, 1);
  const GridResult a = grid_search(data, method_from_name("stl_ridge"), cfg, train);
  // Rows outside `within` must not influence the result.
  EvalData altered = data;
  for (auto& t : altered.tasks) {
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      if (!train[t.ids[static_cast<std::size_t>(i)]]) t.X.row(i).setConstant(1e3);
    }
  }
  const GridResult b = grid_search(altered, method_from_name("stl_ridge"), cfg, train);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) EXPECT_EQ(a.cells[i].score, b.cells[i].score);
}

TEST(GridSearch, AllCellsFailingIsAnError) {
  const EvalData data = eval_data_from_dataset(toy_dataset(12, 6), canonical_tasks());
  GridConfig cfg;
  cfg.values = {-1.0};
  EXPECT_THROW(grid_search(data, method_from_name("mmtfl21"), cfg), std::runtime_error);
}

TEST(Importance, RankedDescendingWithStableTies) {
  const EvalData data = eval_data_from_dataset(toy_dataset(13, 6), canonical_tasks());
  const TrainedModel m = train_method(quick("mmtfl21"), data.tasks, data.feature_names);
  const ImportanceTable t = importance_report(m);
  ASSERT_EQ(t.columns.size(), 4u);
  EXPECT_EQ(t.columns[0].name, "c");
  EXPECT_EQ(t.columns[1].name, "|alpha| PD_vs_H");
  for (const auto& col : t.columns) {
    ASSERT_EQ(col.ranked.size(), 5u);
    for (std::size_t i = 1; i < col.ranked.size(); ++i) EXPECT_GE(col.ranked[i - 1].second, col.ranked[i].second);
  }
  EXPECT_EQ(t.columns[0].ranked.front().first, "x0");
  const TrainedModel s = train_method(quick("stl_lasso"), data.tasks, data.feature_names);
  EXPECT_EQ(importance_report(s).columns.size(), 3u);
}

TEST(TrainMethod, StandardizesPerTask) {
  const EvalData data = eval_data_from_dataset(toy_dataset(14, 6), canonical_tasks());
  const TrainedModel m = train_method(quick("stl_ridge"), data.tasks, data.feature_names);
  ASSERT_EQ(m.stl.size(), 3u);
  for (std::size_t t = 0; t < 3; ++t) {
    const Eigen::VectorXd mean = data.tasks[t].X.colwise().mean();
    EXPECT_LT((m.stl[t].scaling.mean - mean).norm(), 1e-12);
  }
  // Shifting one task's features leaves its predictions unchanged.
  std::vector<TaskData> shifted = data.tasks;
  shifted[0].X.array() += 5.0;
  const TrainedModel m2 = train_method(quick("stl_ridge"), shifted, data.feature_names);
  const auto p1 = m.predict(0, data.tasks[0].X);
  const auto p2 = m2.predict(0, shifted[0].X);
  EXPECT_LT((p1.scores - p2.scores).norm(), 1e-9);
}
