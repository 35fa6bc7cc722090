// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.
//
//   acceptance            run everything
//   acceptance 6 7        run only the listed criteria

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <fmt/core.h>

#include "gaitmtl/dataset.hpp"
#include "gaitmtl/errors.hpp"
#include "gaitmtl/eval.hpp"
#include "gaitmtl/features.hpp"
#include "gaitmtl/mmtfl.hpp"
#include "gaitmtl/parallel.hpp"
#include "gaitmtl/synth.hpp"

using namespace gaitmtl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---- factorization watch ---------------------------------------------------
// Every MMTFL fit in the suite reports its iterates here.

std::atomic<long> g_fits_checked{0};
std::atomic<long> g_iterates_checked{0};
std::atomic<long> g_factor_violations{0};

bool factorization_holds(const Eigen::VectorXd& c, const Eigen::MatrixXd& betas, const Eigen::MatrixXd& alphas) {
  if (alphas.rows() != betas.rows() || alphas.cols() != betas.cols() || c.size() != betas.rows()) return false;
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    if (!(c(j) >= 0.0)) return false;
    for (Eigen::Index t = 0; t < betas.cols(); ++t) {
      if (alphas(j, t) != c(j) * betas(j, t)) return false;
    }
  }
  return true;
}

void watch(OuterConfig& cfg) {
  cfg.on_iteration = [](int, const Eigen::VectorXd& c, const Eigen::MatrixXd& b, const Eigen::MatrixXd& a) {
    ++g_iterates_checked;
    if (!factorization_holds(c, b, a)) ++g_factor_violations;
  };
}

void check_model(const MmtflModel& m) {
  ++g_fits_checked;
  if (!factorization_holds(m.c, m.betas, m.alphas)) ++g_factor_violations;
}

MethodSpec watched(std::string_view name) {
  MethodSpec m = method_from_name(name);
  if (m.kind == MethodKind::Mmtfl) watch(m.solver);
  return m;
}

// ---- 1 ---------------------------------------------------------------------

Outcome gradient_oracle() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim(1, 10), rows(1, 20);
  std::normal_distribution<double> z(0.0, 1.0);
  constexpr double h = 1e-6;
  double worst = 0.0;
  int checks = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const int d = dim(rng), n = rows(rng);
    Eigen::MatrixXd X(n, d);
    Eigen::VectorXd y(n), a(d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) X(i, j) = z(rng);
      y(i) = z(rng) < 0.0 ? -1.0 : 1.0;
    }
    for (int j = 0; j < d; ++j) a(j) = z(rng);
    for (LossKind kind : {LossKind::Logistic, LossKind::LeastSquares}) {
      const Eigen::VectorXd g = evaluate_loss(kind, a, X, y).gradient;
      Eigen::VectorXd fd(d);
      for (int j = 0; j < d; ++j) {
        Eigen::VectorXd ap = a, am = a;
        ap(j) += h;
        am(j) -= h;
        fd(j) = (loss_only(kind, ap, X, y) - loss_only(kind, am, X, y)) / (2.0 * h);
      }
      const double rel = (g - fd).norm() / std::max(g.norm(), 1e-300);
      worst = std::max(worst, rel);
      ++checks;
    }
  }
  return {worst < 1e-5, fmt::format("{} gradients, worst relative error {:.3g}", checks, worst)};
}

// ---- 2 ---------------------------------------------------------------------

std::vector<TaskData> random_tasks(std::mt19937_64& rng, int T, int d, int n) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::VectorXd shared(d);
  for (int j = 0; j < d; ++j) shared(j) = j % 3 == 0 ? z(rng) : 0.0;
  std::vector<TaskData> tasks;
  for (int t = 0; t < T; ++t) {
    TaskData task;
    task.name = fmt::format("task{}", t);
    task.X.resize(n, d);
    task.y.resize(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) task.X(i, j) = z(rng);
    Eigen::VectorXd w = shared;
    w(t % d) += z(rng);
    const Eigen::VectorXd s = task.X * w;
    for (int i = 0; i < n; ++i) task.y(i) = s(i) + 0.5 * z(rng) < 0.0 ? -1.0 : 1.0;
    task.y(0) = 1.0;
    task.y(1) = -1.0;
    tasks.push_back(std::move(task));
  }
  return tasks;
}

Outcome objective_monotonicity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  const std::array<std::pair<int, int>, 4> variants = {{{2, 1}, {1, 2}, {1, 1}, {2, 2}}};
  std::uniform_int_distribution<int> dims(2, 12), tasks_n(1, 4), rows(8, 40);
  std::uniform_real_distribution<double> log_gamma(-2.0, 1.0);
  int fits = 0, bad_fits = 0;
  double worst_rise = 0.0;
  for (int f = 0; f < 100; ++f) {
    const auto [p, k] = variants[static_cast<std::size_t>(f % 4)];
    const LossKind loss = (f / 4) % 2 == 0 ? LossKind::Logistic : LossKind::LeastSquares;
    const auto tasks = random_tasks(rng, tasks_n(rng), dims(rng), rows(rng));
    RegularizerSpec spec;
    spec.p = p;
    spec.k = k;
    spec.gamma1 = std::pow(10.0, log_gamma(rng));
    spec.gamma2 = std::pow(10.0, log_gamma(rng));
    OuterConfig cfg;
    watch(cfg);
    const MmtflModel m = fit_mmtfl(tasks, spec, loss, static_cast<std::uint64_t>(f), cfg);
    check_model(m);
    ++fits;
    bool ok = !m.diagnostics.empty();
    for (std::size_t i = 1; i < m.diagnostics.size(); ++i) {
      const double rise = m.diagnostics[i].second - m.diagnostics[i - 1].second;
      worst_rise = std::max(worst_rise, rise);
      if (rise > 1e-9) ok = false;
    }
    if (!ok) ++bad_fits;
  }
  const double secs = seconds_since(t0);
  return {bad_fits == 0 && secs < 60.0,
          fmt::format("{} fits, {} non-monotone, largest rise {:.3g}, {:.1f} s", fits, bad_fits, worst_rise, secs)};
}

// ---- 4 ---------------------------------------------------------------------

// Minimizer of a unimodal scalar function on [lo, hi] by repeated grid
// refinement.
double grid_argmin(const std::function<double(double)>& f, double lo, double hi) {
  const double floor = lo, ceil = hi;
  double best = lo;
  for (int round = 0; round < 8; ++round) {
    const int n = 200;
    double best_v = f(lo);
    best = lo;
    for (int i = 1; i <= n; ++i) {
      const double x = lo + (hi - lo) * i / n;
      const double v = f(x);
      if (v < best_v) {
        best_v = v;
        best = x;
      }
    }
    const double step = (hi - lo) / n;
    lo = std::max(floor, best - step);
    hi = std::min(ceil, best + step);
  }
  return best;
}

// The default stopping rule (relative objective decrease < 1e-8) leaves
// errors near 1e-4 on the minimizer; oracle comparisons solve to rounding.
InnerConfig oracle_solve() {
  InnerConfig ic;
  ic.tolerance = 1e-15;
  ic.max_iterations = 100000;
  return ic;
}

Outcome solver_oracles() {
  const InnerConfig ic = oracle_solve();
  std::mt19937_64 rng(404);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_int_distribution<int> dims(1, 5), rows(6, 30);
  std::uniform_real_distribution<double> log_lambda(-2.0, 1.5);
  double ridge_err = 0.0, lasso_err = 0.0, beta_err = 0.0, c_err = 0.0;

  for (int inst = 0; inst < 50; ++inst) {
    const int d = dims(rng), n = rows(rng);
    TaskData task;
    task.X.resize(n, d);
    task.y.resize(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) task.X(i, j) = z(rng);
      task.y(i) = i % 2 == 0 ? 1.0 : -1.0;
    }
    const double lambda = std::pow(10.0, log_lambda(rng));
    const StlModel m = fit_stl(task, lambda, StlRegularizer::Ridge, LossKind::LeastSquares, ic);
    const Eigen::MatrixXd A = task.X.transpose() * task.X + lambda * Eigen::MatrixXd::Identity(d, d);
    const Eigen::VectorXd closed = A.ldlt().solve(task.X.transpose() * task.y);
    ridge_err = std::max(ridge_err, (m.alpha - closed).lpNorm<Eigen::Infinity>());
  }

  for (int inst = 0; inst < 50; ++inst) {
    const int n = rows(rng);
    TaskData task;
    task.X.resize(n, 1);
    task.y.resize(n);
    for (int i = 0; i < n; ++i) {
      task.X(i, 0) = z(rng);
      task.y(i) = i % 2 == 0 ? 1.0 : -1.0;
    }
    const double lambda = std::pow(10.0, log_lambda(rng));
    const StlModel m = fit_stl(task, lambda, StlRegularizer::Lasso, LossKind::LeastSquares, ic);
    const double xy = task.X.col(0).dot(task.y), xx = task.X.col(0).squaredNorm();
    const double closed = std::copysign(std::max(std::abs(xy) - lambda / 2.0, 0.0), xy) / xx;
    lasso_err = std::max(lasso_err, std::abs(m.alpha(0) - closed));
  }

  const std::array<std::pair<int, int>, 4> variants = {{{2, 1}, {1, 2}, {1, 1}, {2, 2}}};
  for (int inst = 0; inst < 40; ++inst) {
    const auto [p, k] = variants[static_cast<std::size_t>(inst % 4)];
    const LossKind loss = (inst / 4) % 2 == 0 ? LossKind::Logistic : LossKind::LeastSquares;
    const int n = rows(rng);
    std::vector<TaskData> tasks(2);
    for (auto& task : tasks) {
      task.X.resize(n, 1);
      task.y.resize(n);
      const double w = z(rng);
      for (int i = 0; i < n; ++i) {
        task.X(i, 0) = z(rng);
        task.y(i) = w * task.X(i, 0) + 0.7 * z(rng) < 0.0 ? -1.0 : 1.0;
      }
      task.y(0) = 1.0;
      task.y(1) = -1.0;
    }
    RegularizerSpec spec;
    spec.p = p;
    spec.k = k;
    spec.gamma1 = std::pow(10.0, log_lambda(rng) - 1.0);
    spec.gamma2 = std::pow(10.0, log_lambda(rng) - 1.0);

    const double c = std::exp(0.5 * z(rng));
    const Eigen::VectorXd cv = Eigen::VectorXd::Constant(1, c);
    const BlockResult rb = solve_beta_step(cv, tasks[0], Eigen::VectorXd::Zero(1), spec, loss, ic);
    const double b_star = grid_argmin(
        [&](double b) {
          const Eigen::VectorXd a = Eigen::VectorXd::Constant(1, c * b);
          return loss_only(loss, a, tasks[0].X, tasks[0].y) + spec.gamma1 * std::pow(std::abs(b), p);
        },
        -20.0, 20.0);
    beta_err = std::max(beta_err, std::abs(rb.x(0) - b_star));

    // Betas fitted at c = 1 give the c-step something to scale.
    Eigen::MatrixXd betas(1, 2);
    for (int t = 0; t < 2; ++t) {
      const double jitter = 1.0 + 0.3 * z(rng);
      betas(0, t) = jitter * solve_beta_step(Eigen::VectorXd::Ones(1), tasks[static_cast<std::size_t>(t)],
                                             Eigen::VectorXd::Zero(1), spec, loss, ic).x(0);
    }
    const BlockResult rc = solve_c_step(betas, tasks, Eigen::VectorXd::Ones(1), spec, loss, ic);
    const double c_star = grid_argmin(
        [&](double cc) {
          double v = spec.gamma2 * std::pow(cc, k);
          for (int t = 0; t < 2; ++t) {
            const Eigen::VectorXd a = Eigen::VectorXd::Constant(1, cc * betas(0, t));
            v += loss_only(loss, a, tasks[static_cast<std::size_t>(t)].X, tasks[static_cast<std::size_t>(t)].y);
          }
          return v;
        },
        0.0, 40.0);
    c_err = std::max(c_err, std::abs(rc.x(0) - c_star));
  }

  const bool pass = ridge_err < 1e-6 && lasso_err < 1e-6 && beta_err < 1e-4 && c_err < 1e-4;
  return {pass, fmt::format("ridge {:.2g}, lasso {:.2g}, beta-step {:.2g}, c-step {:.2g}", ridge_err, lasso_err,
                            beta_err, c_err)};
}

// ---- 5 ---------------------------------------------------------------------

Outcome auc_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<int> size(2, 8), score(0, 4), coin(0, 1);
  int mismatches = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    const int n = size(rng);
    std::vector<double> s(static_cast<std::size_t>(n));
    std::vector<int> l(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      s[static_cast<std::size_t>(i)] = score(rng) * 0.25;
      l[static_cast<std::size_t>(i)] = coin(rng) ? 1 : -1;
    }
    l[0] = 1;
    l[1] = -1;
    std::shuffle(l.begin(), l.end(), rng);
    double wins = 0.0;
    int pairs = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (l[static_cast<std::size_t>(i)] != 1 || l[static_cast<std::size_t>(j)] != -1) continue;
        ++pairs;
        const double a = s[static_cast<std::size_t>(i)], b = s[static_cast<std::size_t>(j)];
        wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
      }
    }
    if (auc(s, l) != wins / pairs) ++mismatches;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 2.0, fmt::format("{} mismatches in 1000 inputs, {:.3f} s", mismatches, secs)};
}

// ---- 6 ---------------------------------------------------------------------

double support_f1(const Eigen::VectorXd& c, const std::vector<int>& truth) {
  const std::set<int> t(truth.begin(), truth.end());
  int tp = 0, fp = 0;
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    if (c(j) > 1e-3) (t.count(static_cast<int>(j)) ? tp : fp)++;
  }
  const int fn = static_cast<int>(t.size()) - tp;
  return tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
}

Outcome support_recovery() {
  const auto t0 = Clock::now();
  int good = 0;
  std::vector<std::string> f1s;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto data = gen_multitask(make_sharing_spec(50, 3, 10, 2, 100, 0.5, seed));
    const EvalData ed = eval_data_from_tasks(data.tasks);
    GridConfig gc;
    gc.seed = seed;
    gc.jobs = default_jobs();
    const GridResult g = grid_search(ed, watched("mmtfl21"), gc);
    const TrainedModel model = train_method(g.best, ed.tasks, ed.feature_names, seed);
    check_model(*model.mmtfl);
    const double f1 = support_f1(model.mmtfl->c, data.truth.c_support);
    if (f1 >= 0.8) ++good;
    f1s.push_back(fmt::format("{:.2f}", f1));
  }
  const double secs = seconds_since(t0);
  std::string joined;
  for (const auto& s : f1s) joined += (joined.empty() ? "" : " ") + s;
  return {good >= 8 && secs < 300.0, fmt::format("F1 >= 0.8 in {}/10 seeds [{}], {:.0f} s", good, joined, secs)};
}

// ---- cohorts -----------------------------------------------------------------

EvalData cohort_eval_data(const CohortConfig& cc, const ExtractionConfig& ec, int* rejected) {
  const Cohort cohort = gen_cohort(cc);
  std::map<std::string, Subject> by_id;
  for (const auto& s : cohort.subjects) by_id[s.id] = s;
  std::vector<std::optional<FeatureVector>> fv(cohort.trials.size());
  parallel_for(fv.size(), default_jobs(), [&](std::size_t i) {
    const Trial& raw = cohort.trials[i].trial;
    try {
      fv[i] = extract_trial_features(normalize_by_weight(raw, by_id.at(raw.subject_id)), ec);
    } catch (const TrialRejected&) {
    }
  });
  std::vector<ExtractedTrial> kept;
  *rejected = 0;
  for (std::size_t i = 0; i < fv.size(); ++i) {
    if (fv[i]) kept.push_back({cohort.trials[i].trial.subject_id, *fv[i]});
    else ++*rejected;
  }
  return eval_data_from_dataset(build_dataset(kept, cohort.subjects), canonical_tasks());
}

GridConfig tuning_grid(std::uint64_t seed) {
  GridConfig gc;
  gc.seed = seed;
  gc.jobs = default_jobs();
  return gc;
}

// ---- 7 ---------------------------------------------------------------------

Outcome mtfl_beats_stl(const ExtractionConfig& ec) {
  const auto t0 = Clock::now();
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CohortConfig cc;
    cc.seed = seed;
    cc.duration_s = 12.0;
    ExtractionConfig e = ec;
    e.gmm.seed = seed;
    int rejected = 0;
    const EvalData data = cohort_eval_data(cc, e, &rejected);
    RandomPartitionConfig rp;
    rp.ratio = 0.16;
    rp.repeats = 10;
    rp.seed = seed;
    rp.jobs = default_jobs();
    rp.importance = false;
    rp.grid = tuning_grid(seed);
    const double mt = random_partition_eval(data, watched("mmtfl21"), rp).all_tasks.mean;
    const double st = random_partition_eval(data, watched("stl_ridge"), rp).all_tasks.mean;
    if (mt >= st) ++wins;
    detail += fmt::format("{}{:.3f}/{:.3f}", detail.empty() ? "" : " ", mt, st);
    std::fprintf(stderr, "  cohort %llu: mmtfl21 %.4f stl_ridge %.4f (%d rejected, %.0f s)\n",
                 static_cast<unsigned long long>(seed), mt, st, rejected, seconds_since(t0));
  }
  const double secs = seconds_since(t0);
  return {wins >= 8 && secs < 600.0,
          fmt::format("MMTFL >= STL in {}/10 cohorts [{}], {:.0f} s", wins, detail, secs)};
}

// ---- 8 ---------------------------------------------------------------------

Outcome loso_pipeline(const ExtractionConfig& ec) {
  const auto t0 = Clock::now();
  CohortConfig cc;
  int rejected = 0;
  const EvalData data = cohort_eval_data(cc, ec, &rejected);
  LosoConfig lc;
  lc.jobs = default_jobs();
  lc.importance = false;
  lc.grid = tuning_grid(0);
  const EvalReport r = leave_one_subject_out_eval(data, watched("mmtfl21"), lc);
  bool pass = true;
  std::string detail;
  for (const auto& t : r.tasks) {
    pass = pass && t.auc.mean >= 0.95;
    detail += fmt::format("{}{} {:.4f}", detail.empty() ? "" : ", ", t.task, t.auc.mean);
  }
  const double secs = seconds_since(t0);
  return {pass && secs < 600.0, fmt::format("{} ({} trials rejected), {:.0f} s", detail, rejected, secs)};
}

// ---- 9 ---------------------------------------------------------------------

Outcome feature_exactness() {
  std::vector<PathologyProfile> profiles;
  const auto models = CohortConfig::default_group_models();
  for (Group g : {Group::H, Group::PD, Group::ST}) {
    for (int v = 0; v < 3; ++v) {
      PathologyProfile p = models.at(g).mean;
      p.cadence_spm += 6.0 * (v - 1);
      p.stance_duty += 0.02 * (v - 1);
      p.lateral_bias += 0.05 * (v - 1);
      p.body_weight = 55.0 + 10.0 * v;
      profiles.push_back(p);
    }
  }
  double ratio_err = 0.0, value_err = 0.0, cadence_err = 0.0;
  int failures = 0;
  for (const auto& p : profiles) {
    const SynthTrial st = gen_gcf_trial(p, 30.0);
    Subject s{"S", Group::H, p.body_weight, std::nullopt};
    const Trial trial = normalize_by_weight(st.trial, s);
    FeatureVector fv;
    try {
      fv = extract_trial_features(trial);
    } catch (const std::exception&) {
      ++failures;
      continue;
    }
    for (Foot foot : {Foot::Left, Foot::Right}) {
      const FootTruth& ft = st.truth.foot[foot == Foot::Left ? 0 : 1];
      ratio_err = std::max(ratio_err, std::abs(fv.get(foot, kStanceRatio) - ft.stance_ratio));
      value_err = std::max({value_err, std::abs(fv.get(foot, kBalanceMaxDiff) - ft.balance_max_diff),
                            std::abs(fv.get(foot, kBalanceMinDiff) - ft.balance_min_diff),
                            std::abs(fv.get(foot, kStrengthHeelMax) - ft.strength_heel_max),
                            std::abs(fv.get(foot, kStrengthToeMax) - ft.strength_toe_max)});
    }
    ratio_err = std::max({ratio_err, std::abs(fv[kDoubleSupportRatio] - st.truth.double_support_ratio),
                          std::abs(fv[kSingleSupportRatio] - st.truth.single_support_ratio)});
    cadence_err = std::max(cadence_err, std::abs(fv[kCadence] - st.truth.nominal_cadence));
  }
  const bool pass = failures == 0 && ratio_err < 1e-6 && value_err < 1e-6 && cadence_err <= 2.0;
  return {pass, fmt::format("{} waveforms, {} rejected; ratios {:.2g}, balance/strength {:.2g}, cadence {:.2f}/min",
                            profiles.size(), failures, ratio_err, value_err, cadence_err)};
}

// ---- 10 --------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return files;
}

int run(const std::string& cmd) {
  return std::system((cmd + " >/dev/null 2>&1").c_str());
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "gaitmtl_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string cli = GAITMTL_CLI_PATH;
  const std::string w = root.string() + "/work";
  const std::vector<std::string> commands = {
      fmt::format("{} synth cohort --groups 2,2,2 --trials 3 --duration 12 --seed 7 --out-dir {}/cohort", cli, w),
      fmt::format("{0} extract --trials {1}/cohort/trials --subjects {1}/cohort/subjects.csv "
                  "--out {1}/feat/features.csv --gmm-restarts 3 --gmm-k-max 5 --seed 7",
                  cli, w),
      fmt::format("{} synth multitask --d 12 --t 3 --shared 3 --private 1 --n 40 --seed 7 --out-dir {}/mt", cli, w),
      fmt::format("{} train --features {}/mt/features.csv --method mmtfl21 --out {}/model/model.json --seed 7", cli, w, w),
      fmt::format("{} grid-search --features {}/mt/features.csv --method stl_ridge --grid-values 0.1,1,10 "
                  "--out {}/grid/model.json --seed 7",
                  cli, w, w),
      fmt::format("{} evaluate --features {}/feat/features.csv --methods mmtfl21,stl_lasso --ratios 0.5 --repeats 3 "
                  "--out-dir {}/eval --seed 7",
                  cli, w, w),
      fmt::format("{} evaluate --features {}/feat/features.csv --methods mmtfl12 --scheme loso --out-dir {}/loso --seed 7",
                  cli, w, w),
      fmt::format("{} report --input {}/eval/report.json --input {}/loso/report.json --out-dir {}/report", cli, w, w, w),
  };
  std::map<std::string, std::string> first;
  for (int pass = 0; pass < 2; ++pass) {
    fs::remove_all(w);
    for (const auto& c : commands) {
      if (const int rc = run(c); rc != 0) return {false, fmt::format("command failed ({}): {}", rc, c)};
    }
    if (pass == 0) first = snapshot(w);
  }
  const auto second = snapshot(w);
  int differing = 0;
  std::string names;
  for (const auto& [name, bytes] : first) {
    const auto it = second.find(name);
    if (it == second.end() || it->second != bytes) {
      ++differing;
      names += " " + name;
    }
  }
  if (second.size() != first.size()) ++differing;
  fs::remove_all(root);
  return {differing == 0 && !first.empty(),
          fmt::format("{} commands, {} output files, {} differ{}", commands.size(), first.size(), differing, names)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const auto want = [&](int n) { return only.empty() || only.count(n) > 0; };

  ExtractionConfig extraction;

  std::map<int, Outcome> results;
  const auto attempt = [&](int n, const std::function<Outcome()>& fn) {
    if (!want(n)) return;
    try {
      results[n] = fn();
    } catch (const std::exception& e) {
      results[n] = {false, std::string("exception: ") + e.what()};
    }
  };
  attempt(1, gradient_oracle);
  attempt(2, objective_monotonicity);
  attempt(4, solver_oracles);
  attempt(5, auc_oracle);
  attempt(6, support_recovery);
  attempt(7, [&] { return mtfl_beats_stl(extraction); });
  attempt(8, [&] { return loso_pipeline(extraction); });
  attempt(9, feature_exactness);
  attempt(10, cli_determinism);
  if (want(3)) {
    const long v = g_factor_violations.load();
    results[3] = {v == 0 && g_fits_checked > 0,
                  fmt::format("{} fitted models and {} iterates checked, {} violations", g_fits_checked.load(),
                              g_iterates_checked.load(), v)};
  }

  bool all = true;
  for (const auto& [n, o] : results) {
    std::cout << fmt::format("criterion {:>2}: {} {}\n", n, o.pass ? "PASS" : "FAIL", o.detail);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
