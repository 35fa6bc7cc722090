// gaitmtl: extraction, training, evaluation and synthetic data from the
// command line. Exit codes: 0 success, 1 runtime or data failure, 2 usage.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "gaitmtl/dataset.hpp"
#include "gaitmtl/errors.hpp"
#include "gaitmtl/eval.hpp"
#include "gaitmtl/features.hpp"
#include "gaitmtl/gcf_data.hpp"
#include "gaitmtl/model_io.hpp"
#include "gaitmtl/parallel.hpp"
#include "gaitmtl/report.hpp"
#include "gaitmtl/synth.hpp"

#ifndef GAITMTL_VERSION
#define GAITMTL_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gaitmtl;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw std::runtime_error(fmt::format("write failed for '{}'", path.string()));
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    std::uint64_t seed, const std::vector<std::string>& outputs) {
  json m = {{"tool", "gaitmtl"},
            {"version", GAITMTL_VERSION},
            {"command", command},
            {"seed", seed},
            {"config", config},
            {"outputs", outputs}};
  write_text(dir / "run.json", dump(m));
}

fs::path dir_of(const std::string& file) {
  const fs::path p(file);
  return p.has_parent_path() ? p.parent_path() : fs::path(".");
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(fmt::format("{}: cannot parse '{}'", what, item));
    }
  }
  if (out.empty()) throw UsageError(fmt::format("{}: empty list", what));
  return out;
}

std::vector<std::string> parse_names(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

MethodSpec method_or_usage(const std::string& name) {
  try {
    return method_from_name(name);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

// ---- extract ---------------------------------------------------------------

struct ExtractOptions {
  std::string trials_dir;
  std::string subjects;
  std::string out;
  double threshold = 0.05;
  double hysteresis = 0.01;
  std::size_t min_cycles = 3;
  int gmm_restarts = GmmConfig{}.restarts;
  int gmm_k_max = GmmConfig{}.k_max;
  std::uint64_t seed = 0;
  int jobs = default_jobs();
};

struct TrialFile {
  fs::path path;
  std::string subject;
  std::string trial;
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int run_extract(const ExtractOptions& o) {
  const auto subjects = load_subjects(o.subjects);
  std::map<std::string, Subject> by_id;
  for (const auto& s : subjects) by_id[s.id] = s;

  std::vector<TrialFile> files;
  for (const auto& entry : fs::directory_iterator(o.trials_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (ends_with(name, ".phases.jsonl")) continue;
    std::string stem;
    if (ends_with(name, ".csv")) stem = name.substr(0, name.size() - 4);
    else if (ends_with(name, ".jsonl")) stem = name.substr(0, name.size() - 6);
    else continue;
    const auto sep = stem.find("__");
    if (sep == std::string::npos || sep == 0 || sep + 2 >= stem.size()) {
      std::cerr << fmt::format("rejected {}: file name is not <subject>__<trial>\n", name);
      continue;
    }
    files.push_back({entry.path(), stem.substr(0, sep), stem.substr(sep + 2)});
  }
  std::sort(files.begin(), files.end(), [](const TrialFile& a, const TrialFile& b) { return a.path < b.path; });

  ExtractionConfig cfg;
  cfg.contact.threshold = o.threshold;
  cfg.contact.hysteresis = o.hysteresis;
  cfg.min_cycles = o.min_cycles;
  cfg.gmm.restarts = o.gmm_restarts;
  cfg.gmm.k_max = o.gmm_k_max;
  cfg.gmm.seed = o.seed;

  std::vector<std::optional<FeatureVector>> features(files.size());
  std::vector<std::string> reasons(files.size());
  parallel_for(files.size(), o.jobs, [&](std::size_t i) {
    const auto& f = files[i];
    try {
      const auto it = by_id.find(f.subject);
      if (it == by_id.end()) throw JoinError(fmt::format("unknown subject '{}'", f.subject));
      TrialParseOptions popts;
      popts.trial_id = f.trial;
      const Trial raw = load_trial(f.path.string(), f.subject, popts);
      const auto issues = validate_trial(raw);
      if (!issues.empty()) throw ValidationError(issues.front().message, issues.front().sample_index + 1);
      const Trial trial = normalize_by_weight(raw, it->second);
      std::optional<PhaseHypothesisSet> phases[2];
      const std::string stem = (f.path.parent_path() / (f.subject + "__" + f.trial)).string();
      for (Foot foot : {Foot::Left, Foot::Right}) {
        const std::string side = std::string(to_string(foot));
        const std::string sidecar = fmt::format("{}.{}.phases.jsonl", stem, side);
        if (fs::exists(sidecar)) phases[foot == Foot::Left ? 0 : 1] = load_hypotheses_jsonl(sidecar, foot, trial.size());
      }
      features[i] = extract_trial_features(trial, cfg, phases[0], phases[1]);
    } catch (const std::exception& e) {
      reasons[i] = e.what();
    }
  });

  std::vector<ExtractedTrial> kept;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (features[i]) kept.push_back({files[i].subject, *features[i]});
    else std::cerr << fmt::format("rejected {}: {}\n", files[i].path.filename().string(), reasons[i]);
  }
  const Dataset ds = build_dataset(kept, subjects);
  std::ostringstream csv;
  write_dataset_csv(csv, ds);
  write_text(o.out, csv.str());
  std::cerr << fmt::format("extracted {} of {} trials\n", kept.size(), files.size());

  const json config = {{"trials", o.trials_dir},   {"subjects", o.subjects},         {"out", o.out},
                       {"threshold", o.threshold}, {"hysteresis", o.hysteresis},     {"min_cycles", o.min_cycles},
                       {"gmm_restarts", o.gmm_restarts}, {"gmm_k_max", o.gmm_k_max}, {"jobs", o.jobs}};
  write_manifest(dir_of(o.out), "extract", config, o.seed, {fs::path(o.out).filename().string()});
  return 0;
}

// ---- shared input handling -----------------------------------------------

EvalData load_eval_data(const std::string& path) {
  if (detect_table_kind(path) == TableKind::Dataset) {
    return eval_data_from_dataset(load_dataset(path), canonical_tasks());
  }
  std::ifstream in(path);
  auto table = read_multitask_csv(in);
  return eval_data_from_tasks(std::move(table.tasks), std::move(table.feature_names));
}

struct MethodOptions {
  std::string loss;
  std::optional<double> gamma1;
  std::optional<double> gamma2;
  std::optional<double> lambda;
  bool grid = false;
  std::string grid_values;
  int folds = 3;
  int max_iterations = OuterConfig{}.max_iterations;
};

MethodSpec configure(MethodSpec m, const MethodOptions& o) {
  if (!o.loss.empty()) {
    try {
      m.loss = parse_loss_kind(o.loss);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
  if (m.kind == MethodKind::Mmtfl) {
    if (o.lambda) throw UsageError(fmt::format("--lambda does not apply to {}", m.name));
    if (o.gamma1) m.reg.gamma1 = *o.gamma1;
    if (o.gamma2) m.reg.gamma2 = *o.gamma2;
  } else {
    if (o.gamma1 || o.gamma2) throw UsageError(fmt::format("--gamma1/--gamma2 do not apply to {}", m.name));
    if (o.lambda) m.lambda = *o.lambda;
  }
  if (o.grid && (o.gamma1 || o.gamma2 || o.lambda)) {
    throw UsageError("--grid chooses the hyperparameters; drop --gamma1/--gamma2/--lambda");
  }
  m.solver.max_iterations = o.max_iterations;
  return m;
}

GridConfig grid_config(const MethodOptions& o, std::uint64_t seed, int jobs) {
  GridConfig g;
  if (!o.grid_values.empty()) g.values = parse_list(o.grid_values, "--grid-values");
  g.folds = o.folds;
  g.seed = seed;
  g.jobs = jobs;
  return g;
}

json grid_json(const GridResult& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    json cell = {{"score", c.score}, {"ok", c.ok}};
    if (r.best.kind == MethodKind::Mmtfl) {
      cell["gamma1"] = c.gamma1;
      cell["gamma2"] = c.gamma2;
    } else {
      cell["lambda"] = c.lambda;
    }
    if (!c.ok) cell["message"] = c.message;
    cells.push_back(cell);
  }
  json best = r.best.kind == MethodKind::Mmtfl ? json{{"gamma1", r.best.reg.gamma1}, {"gamma2", r.best.reg.gamma2}}
                                               : json{{"lambda", r.best.lambda}};
  return {{"best", best}, {"best_score", r.best_score}, {"cells", cells}};
}

json method_config(const MethodOptions& o) {
  json j = {{"loss", o.loss}, {"grid", o.grid}, {"grid_values", o.grid_values}, {"folds", o.folds},
            {"max_iterations", o.max_iterations}};
  j["gamma1"] = o.gamma1 ? json(*o.gamma1) : json(nullptr);
  j["gamma2"] = o.gamma2 ? json(*o.gamma2) : json(nullptr);
  j["lambda"] = o.lambda ? json(*o.lambda) : json(nullptr);
  return j;
}

// ---- train -----------------------------------------------------------------

struct TrainOptions {
  std::string features;
  std::string method = "mmtfl21";
  MethodOptions m;
  std::string out;
  std::uint64_t seed = 0;
  int jobs = default_jobs();
};

int run_train(const TrainOptions& o, const std::string& command) {
  MethodSpec method = configure(method_or_usage(o.method), o.m);
  const EvalData data = load_eval_data(o.features);
  std::optional<GridResult> grid;
  if (o.m.grid) {
    grid = grid_search(data, method, grid_config(o.m, o.seed, o.jobs));
    method = grid->best;
  }
  const TrainedModel model = train_method(method, data.tasks, data.feature_names, o.seed);
  json j = to_json(model);
  if (grid) j["grid_search"] = grid_json(*grid);
  for (const auto& w : model.mmtfl ? model.mmtfl->warnings : std::vector<std::string>{}) {
    std::cerr << "warning: " << w << '\n';
  }
  std::ostringstream out;
  write_model(out, j);
  write_text(o.out, out.str());

  json config = method_config(o.m);
  config.update({{"features", o.features}, {"method", o.method}, {"out", o.out}, {"jobs", o.jobs}});
  write_manifest(dir_of(o.out), command, config, o.seed, {fs::path(o.out).filename().string()});
  return 0;
}

// ---- evaluate --------------------------------------------------------------

struct EvaluateOptions {
  std::string features;
  std::string methods = "mmtfl21";
  MethodOptions m;
  std::string scheme = "random";
  std::string ratios;
  int repeats = 10;
  std::string out_dir;
  std::uint64_t seed = 0;
  int jobs = default_jobs();
};

void write_report_files(const fs::path& dir, const std::vector<EvalReport>& reports,
                        std::vector<std::string>& outputs) {
  json all = json::array();
  for (const auto& r : reports) all.push_back(to_json(r));
  write_text(dir / "report.json", dump(all));
  write_text(dir / "report.md", render_markdown(reports));
  write_text(dir / "auc.svg", render_auc_svg(reports));
  outputs.insert(outputs.end(), {"report.json", "report.md", "auc.svg"});
  std::vector<std::string> done;
  for (const auto& r : reports) {
    if (r.importance.columns.empty() || std::find(done.begin(), done.end(), r.method) != done.end()) continue;
    done.push_back(r.method);
    std::ostringstream csv;
    write_importance_csv(csv, r.importance);
    write_text(dir / fmt::format("importance_{}.csv", r.method), csv.str());
    write_text(dir / fmt::format("importance_{}.svg", r.method), render_importance_svg(r.importance));
    outputs.push_back(fmt::format("importance_{}.csv", r.method));
    outputs.push_back(fmt::format("importance_{}.svg", r.method));
  }
}

int run_evaluate(const EvaluateOptions& o) {
  const bool loso = o.scheme == "loso";
  if (!loso && o.scheme != "random") throw UsageError(fmt::format("unknown scheme '{}' (random|loso)", o.scheme));
  if (loso && !o.ratios.empty()) throw UsageError("--ratios only applies to --scheme random");
  const std::vector<double> ratios =
      loso ? std::vector<double>{} : (o.ratios.empty() ? std::vector<double>{0.16} : parse_list(o.ratios, "--ratios"));
  if (o.repeats < 1) throw UsageError("--repeats must be positive");
  std::vector<MethodSpec> methods;
  for (const auto& name : parse_names(o.methods)) methods.push_back(configure(method_or_usage(name), o.m));
  if (methods.empty()) throw UsageError("--methods is empty");

  const EvalData data = load_eval_data(o.features);
  std::vector<EvalReport> reports;
  std::optional<GridConfig> grid;
  if (o.m.grid) grid = grid_config(o.m, o.seed, o.jobs);
  for (const MethodSpec& method : methods) {
    if (loso) {
      LosoConfig cfg;
      cfg.seed = o.seed;
      cfg.jobs = o.jobs;
      cfg.grid = grid;
      reports.push_back(leave_one_subject_out_eval(data, method, cfg));
    } else {
      for (double ratio : ratios) {
        RandomPartitionConfig cfg;
        cfg.ratio = ratio;
        cfg.repeats = o.repeats;
        cfg.seed = o.seed;
        cfg.jobs = o.jobs;
        cfg.importance = ratio == ratios.front();
        cfg.grid = grid;
        reports.push_back(random_partition_eval(data, method, cfg));
      }
    }
  }
  for (const auto& r : reports)
    for (const auto& n : r.notices) std::cerr << "notice: " << n << '\n';

  const fs::path dir(o.out_dir);
  std::vector<std::string> outputs;
  write_report_files(dir, reports, outputs);
  json config = method_config(o.m);
  config.update({{"features", o.features},
                 {"methods", o.methods},
                 {"scheme", o.scheme},
                 {"ratios", ratios},
                 {"repeats", o.repeats},
                 {"out_dir", o.out_dir},
                 {"jobs", o.jobs}});
  write_manifest(dir, "evaluate", config, o.seed, outputs);
  return 0;
}

// ---- synth -----------------------------------------------------------------

struct CohortOptions {
  std::string groups = "5,3,3";
  int trials = 16;
  double duration = 20.0;
  double rate = kDefaultSamplingRate;
  double noise = 0.01;
  std::string out_dir;
  std::uint64_t seed = 0;
};

json profile_json(const PathologyProfile& p) {
  return {{"kind", std::string(to_string(p.kind))},
          {"cadence_spm", p.cadence_spm},
          {"stance_duty", p.stance_duty},
          {"heel_strike_amplitude", p.heel_strike_amplitude},
          {"unaffected_heel_amplitude", p.unaffected_heel_amplitude},
          {"toe_off_amplitude", p.toe_off_amplitude},
          {"midstance_amplitude", p.midstance_amplitude},
          {"lateral_bias", p.lateral_bias},
          {"jitter_sd", p.jitter_sd},
          {"body_weight", p.body_weight}};
}

json truth_json(const GcfTruth& t) {
  json feet = json::array();
  for (const auto& f : t.foot) {
    feet.push_back({{"stance_ratio", f.stance_ratio},
                    {"balance_max_diff", f.balance_max_diff},
                    {"balance_min_diff", f.balance_min_diff},
                    {"strength_heel_max", f.strength_heel_max},
                    {"strength_toe_max", f.strength_toe_max},
                    {"stance_onsets", f.stance_onsets}});
  }
  return {{"left", feet[0]},
          {"right", feet[1]},
          {"cadence", t.cadence},
          {"nominal_cadence", t.nominal_cadence},
          {"double_support_ratio", t.double_support_ratio},
          {"single_support_ratio", t.single_support_ratio}};
}

int run_synth_cohort(const CohortOptions& o) {
  const auto counts = parse_list(o.groups, "--groups");
  if (counts.size() != 3) throw UsageError("--groups takes three counts: PD,ST,H");
  CohortConfig cfg;
  for (std::size_t g = 0; g < 3; ++g) {
    if (counts[g] != static_cast<int>(counts[g])) throw UsageError("--groups counts must be integers");
    cfg.n_per_group[g] = static_cast<int>(counts[g]);
  }
  cfg.trials_per_subject = o.trials;
  cfg.duration_s = o.duration;
  cfg.sampling_rate = o.rate;
  cfg.noise_sd = o.noise;
  cfg.seed = o.seed;
  const Cohort cohort = gen_cohort(cfg);

  const fs::path dir(o.out_dir);
  std::vector<std::string> outputs;
  std::ostringstream subj;
  write_subjects_csv(subj, cohort.subjects);
  write_text(dir / "subjects.csv", subj.str());
  outputs.emplace_back("subjects.csv");
  json truth = {{"subjects", json::array()}, {"trials", json::array()}};
  for (std::size_t s = 0; s < cohort.subjects.size(); ++s) {
    truth["subjects"].push_back({{"id", cohort.subjects[s].id}, {"profile", profile_json(cohort.subject_profiles[s])}});
  }
  for (const auto& st : cohort.trials) {
    const std::string name = fmt::format("{}__{}.csv", st.trial.subject_id, st.trial.trial_id);
    std::ostringstream csv;
    write_trial_csv(csv, st.trial);
    write_text(dir / "trials" / name, csv.str());
    outputs.push_back("trials/" + name);
    truth["trials"].push_back({{"file", "trials/" + name}, {"truth", truth_json(st.truth)}});
  }
  write_text(dir / "truth.json", dump(truth));
  outputs.emplace_back("truth.json");
  const json config = {{"kind", "cohort"}, {"groups", o.groups},   {"trials", o.trials},   {"duration", o.duration},
                       {"rate", o.rate},   {"noise", o.noise},     {"out_dir", o.out_dir}};
  write_manifest(dir, "synth", config, o.seed, outputs);
  return 0;
}

struct MultitaskOptions {
  int d = 50;
  int t = 3;
  int shared = 10;
  int priv = 2;
  int n = 100;
  double noise = 0.5;
  std::string out_dir;
  std::uint64_t seed = 0;
};

int run_synth_multitask(const MultitaskOptions& o) {
  const auto spec = make_sharing_spec(o.d, o.t, o.shared, o.priv, o.n, o.noise, o.seed);
  const auto data = gen_multitask(spec);
  MultitaskTable table;
  table.tasks = data.tasks;
  for (int j = 0; j < o.d; ++j) table.feature_names.push_back(fmt::format("f{}", j));
  const fs::path dir(o.out_dir);
  std::ostringstream csv;
  write_multitask_csv(csv, table);
  write_text(dir / "features.csv", csv.str());

  const auto& tr = data.truth;
  json betas = json::array();
  json alphas = json::array();
  for (Eigen::Index t = 0; t < tr.betas.cols(); ++t) {
    betas.push_back(std::vector<double>(tr.betas.col(t).data(), tr.betas.col(t).data() + tr.betas.rows()));
    alphas.push_back(std::vector<double>(tr.alphas.col(t).data(), tr.alphas.col(t).data() + tr.alphas.rows()));
  }
  const json truth = {{"c", std::vector<double>(tr.c.data(), tr.c.data() + tr.c.size())},
                      {"betas", betas},
                      {"alphas", alphas},
                      {"shared_support", tr.shared_support},
                      {"private_supports", tr.private_supports},
                      {"c_support", tr.c_support}};
  write_text(dir / "truth.json", dump(truth));
  const json config = {{"kind", "multitask"}, {"d", o.d}, {"t", o.t},         {"shared", o.shared},
                       {"private", o.priv},   {"n", o.n}, {"noise", o.noise}, {"out_dir", o.out_dir}};
  write_manifest(dir, "synth", config, o.seed, {"features.csv", "truth.json"});
  return 0;
}

// ---- report ----------------------------------------------------------------

struct ReportOptions {
  std::vector<std::string> inputs;
  std::string out_dir;
};

int run_report(const ReportOptions& o) {
  std::vector<EvalReport> reports;
  for (const auto& path : o.inputs) {
    const json j = load_json(path);
    if (j.is_array()) {
      for (const auto& r : j) reports.push_back(eval_report_from_json(r));
    } else {
      reports.push_back(eval_report_from_json(j));
    }
  }
  std::vector<std::string> outputs;
  write_report_files(o.out_dir, reports, outputs);
  write_manifest(o.out_dir, "report", {{"inputs", o.inputs}, {"out_dir", o.out_dir}}, 0, outputs);
  return 0;
}

void add_method_options(CLI::App* cmd, MethodOptions& m, const char* grid_help) {
  cmd->add_option("--loss", m.loss, "logistic or least_squares (default depends on method)");
  cmd->add_option("--gamma1", m.gamma1, "MMTFL penalty on beta");
  cmd->add_option("--gamma2", m.gamma2, "MMTFL penalty on c");
  cmd->add_option("--lambda", m.lambda, "STL penalty");
  if (grid_help) cmd->add_flag("--grid", m.grid, grid_help);
  cmd->add_option("--grid-values", m.grid_values, "comma list (default 1e-3,...,1e3)");
  cmd->add_option("--folds", m.folds, "grid-search folds")->check(CLI::Range(2, 100));
  cmd->add_option("--max-iterations", m.max_iterations, "outer solver iterations")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gait-disorder classification with multiplicative multi-task feature learning"};
  app.set_version_flag("--version", GAITMTL_VERSION);
  app.require_subcommand(1);

  ExtractOptions ex;
  auto* extract = app.add_subcommand("extract", "trial directory + subjects -> feature CSV");
  extract->add_option("--trials", ex.trials_dir, "directory of <subject>__<trial>.csv|.jsonl")->required()->check(CLI::ExistingDirectory);
  extract->add_option("--subjects", ex.subjects, "subjects CSV")->required()->check(CLI::ExistingFile);
  extract->add_option("--out", ex.out, "feature CSV to write")->required();
  extract->add_option("--threshold", ex.threshold, "contact threshold (fraction of body weight)");
  extract->add_option("--hysteresis", ex.hysteresis, "contact hysteresis");
  extract->add_option("--min-cycles", ex.min_cycles, "complete cycles required per foot");
  extract->add_option("--gmm-restarts", ex.gmm_restarts, "mixture restarts per K")->check(CLI::PositiveNumber);
  extract->add_option("--gmm-k-max", ex.gmm_k_max, "largest mixture size")->check(CLI::Range(2, 64));
  extract->add_option("--seed", ex.seed);
  extract->add_option("--jobs", ex.jobs)->check(CLI::PositiveNumber);

  TrainOptions tr;
  auto* train = app.add_subcommand("train", "fit the three canonical tasks and write a model");
  auto* grid_cmd = app.add_subcommand("grid-search", "train with --grid");
  TrainOptions gs;
  gs.m.grid = true;
  for (auto [cmd, opts] : {std::pair{train, &tr}, std::pair{grid_cmd, &gs}}) {
    cmd->add_option("--features", opts->features, "dataset or multitask CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--method", opts->method, "mmtfl21|mmtfl12|mmtfl11|mmtfl22|stl_ridge|stl_lasso");
    cmd->add_option("--out", opts->out, "model JSON to write")->required();
    cmd->add_option("--seed", opts->seed);
    cmd->add_option("--jobs", opts->jobs)->check(CLI::PositiveNumber);
    add_method_options(cmd, opts->m, cmd == train ? "choose hyperparameters by grid search first" : nullptr);
  }

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "random-partition or leave-one-subject-out evaluation");
  evaluate->add_option("--features", ev.features, "dataset or multitask CSV")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--methods,--method", ev.methods, "comma list of methods");
  evaluate->add_option("--scheme", ev.scheme, "random or loso");
  evaluate->add_option("--ratios", ev.ratios, "training ratios, comma list (default 0.16)");
  evaluate->add_option("--repeats", ev.repeats, "random partitions per ratio");
  evaluate->add_option("--out-dir", ev.out_dir)->required();
  evaluate->add_option("--seed", ev.seed);
  evaluate->add_option("--jobs", ev.jobs)->check(CLI::PositiveNumber);
  add_method_options(evaluate, ev.m, "tune on training rows only: once per ratio, or per LOSO round");

  auto* synth = app.add_subcommand("synth", "generate synthetic data");
  synth->require_subcommand(1);
  CohortOptions co;
  auto* cohort = synth->add_subcommand("cohort", "GCF trials + subjects CSV");
  cohort->add_option("--groups", co.groups, "subjects per group PD,ST,H");
  cohort->add_option("--trials", co.trials, "trials per subject")->check(CLI::PositiveNumber);
  cohort->add_option("--duration", co.duration, "seconds per trial");
  cohort->add_option("--rate", co.rate, "sampling rate in Hz");
  cohort->add_option("--noise", co.noise, "per-channel noise sd");
  cohort->add_option("--out-dir", co.out_dir)->required();
  cohort->add_option("--seed", co.seed);
  MultitaskOptions mt;
  auto* multitask = synth->add_subcommand("multitask", "feature matrices with planted supports");
  multitask->add_option("--d", mt.d, "features");
  multitask->add_option("--t", mt.t, "tasks");
  multitask->add_option("--shared", mt.shared, "shared support size");
  multitask->add_option("--private", mt.priv, "private support size per task");
  multitask->add_option("--n", mt.n, "rows per task");
  multitask->add_option("--noise", mt.noise, "label noise sd");
  multitask->add_option("--out-dir", mt.out_dir)->required();
  multitask->add_option("--seed", mt.seed);

  ReportOptions rp;
  auto* report = app.add_subcommand("report", "re-render report.json files");
  report->add_option("--input", rp.inputs, "report JSON (repeatable)")->required()->check(CLI::ExistingFile);
  report->add_option("--out-dir", rp.out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*extract) return run_extract(ex);
    if (*train) return run_train(tr, "train");
    if (*grid_cmd) return run_train(gs, "grid-search");
    if (*evaluate) return run_evaluate(ev);
    if (*cohort) return run_synth_cohort(co);
    if (*multitask) return run_synth_multitask(mt);
    if (*report) return run_report(rp);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
