#include "gaitmtl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <fmt/format.h>

#include "gaitmtl/errors.hpp"

namespace gaitmtl {

namespace {

std::mt19937_64 rng_for(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

void check_support(const std::vector<int>& s, int d, const char* what) {
  for (int j : s) {
    if (j < 0 || j >= d) throw DomainError(fmt::format("{} index {} outside [0, {})", what, j, d));
  }
}

// Unit-height triangle centred on `centre` with half-width `width`.
double tri(std::size_t j, std::size_t centre, double width) {
  const double dist = std::abs(static_cast<double>(j) - static_cast<double>(centre));
  return std::max(0.0, 1.0 - dist / width);
}

std::size_t overlap(std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1) {
  const std::size_t lo = std::max(a0, b0);
  const std::size_t hi = std::min(a1, b1);
  return hi > lo ? hi - lo : 0;
}

}  // namespace

SharingSpec make_sharing_spec(int d, int T, int n_shared, int n_private, int n_per_task,
                              double noise_sd, std::uint64_t seed) {
  if (n_shared < 0 || n_private < 0 || n_shared + T * n_private > d) {
    throw DomainError(fmt::format("{} shared + {}x{} private features do not fit in d = {}", n_shared,
                                  T, n_private, d));
  }
  SharingSpec s;
  s.d = d;
  s.T = T;
  for (int j = 0; j < n_shared; ++j) s.shared_support.push_back(j);
  for (int t = 0; t < T; ++t) {
    std::vector<int> p;
    for (int j = 0; j < n_private; ++j) p.push_back(n_shared + t * n_private + j);
    s.private_supports.push_back(std::move(p));
  }
  s.noise_sd = noise_sd;
  s.n_per_task = n_per_task;
  s.seed = seed;
  return s;
}

MultitaskData gen_multitask(const SharingSpec& spec) {
  if (spec.d < 1 || spec.T < 1 || spec.n_per_task < 1) throw DomainError("d, T and n must be >= 1");
  if (!(spec.noise_sd >= 0.0)) throw DomainError("noise_sd must be >= 0");
  if (static_cast<int>(spec.private_supports.size()) != spec.T) {
    throw DomainError("need one private support per task");
  }
  check_support(spec.shared_support, spec.d, "shared support");
  std::set<int> uni(spec.shared_support.begin(), spec.shared_support.end());
  for (const auto& p : spec.private_supports) {
    check_support(p, spec.d, "private support");
    uni.insert(p.begin(), p.end());
  }
  if (uni.empty()) throw DomainError("union of supports is empty");

  auto rng = rng_for(spec.seed, 0x6d74);
  std::uniform_real_distribution<double> mag(0.5, 1.5);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);

  MultitaskData out;
  SharingTruth& truth = out.truth;
  truth.shared_support = spec.shared_support;
  truth.private_supports = spec.private_supports;
  truth.c_support.assign(uni.begin(), uni.end());
  truth.c = Eigen::VectorXd::Zero(spec.d);
  for (int j : truth.c_support) truth.c(j) = mag(rng);
  truth.betas = Eigen::MatrixXd::Zero(spec.d, spec.T);
  for (int t = 0; t < spec.T; ++t) {
    std::set<int> s(spec.shared_support.begin(), spec.shared_support.end());
    s.insert(spec.private_supports[static_cast<std::size_t>(t)].begin(),
             spec.private_supports[static_cast<std::size_t>(t)].end());
    for (int j : s) truth.betas(j, t) = (coin(rng) ? 1.0 : -1.0) * mag(rng);
  }
  truth.alphas = truth.c.asDiagonal() * truth.betas;

  for (int t = 0; t < spec.T; ++t) {
    TaskData task;
    task.name = fmt::format("task{}", t);
    task.X.resize(spec.n_per_task, spec.d);
    for (Eigen::Index i = 0; i < task.X.rows(); ++i)
      for (Eigen::Index j = 0; j < task.X.cols(); ++j) task.X(i, j) = normal(rng);
    const Eigen::VectorXd score = task.X * truth.alphas.col(t);
    task.y.resize(spec.n_per_task);
    for (Eigen::Index i = 0; i < score.size(); ++i) {
      const double noisy = score(i) + (spec.noise_sd > 0.0 ? spec.noise_sd * normal(rng) : 0.0);
      task.y(i) = noisy >= 0.0 ? 1.0 : -1.0;
    }
    for (int i = 0; i < spec.n_per_task; ++i) task.ids.push_back(static_cast<std::size_t>(i));
    out.tasks.push_back(std::move(task));
  }
  return out;
}

std::string_view to_string(PathologyKind k) {
  switch (k) {
    case PathologyKind::Healthy: return "healthy";
    case PathologyKind::Parkinsonian: return "parkinsonian";
    case PathologyKind::Hemiplegic: return "hemiplegic";
  }
  return "?";
}

void check_profile(const PathologyProfile& p) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw DomainError(msg);
  };
  need(p.cadence_spm >= 20.0 && p.cadence_spm <= 200.0, fmt::format("cadence {} outside [20, 200]", p.cadence_spm));
  need(p.stance_duty > 0.0 && p.stance_duty < 1.0, "stance duty must lie in (0, 1)");
  need(std::abs(p.lateral_bias) <= 1.0, "lateral bias must lie in [-1, 1]");
  need(p.jitter_sd >= 0.0 && p.jitter_sd <= 0.2, "jitter sd must lie in [0, 0.2]");
  need(p.body_weight > 0.0 && std::isfinite(p.body_weight), "body weight must be positive");
  constexpr double kFloor = 0.1;
  for (double a : {p.heel_strike_amplitude, p.toe_off_amplitude, p.unaffected_heel_amplitude}) {
    need(a >= 0.0 && a <= 2.0, fmt::format("amplitude {} outside [0, 2]", a));
  }
  need(p.midstance_amplitude >= 0.0 && kFloor + p.midstance_amplitude <= 2.0,
       "mid-stance amplitude outside [0, 1.9]");
}

SynthTrial gen_gcf_trial(const PathologyProfile& profile, double duration_s, double sampling_rate) {
  check_profile(profile);
  if (!(duration_s >= 10.0)) throw DomainError("synthetic trials must last at least 10 s");
  if (!(sampling_rate > 0.0) || !std::isfinite(sampling_rate)) throw DomainError("sampling rate must be positive");

  const auto n = static_cast<std::size_t>(std::lround(duration_s * sampling_rate));
  const auto step = static_cast<std::size_t>(std::lround(60.0 * sampling_rate / profile.cadence_spm));
  const std::size_t stride = 2 * step;
  const auto stance = static_cast<std::size_t>(std::lround(profile.stance_duty * static_cast<double>(stride)));
  if (step < 2 || stance < 2 || stance >= stride) {
    throw DomainError(fmt::format("cadence {} and duty {} leave no room for stance and swing at {} Hz",
                                  profile.cadence_spm, profile.stance_duty, sampling_rate));
  }

  constexpr double kFloor = 0.1;
  constexpr double kToeDrag = 0.02;
  const bool hemi = profile.kind == PathologyKind::Hemiplegic;
  const std::size_t half = (stance + 1) / 2;
  const std::size_t heel_at = (half - 1) / 2;
  const std::size_t toe_at = stance - 1 - heel_at;
  const std::size_t mid_at = (stance - 1) / 2;
  const double width = static_cast<double>(half);
  const double share12 = (1.0 - profile.lateral_bias) / 2.0;
  const double share45 = (1.0 + profile.lateral_bias) / 2.0;

  SynthTrial out;
  Trial& trial = out.trial;
  trial.sampling_rate = sampling_rate;
  trial.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) trial.samples[i].t = static_cast<double>(i) / sampling_rate;

  auto rng = rng_for(profile.seed, 0x67636631);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto jitter = [&](double v) {
    if (profile.jitter_sd == 0.0 || v == 0.0) return v;
    return std::max(0.0, v + profile.jitter_sd * noise(rng));
  };

  GcfTruth& truth = out.truth;
  truth.step_samples = step;
  truth.nominal_cadence = 60.0 * sampling_rate / static_cast<double>(step);
  for (Foot foot : {Foot::Left, Foot::Right}) {
    const bool right = foot == Foot::Right;
    FootTruth& ft = truth.foot[right ? 1 : 0];
    const double heel = hemi && right ? profile.unaffected_heel_amplitude : profile.heel_strike_amplitude;
    ft.stance_samples = stance;
    for (std::size_t on = right ? step : 0; on < n; on += stride) ft.stance_onsets.push_back(on);

    // Stance load, then swing (only the affected foot drags its toe).
    std::vector<FootForces> shape(stride, FootForces{});
    for (std::size_t j = 0; j < stance; ++j) {
      const double m = profile.midstance_amplitude * tri(j, mid_at, width);
      shape[j][kHeel] = heel * tri(j, heel_at, width);
      shape[j][kToe] = profile.toe_off_amplitude * tri(j, toe_at, width);
      shape[j][kMeta12] = kFloor + share12 * m;
      shape[j][kMeta45] = kFloor + share45 * m;
    }
    if (hemi && !right) {
      const std::size_t swing = stride - stance;
      for (std::size_t j = stance + swing / 4; j < stance + std::max<std::size_t>(1, 3 * swing / 4); ++j) {
        shape[j][kToe] = kToeDrag;
      }
    }
    for (std::size_t on : ft.stance_onsets) {
      for (std::size_t j = 0; j < stride && on + j < n; ++j) {
        auto& dst = trial.samples[on + j].foot(foot);
        for (std::size_t ch = 0; ch < kChannelsPerFoot; ++ch) dst[ch] = jitter(shape[j][ch]) * profile.body_weight;
      }
    }

    ft.stance_ratio = static_cast<double>(stance) / static_cast<double>(stride);
    const double bump = -profile.lateral_bias * profile.midstance_amplitude;
    ft.balance_max_diff = std::max(0.0, bump);
    ft.balance_min_diff = std::min(0.0, bump);
    ft.strength_heel_max = heel;
    ft.strength_toe_max = profile.toe_off_amplitude;
  }

  // Support ratios by interval arithmetic over every complete cycle.
  const auto minutes = static_cast<double>(n) / sampling_rate / 60.0;
  truth.cadence = static_cast<double>(truth.foot[0].stance_onsets.size() + truth.foot[1].stance_onsets.size()) / minutes;
  double dbl = 0.0;
  double sgl = 0.0;
  std::size_t cycles = 0;
  for (int f = 0; f < 2; ++f) {
    const auto& own = truth.foot[f].stance_onsets;
    const auto& other = truth.foot[1 - f].stance_onsets;
    for (std::size_t k = 0; k + 1 < own.size(); ++k) {
      const std::size_t c0 = own[k];
      const std::size_t c1 = own[k + 1];
      const std::size_t own_len = std::min(stance, c1 - c0);
      std::size_t other_len = 0;
      std::size_t both = 0;
      for (std::size_t o : other) {
        const std::size_t o1 = std::min(o + stance, n);
        other_len += overlap(c0, c1, o, o1);
        both += overlap(c0, c0 + own_len, o, o1);
      }
      const auto len = static_cast<double>(c1 - c0);
      dbl += static_cast<double>(both) / len;
      sgl += static_cast<double>(own_len + other_len - 2 * both) / len;
      ++cycles;
    }
  }
  if (cycles > 0) {
    truth.double_support_ratio = dbl / static_cast<double>(cycles);
    truth.single_support_ratio = sgl / static_cast<double>(cycles);
  }
  return out;
}

std::map<Group, GroupModel> CohortConfig::default_group_models() {
  std::map<Group, GroupModel> g;
  PathologyProfile h;
  h.kind = PathologyKind::Healthy;
  h.cadence_spm = 110.0;
  h.stance_duty = 0.60;
  h.heel_strike_amplitude = 1.2;
  h.lateral_bias = -0.10;
  h.toe_off_amplitude = 0.9;
  h.midstance_amplitude = 0.6;
  g[Group::H] = {h, 4.0, 0.015, 0.08, 0.04, 0.06};

  PathologyProfile pd = h;
  pd.kind = PathologyKind::Parkinsonian;
  pd.cadence_spm = 95.0;
  pd.stance_duty = 0.65;
  pd.heel_strike_amplitude = 0.7;
  pd.lateral_bias = 0.15;
  pd.toe_off_amplitude = 0.6;
  g[Group::PD] = {pd, 4.0, 0.015, 0.08, 0.04, 0.06};

  PathologyProfile st = h;
  st.kind = PathologyKind::Hemiplegic;
  st.cadence_spm = 70.0;
  st.stance_duty = 0.70;
  st.heel_strike_amplitude = 0.0;
  st.lateral_bias = 0.25;
  st.toe_off_amplitude = 0.5;
  st.unaffected_heel_amplitude = 0.8;
  g[Group::ST] = {st, 4.0, 0.015, 0.0, 0.04, 0.06};
  return g;
}

namespace {

PathologyProfile perturb(const PathologyProfile& base, const GroupModel& spread, double scale,
                         std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  PathologyProfile p = base;
  p.cadence_spm = std::clamp(base.cadence_spm + scale * spread.cadence_sd * z(rng), 40.0, 160.0);
  p.stance_duty = std::clamp(base.stance_duty + scale * spread.duty_sd * z(rng), 0.5, 0.85);
  p.heel_strike_amplitude = std::clamp(base.heel_strike_amplitude + scale * spread.heel_sd * z(rng), 0.0, 2.0);
  p.lateral_bias = std::clamp(base.lateral_bias + scale * spread.bias_sd * z(rng), -0.9, 0.9);
  p.toe_off_amplitude = std::clamp(base.toe_off_amplitude + scale * spread.toe_sd * z(rng), 0.1, 2.0);
  return p;
}

}  // namespace

Cohort gen_cohort(const CohortConfig& cfg) {
  constexpr std::array<Group, 3> kOrder = {Group::PD, Group::ST, Group::H};
  for (std::size_t g = 0; g < kOrder.size(); ++g) {
    if (cfg.n_per_group[g] < 2) {
      throw DomainError(fmt::format("group {} needs at least 2 subjects", to_string(kOrder[g])));
    }
    if (!cfg.groups.count(kOrder[g])) throw DomainError(fmt::format("no model for group {}", to_string(kOrder[g])));
  }
  if (cfg.trials_per_subject < 1) throw DomainError("trials_per_subject must be >= 1");

  Cohort cohort;
  std::uint64_t subject_no = 0;
  for (std::size_t g = 0; g < kOrder.size(); ++g) {
    const GroupModel& model = cfg.groups.at(kOrder[g]);
    for (int s = 0; s < cfg.n_per_group[g]; ++s, ++subject_no) {
      auto rng = rng_for(cfg.seed, subject_no + 1, 0);
      std::normal_distribution<double> z(0.0, 1.0);
      Subject subj;
      subj.id = fmt::format("{}{:02d}", to_string(kOrder[g]), s + 1);
      subj.group = kOrder[g];
      subj.body_weight = std::round(std::clamp(70.0 + 10.0 * z(rng), 45.0, 110.0) * 10.0) / 10.0;
      PathologyProfile profile = perturb(model.mean, model, 1.0, rng);
      profile.body_weight = subj.body_weight;
      profile.jitter_sd = cfg.noise_sd;
      cohort.subjects.push_back(subj);
      cohort.subject_profiles.push_back(profile);

      for (int t = 0; t < cfg.trials_per_subject; ++t) {
        auto trial_rng = rng_for(cfg.seed, subject_no + 1, static_cast<std::uint64_t>(t) + 1);
        PathologyProfile tp = perturb(profile, model, cfg.trial_spread, trial_rng);
        tp.seed = trial_rng();
        SynthTrial st = gen_gcf_trial(tp, cfg.duration_s, cfg.sampling_rate);
        st.trial.subject_id = subj.id;
        st.trial.trial_id = fmt::format("t{:02d}", t + 1);
        cohort.trials.push_back(std::move(st));
      }
    }
  }
  return cohort;
}

}  // namespace gaitmtl
