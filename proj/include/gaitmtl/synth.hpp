#pragma once

// Synthetic data with recorded ground truth: multi-task feature matrices
// with a planted sharing structure, and GCF trials with pathology-flavoured
// waveforms. All generators are pure functions of their seed.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gaitmtl/gcf_data.hpp"
#include "gaitmtl/mmtfl.hpp"

namespace gaitmtl {

struct SharingSpec {
  int d = 50;
  int T = 3;
  std::vector<int> shared_support;
  std::vector<std::vector<int>> private_supports;  // one per task
  double noise_sd = 0.5;
  int n_per_task = 100;
  std::uint64_t seed = 0;
};

// shared = {0..n_shared-1}; task t's private block follows it.
SharingSpec make_sharing_spec(int d, int T, int n_shared, int n_private, int n_per_task,
                              double noise_sd, std::uint64_t seed);

struct SharingTruth {
  Eigen::VectorXd c;       // nonzero exactly on the union of supports
  Eigen::MatrixXd betas;   // d x T, column t nonzero on shared + private_t
  Eigen::MatrixXd alphas;  // c .* betas
  std::vector<int> shared_support;
  std::vector<std::vector<int>> private_supports;
  std::vector<int> c_support;  // sorted union
};

struct MultitaskData {
  std::vector<TaskData> tasks;
  SharingTruth truth;
};

// X ~ N(0, I); y = sign(X alpha_t + noise) with sign(0) = +1.
MultitaskData gen_multitask(const SharingSpec& spec);

enum class PathologyKind { Healthy, Parkinsonian, Hemiplegic };

std::string_view to_string(PathologyKind k);

// Forces are fractions of body weight.
struct PathologyProfile {
  PathologyKind kind = PathologyKind::Healthy;
  double cadence_spm = 110.0;
  double stance_duty = 0.60;
  double heel_strike_amplitude = 1.2;  // affected (left) foot when hemiplegic
  double lateral_bias = -0.10;         // Meta45 minus Meta12 share of the mid-stance load
  double jitter_sd = 0.0;              // per-channel noise on loaded samples
  std::uint64_t seed = 0;
  double toe_off_amplitude = 0.9;
  double midstance_amplitude = 0.6;
  double unaffected_heel_amplitude = 1.0;  // right foot when hemiplegic
  double body_weight = 1.0;                // output scale; normalization divides it out
};

// Throws DomainError for values outside physical bounds.
void check_profile(const PathologyProfile& p);

// Values the extractor should report on the noiseless waveform.
struct FootTruth {
  double stance_ratio = 0.0;
  double balance_max_diff = 0.0;
  double balance_min_diff = 0.0;
  double strength_heel_max = 0.0;
  double strength_toe_max = 0.0;
  std::vector<std::size_t> stance_onsets;
  std::size_t stance_samples = 0;
};

struct GcfTruth {
  std::array<FootTruth, 2> foot;  // left, right
  double cadence = 0.0;           // onsets of both feet per minute of trial
  double nominal_cadence = 0.0;   // after rounding the step to whole samples
  double double_support_ratio = 0.0;
  double single_support_ratio = 0.0;
  std::size_t step_samples = 0;
};

struct SynthTrial {
  Trial trial;
  GcfTruth truth;
};

// Left heel strike at sample 0, right half a stride later. Stances that
// would begin before the first sample are left out. Requires duration >= 10 s.
SynthTrial gen_gcf_trial(const PathologyProfile& profile, double duration_s,
                         double sampling_rate = kDefaultSamplingRate);

// Group means and between-subject / between-trial spreads.
struct GroupModel {
  PathologyProfile mean;
  double cadence_sd = 0.0;
  double duty_sd = 0.0;
  double heel_sd = 0.0;
  double bias_sd = 0.0;
  double toe_sd = 0.0;
};

struct CohortConfig {
  std::array<int, 3> n_per_group = {5, 3, 3};  // PD, ST, H
  int trials_per_subject = 16;
  double duration_s = 20.0;
  double sampling_rate = kDefaultSamplingRate;
  std::uint64_t seed = 0;
  double noise_sd = 0.01;
  // Fraction of the subject spread applied again per trial.
  double trial_spread = 0.5;
  std::map<Group, GroupModel> groups = default_group_models();

  static std::map<Group, GroupModel> default_group_models();
};

struct Cohort {
  std::vector<Subject> subjects;
  std::vector<PathologyProfile> subject_profiles;  // parallel to subjects
  std::vector<SynthTrial> trials;                  // raw forces (times body weight)
};

// Throws DomainError when a group has fewer than two subjects.
Cohort gen_cohort(const CohortConfig& cfg);

}  // namespace gaitmtl
