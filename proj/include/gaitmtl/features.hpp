#pragma once

// The 21-column gait feature vector: nine unilateral features per foot and
// three bilateral ones, averaged over the complete gait cycles of a trial.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gaitmtl/phase_detector.hpp"
#include "gaitmtl/segmentation.hpp"

namespace gaitmtl {

inline constexpr std::size_t kNumFeatures = 21;
inline constexpr std::size_t kUnilateralFeatures = 9;

// Column order of FeatureVector::values and of the dataset CSV.
const std::array<std::string, kNumFeatures>& feature_names();

// Unilateral feature slots; add kUnilateralFeatures for the right foot.
enum UnilateralFeature : std::size_t {
  kExpectedNumPhases = 0,
  kPhaseSymmetry,
  kNumSwingPhases,
  kSwingSymmetry,
  kStanceRatio,
  kBalanceMaxDiff,
  kBalanceMinDiff,
  kStrengthHeelMax,
  kStrengthToeMax,
};

enum BilateralFeature : std::size_t {
  kCadence = 2 * kUnilateralFeatures,
  kDoubleSupportRatio,
  kSingleSupportRatio,
};

constexpr std::size_t feature_index(Foot foot, UnilateralFeature f) {
  return (foot == Foot::Left ? 0 : kUnilateralFeatures) + f;
}

struct FeatureVector {
  std::array<double, kNumFeatures> values{};

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  double get(Foot foot, UnilateralFeature f) const { return values[feature_index(foot, f)]; }
};

// Cosine between per-phase counts and the all-ones vector of the same length.
double phase_symmetry(std::span<const double> counts);

// Steps per minute.
double cadence(std::size_t num_stance_phases, double duration_minutes);

struct SupportRatios {
  double double_support = 0.0;
  double single_support = 0.0;
};

// Mean over `cycles` of the fraction of cycle samples with both feet /
// exactly one foot in contact. Throws TrialRejected without cycles.
SupportRatios support_ratios(const ContactSeries& left, const ContactSeries& right,
                             std::span<const GaitCycle> cycles);

double stance_ratio(const GaitCycle& cycle);

struct BalanceFeatures {
  double max_diff = 0.0;
  double min_diff = 0.0;
};

// Extremes of Meta12 - Meta45 over the cycle's samples.
BalanceFeatures balance_features(std::span<const FootForces> cycle_samples);

struct StrengthFeatures {
  double heel_max = 0.0;
  double toe_max = 0.0;
};

// Heel peak over the first half of stance, toe peak over the last half.
// `stance_samples` covers [start_idx, stance_end_idx) of one cycle.
StrengthFeatures strength_features(std::span<const FootForces> stance_samples);

// Everything computed per foot before feature extraction.
struct FootAnalysis {
  ContactSeries contact;
  std::vector<GaitCycle> cycles;
  PhaseHypothesisSet phases;
  std::vector<SwingAssignment> swings;  // one per hypothesis
};

struct ExtractionConfig {
  ContactConfig contact;
  GmmConfig gmm;
  std::size_t min_cycles = 3;
};

// Contact, cycles, phases and swing sets for one foot. Uses `phases` when
// given, otherwise the baseline mixture detector.
FootAnalysis analyze_foot(const Trial& normalized, Foot foot, const ExtractionConfig& cfg,
                          std::optional<PhaseHypothesisSet> phases = std::nullopt);

FeatureVector extract_feature_vector(const Trial& normalized, const FootAnalysis& left,
                                     const FootAnalysis& right, std::size_t min_cycles = 3);

// Full path from a weight-normalized trial.
FeatureVector extract_trial_features(const Trial& normalized, const ExtractionConfig& cfg = {},
                                     std::optional<PhaseHypothesisSet> left_phases = std::nullopt,
                                     std::optional<PhaseHypothesisSet> right_phases = std::nullopt);

}  // namespace gaitmtl
