#include "gaitmtl/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "gaitmtl/errors.hpp"

namespace gaitmtl {

const std::array<std::string, kNumFeatures>& feature_names() {
  static const std::array<std::string, kNumFeatures> names = [] {
    const std::array<std::string_view, kUnilateralFeatures> base = {
        "expected_num_phases", "phase_symmetry",   "num_swing_phases",
        "swing_symmetry",      "stance_ratio",     "balance_max_diff",
        "balance_min_diff",    "strength_heel_max", "strength_toe_max"};
    std::array<std::string, kNumFeatures> out;
    for (std::size_t i = 0; i < kUnilateralFeatures; ++i) {
      out[i] = std::string(base[i]) + "_left";
      out[kUnilateralFeatures + i] = std::string(base[i]) + "_right";
    }
    out[kCadence] = "cadence";
    out[kDoubleSupportRatio] = "double_support_ratio";
    out[kSingleSupportRatio] = "single_support_ratio";
    return out;
  }();
  return names;
}

double phase_symmetry(std::span<const double> counts) {
  if (counts.empty()) throw DomainError("phase_symmetry: empty count vector");
  double dot = 0.0;
  double sq = 0.0;
  for (double g : counts) {
    if (g < 0.0 || !std::isfinite(g)) throw DomainError("phase_symmetry: counts must be >= 0");
    dot += g;
    sq += g * g;
  }
  if (!(sq > 0.0)) throw DomainError("phase_symmetry: all counts are zero");
  return dot / (std::sqrt(sq) * std::sqrt(static_cast<double>(counts.size())));
}

double cadence(std::size_t num_stance_phases, double duration_minutes) {
  if (!(duration_minutes > 0.0)) throw DomainError("cadence: duration must be positive");
  return static_cast<double>(num_stance_phases) / duration_minutes;
}

SupportRatios support_ratios(const ContactSeries& left, const ContactSeries& right,
                             std::span<const GaitCycle> cycles) {
  if (left.size() != right.size()) throw DomainError("support_ratios: series lengths differ");
  if (cycles.empty()) throw TrialRejected("support ratios need at least one complete cycle");
  SupportRatios sum;
  for (const auto& c : cycles) {
    if (c.end_idx > left.size() || c.start_idx >= c.end_idx) {
      throw DomainError("support_ratios: cycle outside the series");
    }
    std::size_t both = 0;
    std::size_t one = 0;
    for (std::size_t i = c.start_idx; i < c.end_idx; ++i) {
      const int n = int(left.in_contact(i)) + int(right.in_contact(i));
      if (n == 2) ++both;
      else if (n == 1) ++one;
    }
    const auto len = static_cast<double>(c.length());
    sum.double_support += both / len;
    sum.single_support += one / len;
  }
  const auto n = static_cast<double>(cycles.size());
  return {sum.double_support / n, sum.single_support / n};
}

double stance_ratio(const GaitCycle& cycle) {
  if (!(cycle.start_idx < cycle.stance_end_idx && cycle.stance_end_idx <= cycle.end_idx)) {
    throw DomainError("stance_ratio: malformed cycle");
  }
  return static_cast<double>(cycle.stance_length()) / static_cast<double>(cycle.length());
}

BalanceFeatures balance_features(std::span<const FootForces> cycle_samples) {
  if (cycle_samples.empty()) throw DomainError("balance_features: empty cycle");
  BalanceFeatures b{-std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity()};
  for (const auto& s : cycle_samples) {
    const double diff = s[kMeta12] - s[kMeta45];
    b.max_diff = std::max(b.max_diff, diff);
    b.min_diff = std::min(b.min_diff, diff);
  }
  return b;
}

StrengthFeatures strength_features(std::span<const FootForces> stance_samples) {
  if (stance_samples.empty()) throw DomainError("strength_features: empty stance");
  const std::size_t half = (stance_samples.size() + 1) / 2;
  StrengthFeatures s;
  for (const auto& f : stance_samples.first(half)) s.heel_max = std::max(s.heel_max, f[kHeel]);
  for (const auto& f : stance_samples.last(half)) s.toe_max = std::max(s.toe_max, f[kToe]);
  return s;
}

FootAnalysis analyze_foot(const Trial& normalized, Foot foot, const ExtractionConfig& cfg,
                          std::optional<PhaseHypothesisSet> phases) {
  FootAnalysis fa;
  fa.contact = detect_contact(normalized, foot, cfg.contact);
  fa.cycles = segment_cycles(fa.contact);
  if (phases) {
    check_hypotheses(*phases, normalized.size());
    fa.phases = std::move(*phases);
  } else {
    fa.phases = detect_phases_baseline(normalized, foot, cfg.gmm);
  }
  const auto samples = foot_samples(normalized, foot);
  for (const auto& h : fa.phases.hypotheses) fa.swings.push_back(identify_swing(h.labels, samples));
  return fa;
}

namespace {

// Counts of each of the hypothesis' phases within [begin, end).
std::vector<double> phase_counts(const std::vector<PhaseId>& labels,
                                 const std::map<PhaseId, std::size_t>& slot, std::size_t begin,
                                 std::size_t end) {
  std::vector<double> g(slot.size(), 0.0);
  for (std::size_t i = begin; i < end; ++i) g[slot.at(labels[i])] += 1.0;
  return g;
}

void fill_unilateral(const Trial& trial, const FootAnalysis& fa, FeatureVector& fv) {
  const Foot foot = fa.contact.foot;
  const auto at = [&](UnilateralFeature f) -> double& { return fv[feature_index(foot, f)]; };
  const auto n_cycles = static_cast<double>(fa.cycles.size());

  at(kExpectedNumPhases) = expected_num_phases(fa.phases);

  double phase_sym = 0.0;
  double swing_count = 0.0;
  double swing_sym = 0.0;
  for (std::size_t h = 0; h < fa.phases.hypotheses.size(); ++h) {
    const auto& hyp = fa.phases.hypotheses[h];
    std::map<PhaseId, std::size_t> slot;
    for (PhaseId id : hyp.labels) slot.try_emplace(id, 0);
    std::size_t next = 0;
    for (auto& [id, s] : slot) s = next++;

    double per_cycle = 0.0;
    for (const auto& c : fa.cycles) {
      per_cycle += phase_symmetry(phase_counts(hyp.labels, slot, c.start_idx, c.end_idx));
    }
    phase_sym += hyp.weight * per_cycle / n_cycles;

    const auto& swing = fa.swings[h];
    std::map<PhaseId, std::size_t> swing_slot;
    next = 0;
    for (PhaseId id : swing.swing_phase_ids) swing_slot[id] = next++;
    std::vector<double> g(swing_slot.size(), 0.0);
    for (PhaseId id : hyp.labels) {
      if (auto it = swing_slot.find(id); it != swing_slot.end()) g[it->second] += 1.0;
    }
    swing_count += hyp.weight * swing.num_swing_phases;
    swing_sym += hyp.weight * phase_symmetry(g);
  }
  at(kPhaseSymmetry) = phase_sym;
  at(kNumSwingPhases) = swing_count;
  at(kSwingSymmetry) = swing_sym;

  double stance = 0.0;
  double bal_max = 0.0;
  double bal_min = 0.0;
  double heel = 0.0;
  double toe = 0.0;
  const auto samples = foot_samples(trial, foot);
  const std::span<const FootForces> all(samples);
  for (const auto& c : fa.cycles) {
    stance += stance_ratio(c);
    const auto b = balance_features(all.subspan(c.start_idx, c.length()));
    bal_max += b.max_diff;
    bal_min += b.min_diff;
    const auto s = strength_features(all.subspan(c.start_idx, c.stance_length()));
    heel += s.heel_max;
    toe += s.toe_max;
  }
  at(kStanceRatio) = stance / n_cycles;
  at(kBalanceMaxDiff) = bal_max / n_cycles;
  at(kBalanceMinDiff) = bal_min / n_cycles;
  at(kStrengthHeelMax) = heel / n_cycles;
  at(kStrengthToeMax) = toe / n_cycles;
}

}  // namespace

FeatureVector extract_feature_vector(const Trial& normalized, const FootAnalysis& left,
                                     const FootAnalysis& right, std::size_t min_cycles) {
  for (const FootAnalysis* fa : {&left, &right}) {
    if (fa->cycles.size() < std::max<std::size_t>(min_cycles, 1)) {
      throw TrialRejected(fmt::format("{} foot has {} complete cycles, need {}",
                                      to_string(fa->contact.foot), fa->cycles.size(), min_cycles));
    }
    if (fa->contact.size() != normalized.size()) {
      throw DomainError("contact series does not match the trial length");
    }
  }
  FeatureVector fv;
  fill_unilateral(normalized, left, fv);
  fill_unilateral(normalized, right, fv);

  fv[kCadence] = cadence(count_stance_phases(left.contact) + count_stance_phases(right.contact),
                         normalized.duration_seconds() / 60.0);
  std::vector<GaitCycle> bilateral(left.cycles);
  bilateral.insert(bilateral.end(), right.cycles.begin(), right.cycles.end());
  const auto support = support_ratios(left.contact, right.contact, bilateral);
  fv[kDoubleSupportRatio] = support.double_support;
  fv[kSingleSupportRatio] = support.single_support;

  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    if (!std::isfinite(fv[i])) {
      throw TrialRejected(fmt::format("feature {} is not finite", feature_names()[i]));
    }
  }
  return fv;
}

FeatureVector extract_trial_features(const Trial& normalized, const ExtractionConfig& cfg,
                                     std::optional<PhaseHypothesisSet> left_phases,
                                     std::optional<PhaseHypothesisSet> right_phases) {
  // Cycle counts are checked before the comparatively expensive phase fit.
  for (Foot foot : {Foot::Left, Foot::Right}) {
    const auto cycles = segment_cycles(detect_contact(normalized, foot, cfg.contact));
    if (cycles.size() < std::max<std::size_t>(cfg.min_cycles, 1)) {
      throw TrialRejected(fmt::format("{} foot has {} complete cycles, need {}", to_string(foot),
                                      cycles.size(), cfg.min_cycles));
    }
  }
  const auto left = analyze_foot(normalized, Foot::Left, cfg, std::move(left_phases));
  const auto right = analyze_foot(normalized, Foot::Right, cfg, std::move(right_phases));
  return extract_feature_vector(normalized, left, right, cfg.min_cycles);
}

}  // namespace gaitmtl
