#include "gaitmtl/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include <fmt/format.h>

#include "gaitmtl/errors.hpp"

namespace gaitmtl {

ContactSeries detect_contact(const Trial& trial, Foot foot, const ContactConfig& cfg) {
  if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0)) {
    throw DomainError("contact threshold must lie in (0, 1)");
  }
  if (!(cfg.hysteresis >= 0.0 && cfg.hysteresis < cfg.threshold)) {
    throw DomainError("hysteresis must lie in [0, threshold)");
  }
  ContactSeries out;
  out.foot = foot;
  out.states.reserve(trial.size());
  const double rise = cfg.threshold + cfg.hysteresis;
  const double fall = cfg.threshold - cfg.hysteresis;
  bool contact = false;
  for (std::size_t i = 0; i < trial.size(); ++i) {
    const auto& forces = trial.samples[i].foot(foot);
    double total = 0.0;
    for (double v : forces) {
      if (v > kMaxNormalizedForce) {
        throw DomainError(fmt::format(
            "sample {} has force {} > {}; trial is not weight-normalized", i, v,
            kMaxNormalizedForce));
      }
      total += v;
    }
    if (!contact && total > rise) contact = true;
    else if (contact && total <= fall) contact = false;
    out.states.push_back(contact ? ContactState::Contact : ContactState::Airborne);
  }
  return out;
}

std::vector<std::size_t> contact_onsets(const ContactSeries& contact) {
  std::vector<std::size_t> onsets;
  for (std::size_t i = 0; i < contact.size(); ++i) {
    if (contact.in_contact(i) && (i == 0 || !contact.in_contact(i - 1))) onsets.push_back(i);
  }
  return onsets;
}

std::size_t count_stance_phases(const ContactSeries& contact) {
  return contact_onsets(contact).size();
}

std::vector<GaitCycle> segment_cycles(const ContactSeries& contact) {
  const auto onsets = contact_onsets(contact);
  std::vector<GaitCycle> cycles;
  if (onsets.size() < 2) return cycles;
  cycles.reserve(onsets.size() - 1);
  for (std::size_t k = 0; k + 1 < onsets.size(); ++k) {
    GaitCycle c;
    c.foot = contact.foot;
    c.start_idx = onsets[k];
    c.end_idx = onsets[k + 1];
    std::size_t i = c.start_idx;
    while (i < c.end_idx && contact.in_contact(i)) ++i;
    c.stance_end_idx = i;
    cycles.push_back(c);
  }
  return cycles;
}

int count_distinct(std::span<const PhaseId> labels) {
  std::unordered_set<PhaseId> ids(labels.begin(), labels.end());
  return static_cast<int>(ids.size());
}

void check_hypotheses(const PhaseHypothesisSet& phs, std::size_t sample_count) {
  if (phs.hypotheses.empty()) throw DomainError("phase hypothesis set is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < phs.hypotheses.size(); ++i) {
    const auto& h = phs.hypotheses[i];
    if (!(h.weight >= 0.0 && h.weight <= 1.0)) {
      throw DomainError(fmt::format("hypothesis {} weight {} outside [0,1]", i, h.weight));
    }
    if (h.labels.size() != sample_count) {
      throw DomainError(fmt::format("hypothesis {} has {} labels for {} samples", i,
                                    h.labels.size(), sample_count));
    }
    if (h.num_phases != count_distinct(h.labels)) {
      throw DomainError(fmt::format("hypothesis {} phase count {} does not match its labels", i,
                                    h.num_phases));
    }
    total += h.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DomainError(fmt::format("hypothesis weights sum to {}, not 1", total));
  }
}

double expected_num_phases(const PhaseHypothesisSet& phs) {
  if (phs.hypotheses.empty()) throw DomainError("phase hypothesis set is empty");
  double total = 0.0;
  double k_bar = 0.0;
  for (const auto& h : phs.hypotheses) {
    total += h.weight;
    k_bar += h.weight * h.num_phases;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DomainError(fmt::format("hypothesis weights sum to {}, not 1", total));
  }
  return k_bar;
}

SwingAssignment identify_swing(std::span<const PhaseId> labels,
                               std::span<const FootForces> samples) {
  if (labels.empty()) throw DomainError("identify_swing: no observations");
  if (labels.size() != samples.size()) {
    throw DomainError("identify_swing: labels and samples differ in length");
  }
  struct PhaseStats {
    double norm_sum = 0.0;
    std::size_t count = 0;
  };
  std::map<PhaseId, PhaseStats> stats;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double sq = 0.0;
    for (double v : samples[i]) sq += v * v;
    auto& s = stats[labels[i]];
    s.norm_sum += std::sqrt(sq);
    ++s.count;
  }
  struct Ranked {
    PhaseId id;
    double mean_norm;
    std::size_t count;
  };
  std::vector<Ranked> order;
  order.reserve(stats.size());
  for (const auto& [id, s] : stats) order.push_back({id, s.norm_sum / s.count, s.count});
  // std::map iteration is by ascending id, so a stable sort keeps id order on ties.
  std::stable_sort(order.begin(), order.end(),
                   [](const Ranked& a, const Ranked& b) { return a.mean_norm < b.mean_norm; });

  const double total = static_cast<double>(labels.size());
  SwingAssignment out;
  std::size_t merged = 0;
  for (const auto& r : order) {
    out.swing_phase_ids.insert(r.id);
    merged += r.count;
    if (static_cast<double>(merged) / total > kSwingShareThreshold) break;
  }
  out.num_swing_phases = static_cast<int>(out.swing_phase_ids.size());
  out.swing_share = static_cast<double>(merged) / total;
  return out;
}

std::vector<FootForces> foot_samples(const Trial& trial, Foot foot) {
  std::vector<FootForces> out;
  out.reserve(trial.size());
  for (const auto& s : trial.samples) out.push_back(s.foot(foot));
  return out;
}

}  // namespace gaitmtl
