#pragma once

// Stance/swing contact detection, gait-cycle segmentation and the
// phase-hypothesis utilities that turn phase labels into swing phases.

#include <cstddef>
#include <set>
#include <span>
#include <vector>

#include "gaitmtl/gcf_data.hpp"

namespace gaitmtl {

enum class ContactState : unsigned char { Airborne = 0, Contact = 1 };

struct ContactSeries {
  Foot foot = Foot::Left;
  std::vector<ContactState> states;

  std::size_t size() const { return states.size(); }
  bool in_contact(std::size_t i) const { return states[i] == ContactState::Contact; }
};

struct ContactConfig {
  double threshold = 0.05;   // fraction of body weight
  double hysteresis = 0.01;
};

// Samples with any channel above this are taken as not weight-normalized.
inline constexpr double kMaxNormalizedForce = 10.0;

// Contact begins when the four-channel sum exceeds threshold + hysteresis and
// ends once it drops to threshold - hysteresis or below. With hysteresis 0 this
// is plain `sum > threshold`.
ContactSeries detect_contact(const Trial& trial, Foot foot, const ContactConfig& cfg = {});

// Half-open sample range [start_idx, end_idx) from one contact onset to the
// next; stance occupies [start_idx, stance_end_idx).
struct GaitCycle {
  Foot foot = Foot::Left;
  std::size_t start_idx = 0;
  std::size_t end_idx = 0;
  std::size_t stance_end_idx = 0;

  std::size_t length() const { return end_idx - start_idx; }
  std::size_t stance_length() const { return stance_end_idx - start_idx; }
};

// Indices where a contact run starts. Index 0 counts when the series opens in
// contact.
std::vector<std::size_t> contact_onsets(const ContactSeries& contact);

// Number of contact runs, i.e. stance phases, in the series.
std::size_t count_stance_phases(const ContactSeries& contact);

std::vector<GaitCycle> segment_cycles(const ContactSeries& contact);

using PhaseId = int;

struct PhaseHypothesis {
  double weight = 1.0;
  std::vector<PhaseId> labels;
  int num_phases = 0;  // distinct ids in labels
};

struct PhaseHypothesisSet {
  Foot foot = Foot::Left;
  std::vector<PhaseHypothesis> hypotheses;
  // Set when the producer fell back to a degenerate answer.
  bool degenerate = false;
};

int count_distinct(std::span<const PhaseId> labels);

// Checks weights (sum 1 within 1e-9, each in [0,1]), K_i and label lengths.
// Throws DomainError on violation.
void check_hypotheses(const PhaseHypothesisSet& phs, std::size_t sample_count);

// Weighted mean phase count, sum_i w_i K_i.
double expected_num_phases(const PhaseHypothesisSet& phs);

struct SwingAssignment {
  std::set<PhaseId> swing_phase_ids;
  int num_swing_phases = 0;
  double swing_share = 0.0;
};

inline constexpr double kSwingShareThreshold = 0.10;

// Orders phases by the mean Euclidean norm of their samples (ties by id) and
// merges them into the swing set until its share of all observations exceeds
// 10%.
SwingAssignment identify_swing(std::span<const PhaseId> labels,
                               std::span<const FootForces> samples);

// Per-foot forces of a trial as a contiguous vector.
std::vector<FootForces> foot_samples(const Trial& trial, Foot foot);

}  // namespace gaitmtl
