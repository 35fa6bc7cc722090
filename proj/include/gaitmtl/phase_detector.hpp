#pragma once

// Phase-hypothesis sources. The baseline detector clusters a foot's 4-D force
// samples with a Gaussian mixture and picks the component count by BIC; any
// external detector can instead supply hypotheses through a JSONL sidecar.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gaitmtl/segmentation.hpp"

namespace gaitmtl {

struct GmmConfig {
  int k_min = 2;
  int k_max = 12;
  int restarts = 20;
  int max_iterations = 200;
  double tolerance = 1e-6;      // relative change in mean log-likelihood
  double covariance_floor = 1e-6;  // added to every covariance diagonal
  std::uint64_t seed = 0;
};

struct GmmFit {
  int k = 0;
  double log_likelihood = 0.0;
  double bic = 0.0;
  std::vector<double> weights;
  std::vector<FootForces> means;
  std::vector<PhaseId> labels;  // maximum-posterior component per sample
  int iterations = 0;
};

// Fits a k-component full-covariance mixture, keeping the best of
// `cfg.restarts` k-means++ seeded EM runs.
GmmFit fit_gmm(std::span<const FootForces> data, int k, const GmmConfig& cfg);

// Single hypothesis (weight 1) from the BIC-selected mixture over
// K in [k_min, k_max]. Identical samples yield a flagged one-phase hypothesis.
PhaseHypothesisSet detect_phases_baseline(const Trial& trial, Foot foot,
                                          const GmmConfig& cfg = {});

// One hypothesis per line: {"weight": w, "labels": [ids...]}. Phase counts are
// derived from the labels; the result is checked against `sample_count`.
PhaseHypothesisSet parse_hypotheses_jsonl(std::istream& in, Foot foot, std::size_t sample_count);
PhaseHypothesisSet load_hypotheses_jsonl(const std::string& path, Foot foot,
                                         std::size_t sample_count);
void write_hypotheses_jsonl(std::ostream& out, const PhaseHypothesisSet& phs);

}  // namespace gaitmtl
