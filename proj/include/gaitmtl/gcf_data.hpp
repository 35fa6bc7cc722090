#pragma once

// Ground-contact-force trials: ingestion, validation and body-weight
// normalization. Forces are in arbitrary but consistent units until
// normalize_by_weight() makes them fractions of body weight.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gaitmtl {

enum class Group { PD, ST, H };

std::string_view to_string(Group g);
Group parse_group(std::string_view s);

enum class Foot { Left, Right };

std::string_view to_string(Foot f);

// Plantar sensor regions, in file column order.
enum Channel : std::size_t { kToe = 0, kMeta12 = 1, kMeta45 = 2, kHeel = 3 };
inline constexpr std::size_t kChannelsPerFoot = 4;
using FootForces = std::array<double, kChannelsPerFoot>;

struct GcfSample {
  double t = 0.0;
  FootForces left{};
  FootForces right{};

  const FootForces& foot(Foot f) const { return f == Foot::Left ? left : right; }
  FootForces& foot(Foot f) { return f == Foot::Left ? left : right; }
};

struct Subject {
  std::string id;
  Group group = Group::H;
  double body_weight = 1.0;
  std::optional<double> age;
};

inline constexpr double kDefaultSamplingRate = 20.0;

struct Trial {
  std::string subject_id;
  std::string trial_id;
  double sampling_rate = kDefaultSamplingRate;
  std::vector<GcfSample> samples;

  std::size_t size() const { return samples.size(); }
  // Length in seconds, counting one sampling interval per sample.
  double duration_seconds() const { return static_cast<double>(samples.size()) / sampling_rate; }
};

// CSV header of the canonical trial format.
inline constexpr std::string_view kTrialCsvHeader =
    "t,l_toe,l_m12,l_m45,l_heel,r_toe,r_m12,r_m45,r_heel";

// Column names in header order, shared by CSV and JSONL.
const std::array<std::string_view, 9>& trial_columns();

struct TrialParseOptions {
  std::string trial_id;
  // Replaces the inferred rate when set.
  std::optional<double> sampling_rate;
};

// Parses the canonical CSV trial format. Throws ParseError (malformed row),
// ValidationError (negative or non-finite force) or EmptyInputError.
Trial parse_trial(std::istream& in, const std::string& subject_id,
                  const TrialParseOptions& opts = {});

// Same field names, one JSON object per line.
Trial parse_trial_jsonl(std::istream& in, const std::string& subject_id,
                        const TrialParseOptions& opts = {});

// Loads CSV or JSONL by extension.
Trial load_trial(const std::string& path, const std::string& subject_id,
                 const TrialParseOptions& opts = {});

// Writes with six decimals, '\n' line endings.
void write_trial_csv(std::ostream& out, const Trial& trial);

// Median timestamp delta inverted; falls back to the default rate for
// single-sample trials.
double infer_sampling_rate(const std::vector<GcfSample>& samples);

Trial normalize_by_weight(const Trial& trial, const Subject& subject);

struct TrialIssue {
  enum class Kind { Empty, NonFinite, Negative, NonMonotonic, IrregularSpacing };
  Kind kind;
  std::size_t sample_index;
  std::string message;
};

std::string_view to_string(TrialIssue::Kind k);

std::vector<TrialIssue> validate_trial(const Trial& trial);

// Subject metadata CSV: id,group,body_weight,age (age may be empty).
std::vector<Subject> parse_subjects(std::istream& in);
std::vector<Subject> load_subjects(const std::string& path);
void write_subjects_csv(std::ostream& out, const std::vector<Subject>& subjects);

}  // namespace gaitmtl
