#include "gaitmtl/gcf_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "gaitmtl/errors.hpp"
#include "text_util.hpp"

namespace gaitmtl {

std::string_view to_string(Group g) {
  switch (g) {
    case Group::PD: return "PD";
    case Group::ST: return "ST";
    case Group::H: return "H";
  }
  return "?";
}

Group parse_group(std::string_view s) {
  if (s == "PD") return Group::PD;
  if (s == "ST") return Group::ST;
  if (s == "H") return Group::H;
  throw DomainError(fmt::format("unknown group '{}' (expected PD, ST or H)", s));
}

std::string_view to_string(Foot f) { return f == Foot::Left ? "left" : "right"; }

const std::array<std::string_view, 9>& trial_columns() {
  static const std::array<std::string_view, 9> cols = {
      "t", "l_toe", "l_m12", "l_m45", "l_heel", "r_toe", "r_m12", "r_m45", "r_heel"};
  return cols;
}

namespace {

void check_force(double v, std::size_t column, std::size_t line) {
  if (!std::isfinite(v)) {
    throw ValidationError(fmt::format("non-finite force in channel {}", trial_columns()[column]),
                          line);
  }
  if (v < 0.0) {
    throw ValidationError(
        fmt::format("negative force {} in channel {}", v, trial_columns()[column]), line);
  }
}

GcfSample sample_from_values(const std::array<double, 9>& v, std::size_t line) {
  if (!std::isfinite(v[0])) throw ValidationError("non-finite timestamp", line);
  GcfSample s;
  s.t = v[0];
  for (std::size_t c = 0; c < kChannelsPerFoot; ++c) {
    check_force(v[1 + c], 1 + c, line);
    check_force(v[5 + c], 5 + c, line);
    s.left[c] = v[1 + c];
    s.right[c] = v[5 + c];
  }
  return s;
}

Trial finish_trial(std::vector<GcfSample> samples, const std::string& subject_id,
                   const TrialParseOptions& opts) {
  if (samples.empty()) throw EmptyInputError("trial has no samples");
  Trial trial;
  trial.subject_id = subject_id;
  trial.trial_id = opts.trial_id;
  trial.sampling_rate = opts.sampling_rate ? *opts.sampling_rate : infer_sampling_rate(samples);
  trial.samples = std::move(samples);
  return trial;
}

}  // namespace

Trial parse_trial(std::istream& in, const std::string& subject_id, const TrialParseOptions& opts) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<GcfSample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = detail::trim(line);
    if (row.empty()) continue;
    if (!have_header) {
      if (row != kTrialCsvHeader) {
        throw ParseError(fmt::format("expected header '{}'", kTrialCsvHeader), line_no);
      }
      have_header = true;
      continue;
    }
    const auto fields = detail::split(row, ',');
    if (fields.size() != 9) {
      throw ParseError(fmt::format("expected 9 fields, found {}", fields.size()), line_no);
    }
    std::array<double, 9> values{};
    for (std::size_t i = 0; i < 9; ++i) {
      const auto parsed = detail::parse_double(fields[i]);
      if (!parsed) {
        throw ParseError(
            fmt::format("cannot parse '{}' in column {}", fields[i], trial_columns()[i]), line_no);
      }
      values[i] = *parsed;
    }
    samples.push_back(sample_from_values(values, line_no));
  }
  if (!have_header) throw EmptyInputError("empty trial file");
  return finish_trial(std::move(samples), subject_id, opts);
}

Trial parse_trial_jsonl(std::istream& in, const std::string& subject_id,
                        const TrialParseOptions& opts) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<GcfSample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(e.what(), line_no);
    }
    std::array<double, 9> values{};
    for (std::size_t i = 0; i < 9; ++i) {
      const auto key = std::string(trial_columns()[i]);
      if (!obj.contains(key) || !obj[key].is_number()) {
        throw ParseError(fmt::format("missing numeric field '{}'", key), line_no);
      }
      values[i] = obj[key].get<double>();
    }
    samples.push_back(sample_from_values(values, line_no));
  }
  return finish_trial(std::move(samples), subject_id, opts);
}

Trial load_trial(const std::string& path, const std::string& subject_id,
                 const TrialParseOptions& opts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trial file: " + path);
  const bool jsonl = path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl";
  return jsonl ? parse_trial_jsonl(in, subject_id, opts) : parse_trial(in, subject_id, opts);
}

void write_trial_csv(std::ostream& out, const Trial& trial) {
  out << kTrialCsvHeader << '\n';
  for (const auto& s : trial.samples) {
    out << fmt::format("{:.6f}", s.t);
    for (double v : s.left) out << fmt::format(",{:.6f}", v);
    for (double v : s.right) out << fmt::format(",{:.6f}", v);
    out << '\n';
  }
}

double infer_sampling_rate(const std::vector<GcfSample>& samples) {
  if (samples.size() < 2) return kDefaultSamplingRate;
  std::vector<double> deltas;
  deltas.reserve(samples.size() - 1);
  for (std::size_t i = 1; i < samples.size(); ++i) deltas.push_back(samples[i].t - samples[i - 1].t);
  const auto mid = deltas.begin() + static_cast<std::ptrdiff_t>(deltas.size() / 2);
  std::nth_element(deltas.begin(), mid, deltas.end());
  double median = *mid;
  if (deltas.size() % 2 == 0) {
    const double lower = *std::max_element(deltas.begin(), mid);
    median = 0.5 * (median + lower);
  }
  if (!(median > 0.0)) return kDefaultSamplingRate;
  // Snap away representation noise from six-decimal timestamps.
  return std::round(1e6 / median) / 1e6;
}

Trial normalize_by_weight(const Trial& trial, const Subject& subject) {
  if (!(subject.body_weight > 0.0) || !std::isfinite(subject.body_weight)) {
    throw DomainError(fmt::format("body weight must be positive (subject {})", subject.id));
  }
  Trial out = trial;
  for (auto& s : out.samples) {
    for (double& v : s.left) v /= subject.body_weight;
    for (double& v : s.right) v /= subject.body_weight;
  }
  return out;
}

std::string_view to_string(TrialIssue::Kind k) {
  switch (k) {
    case TrialIssue::Kind::Empty: return "empty";
    case TrialIssue::Kind::NonFinite: return "non-finite";
    case TrialIssue::Kind::Negative: return "negative";
    case TrialIssue::Kind::NonMonotonic: return "non-monotonic";
    case TrialIssue::Kind::IrregularSpacing: return "irregular-spacing";
  }
  return "?";
}

std::vector<TrialIssue> validate_trial(const Trial& trial) {
  std::vector<TrialIssue> issues;
  if (trial.samples.empty()) {
    issues.push_back({TrialIssue::Kind::Empty, 0, "trial has no samples"});
    return issues;
  }
  const double expected_dt = 1.0 / trial.sampling_rate;
  for (std::size_t i = 0; i < trial.samples.size(); ++i) {
    const auto& s = trial.samples[i];
    bool non_finite = !std::isfinite(s.t);
    bool negative = false;
    for (Foot f : {Foot::Left, Foot::Right}) {
      for (double v : s.foot(f)) {
        if (!std::isfinite(v)) non_finite = true;
        else if (v < 0.0) negative = true;
      }
    }
    if (non_finite) {
      issues.push_back({TrialIssue::Kind::NonFinite, i, "non-finite value"});
    } else if (negative) {
      issues.push_back({TrialIssue::Kind::Negative, i, "negative force"});
    }
    if (i == 0 || !std::isfinite(s.t) || !std::isfinite(trial.samples[i - 1].t)) continue;
    const double dt = s.t - trial.samples[i - 1].t;
    if (!(dt > 0.0)) {
      issues.push_back({TrialIssue::Kind::NonMonotonic, i,
                        fmt::format("timestamp {} does not increase", s.t)});
    } else if (std::abs(dt - expected_dt) > 0.1 * expected_dt) {
      issues.push_back({TrialIssue::Kind::IrregularSpacing, i,
                        fmt::format("spacing {} deviates >10% from 1/{} Hz", dt,
                                    trial.sampling_rate)});
    }
  }
  return issues;
}

std::vector<Subject> parse_subjects(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<Subject> subjects;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = detail::trim(line);
    if (row.empty()) continue;
    if (!have_header) {
      if (row != "id,group,body_weight,age") {
        throw ParseError("expected header 'id,group,body_weight,age'", line_no);
      }
      have_header = true;
      continue;
    }
    const auto fields = detail::split(row, ',');
    if (fields.size() != 4) {
      throw ParseError(fmt::format("expected 4 fields, found {}", fields.size()), line_no);
    }
    Subject s;
    s.id = std::string(fields[0]);
    if (s.id.empty()) throw ParseError("empty subject id", line_no);
    try {
      s.group = parse_group(fields[1]);
    } catch (const DomainError& e) {
      throw ParseError(e.what(), line_no);
    }
    const auto weight = detail::parse_double(fields[2]);
    if (!weight) throw ParseError("cannot parse body_weight", line_no);
    if (!(*weight > 0.0) || !std::isfinite(*weight)) {
      throw ValidationError("body_weight must be positive", line_no);
    }
    s.body_weight = *weight;
    if (!fields[3].empty()) {
      const auto age = detail::parse_double(fields[3]);
      if (!age) throw ParseError("cannot parse age", line_no);
      if (!(*age > 0.0)) throw ValidationError("age must be positive", line_no);
      s.age = *age;
    }
    subjects.push_back(std::move(s));
  }
  return subjects;
}

std::vector<Subject> load_subjects(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open subjects file: " + path);
  return parse_subjects(in);
}

void write_subjects_csv(std::ostream& out, const std::vector<Subject>& subjects) {
  out << "id,group,body_weight,age\n";
  for (const auto& s : subjects) {
    out << s.id << ',' << to_string(s.group) << ',' << fmt::format("{:.6f}", s.body_weight) << ',';
    if (s.age) out << fmt::format("{:.1f}", *s.age);
    out << '\n';
  }
}

}  // namespace gaitmtl
