#include "gaitmtl/dataset.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <fmt/format.h>

#include "gaitmtl/errors.hpp"
#include "text_util.hpp"

namespace gaitmtl {

Dataset build_dataset(const std::vector<ExtractedTrial>& trials,
                      const std::vector<Subject>& subjects) {
  std::unordered_map<std::string, const Subject*> by_id;
  for (const auto& s : subjects) by_id.emplace(s.id, &s);

  Dataset ds;
  ds.feature_names.assign(feature_names().begin(), feature_names().end());
  ds.X.resize(static_cast<Eigen::Index>(trials.size()), static_cast<Eigen::Index>(kNumFeatures));
  for (std::size_t r = 0; r < trials.size(); ++r) {
    const auto it = by_id.find(trials[r].subject_id);
    if (it == by_id.end()) {
      throw JoinError(fmt::format("trial {} references unknown subject '{}'", r,
                                  trials[r].subject_id));
    }
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      ds.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = trials[r].features[j];
    }
    ds.subject_ids.push_back(trials[r].subject_id);
    ds.groups.push_back(it->second->group);
  }
  check_dataset(ds);
  return ds;
}

void check_dataset(const Dataset& ds) {
  const auto n = static_cast<std::size_t>(ds.X.rows());
  if (ds.subject_ids.size() != n || ds.groups.size() != n) {
    throw DomainError("dataset metadata length does not match row count");
  }
  if (ds.feature_names.size() != static_cast<std::size_t>(ds.X.cols())) {
    throw DomainError("dataset feature names do not match column count");
  }
  if (!ds.X.allFinite()) throw DomainError("dataset contains non-finite entries");
}

void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  check_dataset(ds);
  for (const auto& name : ds.feature_names) out << name << ',';
  out << "subject_id,group\n";
  for (Eigen::Index r = 0; r < ds.X.rows(); ++r) {
    for (Eigen::Index c = 0; c < ds.X.cols(); ++c) out << fmt::format("{:.17g},", ds.X(r, c));
    out << ds.subject_ids[static_cast<std::size_t>(r)] << ','
        << to_string(ds.groups[static_cast<std::size_t>(r)]) << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  Dataset ds;
  std::vector<std::vector<double>> rows;
  bool have_header = false;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = detail::trim(line);
    if (row.empty()) continue;
    const auto fields = detail::split(row, ',');
    if (!have_header) {
      if (fields.size() < 2 || fields[fields.size() - 2] != "subject_id" ||
          fields.back() != "group") {
        throw ParseError("dataset header must end with subject_id,group", line_no);
      }
      for (std::size_t i = 0; i + 2 < fields.size(); ++i) ds.feature_names.emplace_back(fields[i]);
      width = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != width) {
      throw ParseError(fmt::format("expected {} fields, found {}", width, fields.size()), line_no);
    }
    std::vector<double> values;
    for (std::size_t i = 0; i + 2 < fields.size(); ++i) {
      const auto v = detail::parse_double(fields[i]);
      if (!v) throw ParseError(fmt::format("cannot parse '{}'", fields[i]), line_no);
      if (!std::isfinite(*v)) throw ValidationError("non-finite feature value", line_no);
      values.push_back(*v);
    }
    rows.push_back(std::move(values));
    ds.subject_ids.emplace_back(fields[width - 2]);
    try {
      ds.groups.push_back(parse_group(fields[width - 1]));
    } catch (const DomainError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (!have_header) throw EmptyInputError("empty dataset file");
  ds.X.resize(static_cast<Eigen::Index>(rows.size()),
              static_cast<Eigen::Index>(ds.feature_names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      ds.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return ds;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  return read_dataset_csv(in);
}

void write_multitask_csv(std::ostream& out, const MultitaskTable& table) {
  for (const auto& name : table.feature_names) out << name << ',';
  out << "task,label\n";
  for (const auto& t : table.tasks) {
    if (static_cast<std::size_t>(t.cols()) != table.feature_names.size()) {
      throw DomainError("multitask table: feature count mismatch");
    }
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) out << fmt::format("{:.17g},", t.X(r, c));
      out << t.name << ',' << (t.y(r) > 0 ? "1" : "-1") << '\n';
    }
  }
}

MultitaskTable read_multitask_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  MultitaskTable table;
  std::size_t width = 0;
  std::vector<std::string> order;
  std::unordered_map<std::string, std::pair<std::vector<std::vector<double>>, std::vector<double>>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = detail::trim(line);
    if (row.empty()) continue;
    const auto fields = detail::split(row, ',');
    if (width == 0) {
      if (fields.size() < 3 || fields[fields.size() - 2] != "task" || fields.back() != "label") {
        throw ParseError("multitask header must end with task,label", line_no);
      }
      for (std::size_t i = 0; i + 2 < fields.size(); ++i) table.feature_names.emplace_back(fields[i]);
      width = fields.size();
      continue;
    }
    if (fields.size() != width) {
      throw ParseError(fmt::format("expected {} fields, found {}", width, fields.size()), line_no);
    }
    std::vector<double> values;
    for (std::size_t i = 0; i + 2 < width; ++i) {
      const auto v = detail::parse_double(fields[i]);
      if (!v) throw ParseError(fmt::format("cannot parse '{}'", fields[i]), line_no);
      if (!std::isfinite(*v)) throw ValidationError("non-finite feature value", line_no);
      values.push_back(*v);
    }
    const std::string task(fields[width - 2]);
    const auto label = fields[width - 1];
    if (label != "1" && label != "+1" && label != "-1") {
      throw ParseError(fmt::format("label must be +-1, got '{}'", label), line_no);
    }
    auto [it, fresh] = rows.try_emplace(task);
    if (fresh) order.push_back(task);
    it->second.first.push_back(std::move(values));
    it->second.second.push_back(label == "-1" ? -1.0 : 1.0);
  }
  if (width == 0) throw EmptyInputError("empty multitask file");
  for (const auto& name : order) {
    const auto& [xs, ys] = rows.at(name);
    TaskData t;
    t.name = name;
    t.X.resize(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(width - 2));
    t.y.resize(static_cast<Eigen::Index>(ys.size()));
    for (std::size_t r = 0; r < xs.size(); ++r) {
      for (std::size_t c = 0; c < xs[r].size(); ++c) {
        t.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = xs[r][c];
      }
      t.y(static_cast<Eigen::Index>(r)) = ys[r];
      t.ids.push_back(r);
    }
    table.tasks.push_back(std::move(t));
  }
  return table;
}

TableKind detect_table_kind(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    const auto row = detail::trim(line);
    if (row.empty()) continue;
    const auto fields = detail::split(row, ',');
    if (fields.size() >= 2 && fields[fields.size() - 2] == "subject_id" && fields.back() == "group") {
      return TableKind::Dataset;
    }
    if (fields.size() >= 2 && fields[fields.size() - 2] == "task" && fields.back() == "label") {
      return TableKind::Multitask;
    }
    throw ParseError("header ends with neither subject_id,group nor task,label", 1);
  }
  throw EmptyInputError("empty table: " + path);
}

}  // namespace gaitmtl
