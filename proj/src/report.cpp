#include "gaitmtl/report.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace gaitmtl {

using nlohmann::json;

namespace {

json summary_json(const AucSummary& s) { return {{"mean", s.mean}, {"sd", s.sd}, {"values", s.values}}; }

AucSummary summary_from(const json& j) {
  AucSummary s;
  s.mean = j.at("mean").get<double>();
  s.sd = j.at("sd").get<double>();
  s.values = j.at("values").get<std::vector<double>>();
  return s;
}

std::string pm(const AucSummary& s) { return fmt::format("{:.3f} ± {:.3f}", s.mean, s.sd); }

std::string percent(double ratio) { return fmt::format("{:g}%", ratio * 100.0); }

std::string heading(const EvalReport& r) {
  if (r.ratio) return fmt::format("{}, random partition {}", r.method, percent(*r.ratio));
  return fmt::format("{}, {}", r.method, r.scheme == "leave_one_subject_out" ? "leave one subject out" : r.scheme);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::vector<std::string> unique_in_order(const std::vector<std::string>& v) {
  std::vector<std::string> out;
  for (const auto& s : v)
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  return out;
}

const char* kPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"};

}  // namespace

json to_json(const ImportanceTable& t) {
  json cols = json::array();
  for (const auto& c : t.columns) {
    json ranked = json::array();
    for (const auto& [name, v] : c.ranked) ranked.push_back({{"feature", name}, {"value", v}});
    cols.push_back({{"name", c.name}, {"ranked", ranked}});
  }
  return cols;
}

json to_json(const EvalReport& r) {
  json tasks = json::array();
  for (const auto& t : r.tasks) {
    tasks.push_back({{"task", t.task},
                     {"classes", {t.class_names[0], t.class_names[1]}},
                     {"auc", summary_json(t.auc)},
                     {"confusion", {{t.confusion.m[0][0], t.confusion.m[0][1]},
                                    {t.confusion.m[1][0], t.confusion.m[1][1]}}}});
  }
  json subjects = json::array();
  for (const auto& s : r.per_subject) {
    subjects.push_back({{"task", s.task},
                        {"subject", s.subject},
                        {"group", s.group},
                        {"predicted_positive", s.predicted_positive},
                        {"predicted_negative", s.predicted_negative}});
  }
  json j = {{"method", r.method},
            {"scheme", r.scheme},
            {"repeats", r.repeats},
            {"tasks", tasks},
            {"all_tasks", summary_json(r.all_tasks)},
            {"per_subject", subjects},
            {"notices", r.notices},
            {"importance", to_json(r.importance)}};
  j["ratio"] = r.ratio ? json(*r.ratio) : json(nullptr);
  json tuning = json::array();
  for (const auto& t : r.tuning) {
    tuning.push_back({{"scope", t.scope}, {"gamma1", t.gamma1}, {"gamma2", t.gamma2}, {"lambda", t.lambda}, {"score", t.score}});
  }
  j["tuning"] = tuning;
  if (r.method.rfind("stl", 0) == 0) {
    j["hyperparameters"] = {{"lambda", r.lambda}};
  } else {
    j["hyperparameters"] = {{"gamma1", r.gamma1}, {"gamma2", r.gamma2}};
  }
  return j;
}

EvalReport eval_report_from_json(const json& j) {
  try {
    EvalReport r;
    r.method = j.at("method").get<std::string>();
    r.scheme = j.at("scheme").get<std::string>();
    r.repeats = j.at("repeats").get<int>();
    if (!j.at("ratio").is_null()) r.ratio = j["ratio"].get<double>();
    const auto& h = j.at("hyperparameters");
    r.gamma1 = h.value("gamma1", 0.0);
    r.gamma2 = h.value("gamma2", 0.0);
    r.lambda = h.value("lambda", 0.0);
    for (const auto& t : j.at("tasks")) {
      TaskResult tr;
      tr.task = t.at("task").get<std::string>();
      tr.class_names = {t.at("classes").at(0).get<std::string>(), t.at("classes").at(1).get<std::string>()};
      tr.auc = summary_from(t.at("auc"));
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) tr.confusion.m[a][b] = t.at("confusion").at(a).at(b).get<long>();
      r.tasks.push_back(std::move(tr));
    }
    r.all_tasks = summary_from(j.at("all_tasks"));
    for (const auto& s : j.at("per_subject")) {
      r.per_subject.push_back({s.at("task").get<std::string>(), s.at("subject").get<std::string>(),
                               s.at("group").get<std::string>(), s.at("predicted_positive").get<long>(),
                               s.at("predicted_negative").get<long>()});
    }
    r.notices = j.at("notices").get<std::vector<std::string>>();
    for (const auto& t : j.value("tuning", json::array())) {
      r.tuning.push_back({t.at("scope").get<std::string>(), t.at("gamma1").get<double>(), t.at("gamma2").get<double>(),
                          t.at("lambda").get<double>(), t.at("score").get<double>()});
    }
    for (const auto& c : j.at("importance")) {
      ImportanceColumn col;
      col.name = c.at("name").get<std::string>();
      for (const auto& e : c.at("ranked")) col.ranked.emplace_back(e.at("feature").get<std::string>(), e.at("value").get<double>());
      r.importance.columns.push_back(std::move(col));
    }
    return r;
  } catch (const json::exception& e) {
    throw std::runtime_error(fmt::format("report JSON: {}", e.what()));
  }
}

std::string render_markdown(const std::vector<EvalReport>& reports) {
  std::string md = "# Evaluation report\n";
  std::vector<std::string> methods;
  for (const auto& r : reports) methods.push_back(r.method);
  methods = unique_in_order(methods);

  std::set<double> ratios;
  for (const auto& r : reports)
    if (r.ratio) ratios.insert(*r.ratio);
  if (!ratios.empty()) {
    md += "\n## All-task AUC by training ratio\n\n| Method |";
    for (double q : ratios) md += fmt::format(" {} |", percent(q));
    md += "\n|---|";
    for (std::size_t i = 0; i < ratios.size(); ++i) md += "---|";
    md += "\n";
    for (const auto& m : methods) {
      md += fmt::format("| {} |", m);
      for (double q : ratios) {
        const auto it = std::find_if(reports.begin(), reports.end(),
                                     [&](const EvalReport& r) { return r.method == m && r.ratio == q; });
        md += it == reports.end() ? " |" : fmt::format(" {} |", pm(it->all_tasks));
      }
      md += "\n";
    }
  }

  md += "\n## AUC by task\n\n| Method | Scheme |";
  std::vector<std::string> task_names;
  for (const auto& r : reports)
    for (const auto& t : r.tasks) task_names.push_back(t.task);
  task_names = unique_in_order(task_names);
  for (const auto& t : task_names) md += fmt::format(" {} |", t);
  md += " All tasks |\n|---|---|";
  for (std::size_t i = 0; i <= task_names.size(); ++i) md += "---|";
  md += "\n";
  for (const auto& r : reports) {
    md += fmt::format("| {} | {} |", r.method, r.ratio ? percent(*r.ratio) : std::string("LOSO"));
    for (const auto& name : task_names) {
      const auto it = std::find_if(r.tasks.begin(), r.tasks.end(), [&](const TaskResult& t) { return t.task == name; });
      md += it == r.tasks.end() ? " |" : fmt::format(" {} |", r.repeats > 1 && r.ratio ? pm(it->auc) : fmt::format("{:.3f}", it->auc.mean));
    }
    md += fmt::format(" {} |\n", r.ratio ? pm(r.all_tasks) : fmt::format("{:.3f}", r.all_tasks.mean));
  }

  md += "\n## Confusion matrices\n\nTrue labels in rows, predicted labels in columns.\n";
  for (const auto& r : reports) {
    md += fmt::format("\n### {}\n", heading(r));
    md += r.method.rfind("stl", 0) == 0 ? fmt::format("\nlambda = {:g}\n", r.lambda)
                                        : fmt::format("\ngamma1 = {:g}, gamma2 = {:g}\n", r.gamma1, r.gamma2);
    if (r.ratio && r.tuning.size() == 1) {
      md += fmt::format("\nTuned on the {} (validation AUC {:.3f}).\n", r.tuning[0].scope, r.tuning[0].score);
    } else if (!r.tuning.empty()) {
      md += fmt::format("\nTuned separately in each of {} rounds; the setting above was chosen most often.\n", r.tuning.size());
    }
    for (const auto& t : r.tasks) {
      const auto& [pos, neg] = t.class_names;
      md += fmt::format("\n{}\n\n| | {} | {} |\n|---|---|---|\n", t.task, pos, neg);
      md += fmt::format("| {} | {} | {} |\n", pos, t.confusion.m[0][0], t.confusion.m[0][1]);
      md += fmt::format("| {} | {} | {} |\n", neg, t.confusion.m[1][0], t.confusion.m[1][1]);
    }
  }

  for (const auto& r : reports) {
    if (r.per_subject.empty()) continue;
    md += fmt::format("\n## Per-subject predictions: {}\n", r.method);
    for (const auto& t : r.tasks) {
      md += fmt::format("\n{}\n\n| Subject | {} | {} |\n|---|---|---|\n", t.task, t.class_names[0], t.class_names[1]);
      for (const auto& s : r.per_subject) {
        if (s.task != t.task) continue;
        md += fmt::format("| {} {} | {} | {} |\n", s.group, s.subject, s.predicted_positive, s.predicted_negative);
      }
    }
  }

  std::vector<std::string> notices;
  for (const auto& r : reports)
    for (const auto& n : r.notices) notices.push_back(fmt::format("{}: {}", r.method, n));
  if (!notices.empty()) {
    md += "\n## Notices\n\n";
    for (const auto& n : notices) md += "- " + n + "\n";
  }
  return md;
}

std::string render_auc_svg(const std::vector<EvalReport>& reports) {
  std::vector<std::string> methods;
  std::vector<std::string> series;  // ratio or scheme labels
  for (const auto& r : reports) {
    methods.push_back(r.method);
    series.push_back(r.ratio ? percent(*r.ratio) : std::string("LOSO"));
  }
  methods = unique_in_order(methods);
  series = unique_in_order(series);

  const int bar = 14;
  const int gap = 24;
  const int left = 50;
  const int top = 30;
  const int height = 200;
  const int group_w = static_cast<int>(series.size()) * bar + gap;
  const int width = left + static_cast<int>(methods.size()) * group_w + 140;
  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" font-size=\"11\">\n",
      width, top + height + 60);
  svg += fmt::format("<text x=\"{}\" y=\"18\" font-size=\"13\">All-task AUC</text>\n", left);
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = tick * 0.25;
    const int y = top + height - static_cast<int>(v * height);
    svg += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#ddd\"/>\n", left, y,
                       width - 140, y);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.2f}</text>\n", left - 4, y + 4, v);
  }
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const int x0 = left + static_cast<int>(m) * group_w + gap / 2;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const auto it = std::find_if(reports.begin(), reports.end(), [&](const EvalReport& r) {
        return r.method == methods[m] && (r.ratio ? percent(*r.ratio) : std::string("LOSO")) == series[s];
      });
      if (it == reports.end()) continue;
      const double v = std::clamp(it->all_tasks.mean, 0.0, 1.0);
      const int h = static_cast<int>(v * height);
      svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"><title>{} {} {:.3f}</title></rect>\n",
                         x0 + static_cast<int>(s) * bar, top + height - h, bar - 2, h,
                         kPalette[s % std::size(kPalette)], xml_escape(methods[m]), series[s], it->all_tasks.mean);
    }
    svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                       x0 + static_cast<int>(series.size()) * bar / 2, top + height + 16, xml_escape(methods[m]));
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const int y = top + 10 + static_cast<int>(s) * 16;
    svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n", width - 120, y,
                       kPalette[s % std::size(kPalette)]);
    svg += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", width - 104, y + 9, series[s]);
  }
  svg += "</svg>\n";
  return svg;
}

std::string render_importance_svg(const ImportanceTable& t) {
  const int row_h = 14;
  const int label_w = 190;
  const int bar_w = 220;
  const int panel_w = label_w + bar_w + 70;
  std::size_t rows = 0;
  for (const auto& c : t.columns) rows = std::max(rows, c.ranked.size());
  const int height = 40 + static_cast<int>(rows) * row_h;
  const int width = std::max<int>(panel_w, static_cast<int>(t.columns.size()) * panel_w);
  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" font-size=\"10\">\n",
      width, height);
  for (std::size_t ci = 0; ci < t.columns.size(); ++ci) {
    const auto& col = t.columns[ci];
    const int x0 = static_cast<int>(ci) * panel_w;
    double vmax = 0.0;
    for (const auto& [name, v] : col.ranked) vmax = std::max(vmax, v);
    svg += fmt::format("<text x=\"{}\" y=\"16\" font-size=\"12\">{}</text>\n", x0 + 4, xml_escape(col.name));
    for (std::size_t i = 0; i < col.ranked.size(); ++i) {
      const auto& [name, v] = col.ranked[i];
      const int y = 28 + static_cast<int>(i) * row_h;
      const int w = vmax > 0.0 ? static_cast<int>(bar_w * v / vmax) : 0;
      svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", x0 + label_w - 4, y + 10,
                         xml_escape(name));
      svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n", x0 + label_w, y + 2, w,
                         row_h - 3, kPalette[ci % std::size(kPalette)]);
      svg += fmt::format("<text x=\"{}\" y=\"{}\">{:.3g}</text>\n", x0 + label_w + w + 3, y + 10, v);
    }
  }
  svg += "</svg>\n";
  return svg;
}

void write_importance_csv(std::ostream& out, const ImportanceTable& t) {
  out << "rank";
  for (const auto& c : t.columns) out << ',' << c.name << " feature," << c.name << " value";
  out << '\n';
  std::size_t rows = 0;
  for (const auto& c : t.columns) rows = std::max(rows, c.ranked.size());
  for (std::size_t i = 0; i < rows; ++i) {
    out << i + 1;
    for (const auto& c : t.columns) {
      if (i < c.ranked.size()) out << fmt::format(",{},{:.17g}", c.ranked[i].first, c.ranked[i].second);
      else out << ",,";
    }
    out << '\n';
  }
}

}  // namespace gaitmtl
