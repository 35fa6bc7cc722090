#pragma once

// Rendering of evaluation results: JSON for machines, Markdown tables and
// SVG charts for people.

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "gaitmtl/eval.hpp"

namespace gaitmtl {

nlohmann::json to_json(const EvalReport& r);
EvalReport eval_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ImportanceTable& t);

// AUC mean +- sd grids (methods x ratios, methods x tasks), confusion
// matrices and, for leave-one-subject-out reports, per-subject counts.
std::string render_markdown(const std::vector<EvalReport>& reports);

// Grouped bars of the all-task AUC, one group per method.
std::string render_auc_svg(const std::vector<EvalReport>& reports);

// One panel per importance column, features in ranked order.
std::string render_importance_svg(const ImportanceTable& t);

// rank,<column>_feature,<column>_value,...
void write_importance_csv(std::ostream& out, const ImportanceTable& t);

}  // namespace gaitmtl
