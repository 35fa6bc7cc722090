#pragma once

// JSON persistence for trained models. Doubles are written in shortest
// round-trip form, so a save/load cycle reproduces every value bit for bit.

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "gaitmtl/eval.hpp"
#include "gaitmtl/mmtfl.hpp"

namespace gaitmtl {

nlohmann::json to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MmtflModel& m);
MmtflModel mmtfl_model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const StlModel& m);
StlModel stl_model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MethodSpec& m);
MethodSpec method_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainedModel& m);
// Unknown keys are ignored; missing or mistyped ones raise std::runtime_error.
TrainedModel trained_model_from_json(const nlohmann::json& j);

void write_model(std::ostream& out, const nlohmann::json& j);
nlohmann::json read_json(std::istream& in);
nlohmann::json load_json(const std::string& path);

}  // namespace gaitmtl
