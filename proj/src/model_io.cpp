#include "gaitmtl/model_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "gaitmtl/errors.hpp"

namespace gaitmtl {

using nlohmann::json;

namespace {

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd to_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Matrices are stored column by column (one array per task).
json cols(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(vec(m.col(c)));
  return out;
}

Eigen::MatrixXd from_cols(const json& j, Eigen::Index rows) {
  Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(j.size()));
  for (std::size_t c = 0; c < j.size(); ++c) {
    const Eigen::VectorXd v = to_vec(j[c]);
    if (v.size() != rows) throw std::runtime_error("model: column length mismatch");
    m.col(static_cast<Eigen::Index>(c)) = v;
  }
  return m;
}

json spec_json(const RegularizerSpec& s) {
  return {{"p", s.p}, {"k", s.k}, {"gamma1", s.gamma1}, {"gamma2", s.gamma2}, {"diagnostic", s.diagnostic}};
}

RegularizerSpec spec_from(const json& j) {
  RegularizerSpec s;
  s.p = j.at("p").get<int>();
  s.k = j.at("k").get<int>();
  s.gamma1 = j.at("gamma1").get<double>();
  s.gamma2 = j.at("gamma2").get<double>();
  s.diagnostic = j.value("diagnostic", false);
  return s;
}

StlRegularizer parse_stl(const std::string& s) {
  if (s == "ridge") return StlRegularizer::Ridge;
  if (s == "lasso") return StlRegularizer::Lasso;
  throw std::runtime_error(fmt::format("model: unknown regularizer '{}'", s));
}

template <typename Fn>
auto guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw std::runtime_error(fmt::format("{}: {}", what, e.what()));
  }
}

}  // namespace

json to_json(const Standardizer& s) { return {{"mean", vec(s.mean)}, {"scale", vec(s.scale)}}; }

Standardizer standardizer_from_json(const json& j) {
  return guarded("standardizer", [&] {
    Standardizer s;
    s.mean = to_vec(j.at("mean"));
    s.scale = to_vec(j.at("scale"));
    if (s.mean.size() != s.scale.size()) throw std::runtime_error("standardizer: length mismatch");
    return s;
  });
}

json to_json(const MmtflModel& m) {
  json scaling = json::array();
  for (const auto& s : m.scaling) scaling.push_back(to_json(s));
  json diag = json::array();
  for (const auto& [it, obj] : m.diagnostics) diag.push_back({it, obj});
  return {{"spec", spec_json(m.spec)},
          {"loss", std::string(to_string(m.loss))},
          {"feature_names", m.feature_names},
          {"task_names", m.task_names},
          {"scaling", scaling},
          {"c", vec(m.c)},
          {"betas", cols(m.betas)},
          {"alphas", cols(m.alphas)},
          {"diagnostics", diag},
          {"seed", m.seed},
          {"converged", m.converged},
          {"warnings", m.warnings}};
}

MmtflModel mmtfl_model_from_json(const json& j) {
  return guarded("mmtfl model", [&] {
    MmtflModel m;
    m.spec = spec_from(j.at("spec"));
    m.loss = parse_loss_kind(j.at("loss").get<std::string>());
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.task_names = j.at("task_names").get<std::vector<std::string>>();
    for (const auto& s : j.at("scaling")) m.scaling.push_back(standardizer_from_json(s));
    m.c = to_vec(j.at("c"));
    m.betas = from_cols(j.at("betas"), m.c.size());
    m.alphas = from_cols(j.at("alphas"), m.c.size());
    for (const auto& d : j.at("diagnostics")) m.diagnostics.emplace_back(d.at(0).get<int>(), d.at(1).get<double>());
    m.seed = j.value("seed", std::uint64_t{0});
    m.converged = j.value("converged", false);
    m.warnings = j.value("warnings", std::vector<std::string>{});
    if (m.alphas.cols() != m.betas.cols()) throw std::runtime_error("mmtfl model: alphas/betas shape mismatch");
    return m;
  });
}

json to_json(const StlModel& m) {
  return {{"task_name", m.task_name},
          {"regularizer", std::string(to_string(m.regularizer))},
          {"lambda", m.lambda},
          {"loss", std::string(to_string(m.loss))},
          {"scaling", to_json(m.scaling)},
          {"alpha", vec(m.alpha)},
          {"converged", m.converged},
          {"iterations", m.iterations}};
}

StlModel stl_model_from_json(const json& j) {
  return guarded("stl model", [&] {
    StlModel m;
    m.task_name = j.at("task_name").get<std::string>();
    m.regularizer = parse_stl(j.at("regularizer").get<std::string>());
    m.lambda = j.at("lambda").get<double>();
    m.loss = parse_loss_kind(j.at("loss").get<std::string>());
    m.scaling = standardizer_from_json(j.at("scaling"));
    m.alpha = to_vec(j.at("alpha"));
    m.converged = j.value("converged", false);
    m.iterations = j.value("iterations", 0);
    return m;
  });
}

json to_json(const MethodSpec& m) {
  json j = {{"name", m.name},
            {"kind", m.kind == MethodKind::Mmtfl ? "mmtfl" : "stl"},
            {"loss", std::string(to_string(m.loss))},
            {"solver",
             {{"tolerance", m.solver.tolerance},
              {"max_iterations", m.solver.max_iterations},
              {"inner_tolerance", m.solver.inner.tolerance},
              {"inner_max_iterations", m.solver.inner.max_iterations}}}};
  if (m.kind == MethodKind::Mmtfl) {
    j["spec"] = spec_json(m.reg);
  } else {
    j["regularizer"] = std::string(to_string(m.stl));
    j["lambda"] = m.lambda;
  }
  return j;
}

MethodSpec method_from_json(const json& j) {
  return guarded("method", [&] {
    MethodSpec m = method_from_name(j.at("name").get<std::string>());
    m.loss = parse_loss_kind(j.at("loss").get<std::string>());
    if (m.kind == MethodKind::Mmtfl) {
      m.reg = spec_from(j.at("spec"));
    } else {
      m.stl = parse_stl(j.at("regularizer").get<std::string>());
      m.lambda = j.at("lambda").get<double>();
    }
    if (j.contains("solver")) {
      const auto& s = j["solver"];
      m.solver.tolerance = s.value("tolerance", m.solver.tolerance);
      m.solver.max_iterations = s.value("max_iterations", m.solver.max_iterations);
      m.solver.inner.tolerance = s.value("inner_tolerance", m.solver.inner.tolerance);
      m.solver.inner.max_iterations = s.value("inner_max_iterations", m.solver.inner.max_iterations);
    }
    return m;
  });
}

json to_json(const TrainedModel& m) {
  json j = {{"format", "gaitmtl-model"},
            {"version", 1},
            {"method", to_json(m.method)},
            {"task_names", m.task_names},
            {"feature_names", m.feature_names}};
  if (m.mmtfl) {
    j["mmtfl"] = to_json(*m.mmtfl);
  } else {
    json stl = json::array();
    for (const auto& s : m.stl) stl.push_back(to_json(s));
    j["stl"] = stl;
  }
  return j;
}

TrainedModel trained_model_from_json(const json& j) {
  return guarded("model", [&] {
    if (j.value("format", std::string{}) != "gaitmtl-model") {
      throw std::runtime_error("model: not a gaitmtl model document");
    }
    TrainedModel m;
    m.method = method_from_json(j.at("method"));
    m.task_names = j.at("task_names").get<std::vector<std::string>>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (j.contains("mmtfl")) {
      m.mmtfl = mmtfl_model_from_json(j["mmtfl"]);
    } else {
      for (const auto& s : j.at("stl")) m.stl.push_back(stl_model_from_json(s));
    }
    return m;
  });
}

void write_model(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

json read_json(std::istream& in) {
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(fmt::format("invalid JSON: {}", e.what()));
  }
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));
  return read_json(in);
}

}  // namespace gaitmtl
