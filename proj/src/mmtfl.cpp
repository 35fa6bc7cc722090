#include "gaitmtl/mmtfl.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "gaitmtl/errors.hpp"

namespace gaitmtl {

void check_task(const TaskData& task, bool require_both_classes) {
  if (task.X.rows() != task.y.size()) {
    throw DomainError(fmt::format("task '{}': {} rows but {} labels", task.name, task.X.rows(),
                                  task.y.size()));
  }
  if (!task.ids.empty() && task.ids.size() != static_cast<std::size_t>(task.y.size())) {
    throw DomainError(fmt::format("task '{}': ids do not match row count", task.name));
  }
  bool pos = false;
  bool neg = false;
  for (Eigen::Index i = 0; i < task.y.size(); ++i) {
    if (task.y(i) == 1.0) pos = true;
    else if (task.y(i) == -1.0) neg = true;
    else throw DomainError(fmt::format("task '{}': label {} is not +-1", task.name, task.y(i)));
  }
  if (require_both_classes && !(pos && neg)) {
    throw DomainError(fmt::format("task '{}' needs both classes for training", task.name));
  }
}

void check_spec(const RegularizerSpec& spec) {
  if (spec.p != 1 && spec.p != 2) throw DomainError("regularizer power p must be 1 or 2");
  if (spec.k != 1 && spec.k != 2) throw DomainError("regularizer power k must be 1 or 2");
  const bool ok = spec.diagnostic ? (spec.gamma1 >= 0.0 && spec.gamma2 >= 0.0)
                                  : (spec.gamma1 > 0.0 && spec.gamma2 > 0.0);
  if (!ok || !std::isfinite(spec.gamma1) || !std::isfinite(spec.gamma2)) {
    throw DomainError("gamma1 and gamma2 must be positive");
  }
}

double power_norm(const Eigen::VectorXd& v, int q) {
  return q == 1 ? v.lpNorm<1>() : v.squaredNorm();
}

double objective(const Eigen::VectorXd& c, const Eigen::MatrixXd& betas,
                 const std::vector<TaskData>& tasks, const RegularizerSpec& spec, LossKind loss) {
  if ((c.array() < 0.0).any()) throw DomainError("objective: c must be non-negative");
  if (betas.rows() != c.size() || betas.cols() != static_cast<Eigen::Index>(tasks.size())) {
    throw DomainError("objective: betas must be d x T");
  }
  double value = 0.0;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const Eigen::VectorXd beta = betas.col(static_cast<Eigen::Index>(t));
    value += loss_only(loss, c.cwiseProduct(beta), tasks[t].X, tasks[t].y);
    value += spec.gamma1 * power_norm(beta, spec.p);
  }
  return value + spec.gamma2 * power_norm(c, spec.k);
}

namespace {

// Composite problem min f(x) + g(x) for the proximal-gradient driver.
// `gradient` refers to the point most recently passed to `smooth_value`.
struct Composite {
  std::function<double(const Eigen::VectorXd&)> smooth_value;
  std::function<Eigen::VectorXd()> gradient;
  std::function<double(const Eigen::VectorXd&)> penalty;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> prox;
};

double relative_decrease(double before, double after) {
  const double scale = std::max(std::abs(before), 1e-300);
  return (before - after) / scale;
}

// Backtracking proximal gradient. Steps start at 1.0 and halve until
//   F(x+) <= F(x) - (sigma / s) ||x+ - x||^2.
// Later iterations retry from twice the last accepted step, capped at 1.0.
// Every accepted step lowers F, so the result is never worse than x0.
BlockResult proximal_gradient(const Composite& prob, Eigen::VectorXd x, const InnerConfig& cfg) {
  BlockResult res;
  double F = prob.smooth_value(x) + prob.penalty(x);
  Eigen::VectorXd grad = prob.gradient();
  double step = 1.0;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    res.iterations = it + 1;
    Eigen::VectorXd candidate;
    double F_new = F;
    bool accepted = false;
    while (step > 1e-30) {
      candidate = prob.prox(x - step * grad, step);
      F_new = prob.smooth_value(candidate) + prob.penalty(candidate);
      const double move = (candidate - x).squaredNorm();
      if (std::isfinite(F_new) && F_new <= F - cfg.sufficient_decrease / step * move) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No step lowers F: x is stationary up to rounding.
      res.converged = true;
      break;
    }
    const double rel = relative_decrease(F, F_new);
    x = std::move(candidate);
    F = F_new;
    if (rel < cfg.tolerance) {
      res.converged = true;
      break;
    }
    grad = prob.gradient();
    step = std::min(1.0, 2.0 * step);
  }
  res.x = std::move(x);
  res.objective = F;
  return res;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t) {
  return v.unaryExpr([t](double a) { return a > t ? a - t : (a < -t ? a + t : 0.0); });
}

}  // namespace

BlockResult solve_beta_step(const Eigen::VectorXd& c, const TaskData& task,
                            const Eigen::VectorXd& beta0, const RegularizerSpec& spec,
                            LossKind loss, const InnerConfig& cfg) {
  if ((c.array() < 0.0).any()) throw DomainError("beta step: c must be non-negative");
  if (c.size() != task.X.cols() || beta0.size() != c.size()) {
    throw DomainError("beta step: dimension mismatch");
  }
  const double g1 = spec.gamma1;
  const bool smooth_penalty = spec.p == 2;
  LossAtPoint at;
  Eigen::VectorXd at_beta;
  Composite prob;
  prob.smooth_value = [&](const Eigen::VectorXd& beta) {
    at = loss_at(loss, c.cwiseProduct(beta), task.X, task.y);
    at_beta = beta;
    return smooth_penalty ? at.value + g1 * beta.squaredNorm() : at.value;
  };
  prob.gradient = [&]() -> Eigen::VectorXd {
    Eigen::VectorXd g = c.cwiseProduct(task.X.transpose() * at.w);
    if (smooth_penalty) g += 2.0 * g1 * at_beta;
    return g;
  };
  prob.penalty = [&](const Eigen::VectorXd& beta) {
    return smooth_penalty ? 0.0 : g1 * beta.lpNorm<1>();
  };
  prob.prox = [&](const Eigen::VectorXd& v, double s) -> Eigen::VectorXd {
    return smooth_penalty ? v : soft_threshold(v, s * g1);
  };
  return proximal_gradient(prob, beta0, cfg);
}

BlockResult solve_c_step(const Eigen::MatrixXd& betas, const std::vector<TaskData>& tasks,
                         const Eigen::VectorXd& c0, const RegularizerSpec& spec, LossKind loss,
                         const InnerConfig& cfg) {
  if (betas.cols() != static_cast<Eigen::Index>(tasks.size()) || betas.rows() != c0.size()) {
    throw DomainError("c step: betas must be d x T");
  }
  const double g2 = spec.gamma2;
  const bool smooth_penalty = spec.k == 2;
  std::vector<LossAtPoint> at(tasks.size());
  Eigen::VectorXd at_c;
  Composite prob;
  prob.smooth_value = [&](const Eigen::VectorXd& c) {
    double v = 0.0;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      at[t] = loss_at(loss, c.cwiseProduct(betas.col(static_cast<Eigen::Index>(t))), tasks[t].X,
                      tasks[t].y);
      v += at[t].value;
    }
    at_c = c;
    return smooth_penalty ? v + g2 * c.squaredNorm() : v;
  };
  prob.gradient = [&]() -> Eigen::VectorXd {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(at_c.size());
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      g += betas.col(static_cast<Eigen::Index>(t)).cwiseProduct(tasks[t].X.transpose() * at[t].w);
    }
    if (smooth_penalty) g += 2.0 * g2 * at_c;
    return g;
  };
  // On c >= 0 the l1 norm is the plain sum.
  prob.penalty = [&](const Eigen::VectorXd& c) { return smooth_penalty ? 0.0 : g2 * c.sum(); };
  prob.prox = [&](const Eigen::VectorXd& v, double s) -> Eigen::VectorXd {
    const double shift = smooth_penalty ? 0.0 : s * g2;
    return (v.array() - shift).max(0.0).matrix();
  };
  return proximal_gradient(prob, c0.cwiseMax(0.0), cfg);
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
  Standardizer s;
  const auto n = static_cast<double>(X.rows());
  s.mean = X.rows() > 0 ? Eigen::VectorXd(X.colwise().mean().transpose())
                        : Eigen::VectorXd::Zero(X.cols());
  s.scale = Eigen::VectorXd::Ones(X.cols());
  if (X.rows() > 1) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double var = (X.col(j).array() - s.mean(j)).square().sum() / n;
      if (var > 1e-24) s.scale(j) = std::sqrt(var);
    }
  }
  return s;
}

Standardizer Standardizer::identity(Eigen::Index d) {
  return {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)};
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
  if (empty()) return X;
  if (X.cols() != mean.size()) throw DomainError("standardizer: column count mismatch");
  return ((X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array()).matrix();
}

MmtflModel fit_mmtfl(const std::vector<TaskData>& tasks, const RegularizerSpec& spec, LossKind loss,
                     std::uint64_t seed, const OuterConfig& cfg) {
  check_spec(spec);
  if (tasks.empty()) throw DomainError("fit_mmtfl needs at least one task");
  const Eigen::Index d = tasks.front().X.cols();
  for (const auto& t : tasks) {
    check_task(t);
    if (t.X.cols() != d) throw DomainError("all tasks must share the feature dimension");
  }
  const auto T = static_cast<Eigen::Index>(tasks.size());

  MmtflModel model;
  model.spec = spec;
  model.loss = loss;
  model.seed = seed;
  for (const auto& t : tasks) model.task_names.push_back(t.name);
  model.c = Eigen::VectorXd::Ones(d);
  model.betas = Eigen::MatrixXd::Zero(d, T);

  double prev = objective(model.c, model.betas, tasks, spec, loss);
  model.diagnostics.emplace_back(0, prev);
  bool inner_ok = true;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    for (Eigen::Index t = 0; t < T; ++t) {
      const auto r = solve_beta_step(model.c, tasks[static_cast<std::size_t>(t)],
                                     model.betas.col(t), spec, loss, cfg.inner);
      model.betas.col(t) = r.x;
      inner_ok = inner_ok && r.converged;
    }
    const auto rc = solve_c_step(model.betas, tasks, model.c, spec, loss, cfg.inner);
    model.c = rc.x;
    inner_ok = inner_ok && rc.converged;

    const double obj = objective(model.c, model.betas, tasks, spec, loss);
    if (!std::isfinite(obj)) throw NumericalError("MMTFL objective became non-finite");
    model.diagnostics.emplace_back(it, obj);
    if (cfg.on_iteration) {
      const Eigen::MatrixXd alphas = model.c.asDiagonal() * model.betas;
      cfg.on_iteration(it, model.c, model.betas, alphas);
    }
    if (relative_decrease(prev, obj) < cfg.tolerance) {
      model.converged = true;
      break;
    }
    prev = obj;
  }
  model.alphas = model.c.asDiagonal() * model.betas;
  if (!model.converged) {
    model.warnings.push_back(fmt::format("outer loop hit {} iterations", cfg.max_iterations));
  }
  if (!inner_ok) model.warnings.emplace_back("an inner block solve hit its iteration limit");
  return model;
}

std::string_view to_string(StlRegularizer r) {
  return r == StlRegularizer::Lasso ? "lasso" : "ridge";
}

StlModel fit_stl(const TaskData& task, double lambda, StlRegularizer regularizer, LossKind loss,
                 const InnerConfig& cfg) {
  check_task(task);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive");
  const bool ridge = regularizer == StlRegularizer::Ridge;
  LossAtPoint at;
  Eigen::VectorXd at_a;
  Composite prob;
  prob.smooth_value = [&](const Eigen::VectorXd& a) {
    at = loss_at(loss, a, task.X, task.y);
    at_a = a;
    return ridge ? at.value + lambda * a.squaredNorm() : at.value;
  };
  prob.gradient = [&]() -> Eigen::VectorXd {
    Eigen::VectorXd g = task.X.transpose() * at.w;
    if (ridge) g += 2.0 * lambda * at_a;
    return g;
  };
  prob.penalty = [&](const Eigen::VectorXd& a) { return ridge ? 0.0 : lambda * a.lpNorm<1>(); };
  prob.prox = [&](const Eigen::VectorXd& v, double s) -> Eigen::VectorXd {
    return ridge ? v : soft_threshold(v, s * lambda);
  };
  const auto r = proximal_gradient(prob, Eigen::VectorXd::Zero(task.X.cols()), cfg);
  StlModel m;
  m.alpha = r.x;
  m.lambda = lambda;
  m.regularizer = regularizer;
  m.loss = loss;
  m.task_name = task.name;
  m.converged = r.converged;
  m.iterations = r.iterations;
  return m;
}

Prediction predict(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X) {
  if (X.cols() != alpha.size()) {
    throw DomainError(fmt::format("predict: X has {} columns, model has {} features", X.cols(),
                                  alpha.size()));
  }
  Prediction p;
  p.scores = X * alpha;
  p.labels.reserve(static_cast<std::size_t>(p.scores.size()));
  for (Eigen::Index i = 0; i < p.scores.size(); ++i) p.labels.push_back(p.scores(i) >= 0.0 ? 1 : -1);
  return p;
}

Prediction predict(const MmtflModel& model, Eigen::Index task, const Eigen::MatrixXd& X) {
  if (task < 0 || task >= model.alphas.cols()) throw DomainError("predict: task index out of range");
  const Eigen::MatrixXd Z =
      model.scaling.empty() ? X : model.scaling[static_cast<std::size_t>(task)].apply(X);
  return predict(Eigen::VectorXd(model.alphas.col(task)), Z);
}

Prediction predict(const StlModel& model, const Eigen::MatrixXd& X) {
  return predict(model.alpha, model.scaling.apply(X));
}

}  // namespace gaitmtl
