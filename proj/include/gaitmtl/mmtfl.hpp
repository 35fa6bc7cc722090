#pragma once

// Multiplicative multi-task feature learning. Each task's weight vector is
// factorized as alpha_t = c .* beta_t with a shared non-negative c:
//
//   min_{beta_t, c >= 0}  sum_t L(c .* beta_t; X_t, y_t)
//                         + gamma1 * sum_t ||beta_t||_p^p + gamma2 * ||c||_k^k
//
// solved by alternating proximal-gradient block steps. Single-task ridge and
// lasso baselines share the same machinery.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace gaitmtl {

enum class LossKind { Logistic, LeastSquares };

std::string_view to_string(LossKind k);
LossKind parse_loss_kind(std::string_view s);

struct TaskData {
  std::string name;
  Eigen::MatrixXd X;  // rows = examples
  Eigen::VectorXd y;  // labels in {-1, +1}
  // Identifiers of the rows (dataset row indices, or task-local ids); used
  // by splitters and reports. Empty means 0..n-1.
  std::vector<std::size_t> ids;

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }
};

// Throws DomainError unless dims agree, labels are +-1 and both classes exist.
void check_task(const TaskData& task, bool require_both_classes = true);

struct LossValue {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

// sum_i log(1 + exp(-y_i x_i.alpha)), evaluated without overflow.
LossValue logistic_loss(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& y);
// sum_i (y_i - x_i.alpha)^2
LossValue least_squares_loss(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& y);

LossValue evaluate_loss(LossKind kind, const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& y);
double loss_only(LossKind kind, const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X,
                 const Eigen::VectorXd& y);

// Loss plus its derivative with respect to X alpha; the gradient is X^T w.
struct LossAtPoint {
  double value = 0.0;
  Eigen::VectorXd w;
};

LossAtPoint loss_at(LossKind kind, const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X,
                    const Eigen::VectorXd& y);

struct RegularizerSpec {
  int p = 2;  // power on beta, 1 or 2
  int k = 1;  // power on c, 1 or 2
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  // Permits zero gammas (pure-loss diagnostics).
  bool diagnostic = false;
};

void check_spec(const RegularizerSpec& spec);

// ||v||_q^q for q in {1, 2}.
double power_norm(const Eigen::VectorXd& v, int q);

// betas: d x T, column t = beta_t.
double objective(const Eigen::VectorXd& c, const Eigen::MatrixXd& betas,
                 const std::vector<TaskData>& tasks, const RegularizerSpec& spec, LossKind loss);

struct InnerConfig {
  double tolerance = 1e-8;  // relative objective decrease
  int max_iterations = 500;
  double sufficient_decrease = 1e-4;
};

struct BlockResult {
  Eigen::VectorXd x;
  double objective = 0.0;  // block objective at x
  int iterations = 0;
  bool converged = false;
};

// Minimizes L(c .* beta; X_t, y_t) + gamma1 ||beta||_p^p from `beta0`.
BlockResult solve_beta_step(const Eigen::VectorXd& c, const TaskData& task,
                            const Eigen::VectorXd& beta0, const RegularizerSpec& spec,
                            LossKind loss, const InnerConfig& cfg = {});

// Minimizes sum_t L(c .* beta_t; X_t, y_t) + gamma2 ||c||_k^k over c >= 0.
BlockResult solve_c_step(const Eigen::MatrixXd& betas, const std::vector<TaskData>& tasks,
                         const Eigen::VectorXd& c0, const RegularizerSpec& spec, LossKind loss,
                         const InnerConfig& cfg = {});

// Per-column affine scaling fitted on training rows; zero-variance columns
// keep scale 1.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& X);
  static Standardizer identity(Eigen::Index d);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
  bool empty() const { return mean.size() == 0; }
};

struct OuterConfig {
  double tolerance = 1e-6;
  int max_iterations = 200;
  InnerConfig inner;
  // Called after every outer iteration with (iteration, c, betas, alphas).
  std::function<void(int, const Eigen::VectorXd&, const Eigen::MatrixXd&, const Eigen::MatrixXd&)>
      on_iteration;
};

struct MmtflModel {
  Eigen::VectorXd c;
  Eigen::MatrixXd betas;   // d x T
  Eigen::MatrixXd alphas;  // d x T, alphas(j,t) = c(j) * betas(j,t)
  RegularizerSpec spec;
  LossKind loss = LossKind::Logistic;
  std::vector<std::pair<int, double>> diagnostics;  // (outer iteration, objective)
  std::vector<std::string> feature_names;
  std::vector<std::string> task_names;
  std::vector<Standardizer> scaling;  // per task; empty when fit on raw inputs
  std::uint64_t seed = 0;
  bool converged = false;
  std::vector<std::string> warnings;

  Eigen::Index num_features() const { return c.size(); }
  Eigen::Index num_tasks() const { return betas.cols(); }
};

// Alternates beta steps (every task) and a c step from c = 1, beta = 0.
// Tasks are expected to be standardized already.
MmtflModel fit_mmtfl(const std::vector<TaskData>& tasks, const RegularizerSpec& spec,
                     LossKind loss = LossKind::Logistic, std::uint64_t seed = 0,
                     const OuterConfig& cfg = {});

enum class StlRegularizer { Lasso, Ridge };

std::string_view to_string(StlRegularizer r);

struct StlModel {
  Eigen::VectorXd alpha;
  double lambda = 1.0;
  StlRegularizer regularizer = StlRegularizer::Ridge;
  LossKind loss = LossKind::LeastSquares;
  std::string task_name;
  Standardizer scaling;
  bool converged = false;
  int iterations = 0;
};

// Minimizes L(alpha) + lambda * (||alpha||_1 or ||alpha||_2^2).
StlModel fit_stl(const TaskData& task, double lambda, StlRegularizer regularizer,
                 LossKind loss = LossKind::LeastSquares, const InnerConfig& cfg = {});

struct Prediction {
  Eigen::VectorXd scores;
  std::vector<int> labels;  // sign(score), sign(0) = +1
};

Prediction predict(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X);
// Applies the model's stored scaling for `task` first.
Prediction predict(const MmtflModel& model, Eigen::Index task, const Eigen::MatrixXd& X);
Prediction predict(const StlModel& model, const Eigen::MatrixXd& X);

}  // namespace gaitmtl
