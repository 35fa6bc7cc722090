#include <cmath>

#include <fmt/format.h>

#include "gaitmtl/errors.hpp"
#include "gaitmtl/mmtfl.hpp"

namespace gaitmtl {

namespace {

void check_dims(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.cols() != alpha.size() || X.rows() != y.size()) {
    throw DomainError(fmt::format("loss: X is {}x{}, alpha has {} entries, y has {}", X.rows(),
                                  X.cols(), alpha.size(), y.size()));
  }
}

}  // namespace

std::string_view to_string(LossKind k) {
  return k == LossKind::Logistic ? "logistic" : "least_squares";
}

LossKind parse_loss_kind(std::string_view s) {
  if (s == "logistic") return LossKind::Logistic;
  if (s == "least_squares") return LossKind::LeastSquares;
  throw DomainError(fmt::format("unknown loss '{}'", s));
}

LossAtPoint loss_at(LossKind kind, const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X,
                    const Eigen::VectorXd& y) {
  check_dims(alpha, X, y);
  LossAtPoint out;
  if (kind == LossKind::LeastSquares) {
    const Eigen::VectorXd r = y - X * alpha;
    out.value = r.squaredNorm();
    out.w = -2.0 * r;
    return out;
  }
  const Eigen::VectorXd margin = y.cwiseProduct(X * alpha);
  out.w.resize(margin.size());
  for (Eigen::Index i = 0; i < margin.size(); ++i) {
    // One exponential serves both the loss and its derivative.
    const double m = margin(i);
    const double e = std::exp(-std::abs(m));
    out.value += (m < 0.0 ? -m : 0.0) + std::log1p(e);
    out.w(i) = -y(i) * (m >= 0.0 ? e / (1.0 + e) : 1.0 / (1.0 + e));
  }
  return out;
}

LossValue logistic_loss(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& y) {
  const LossAtPoint p = loss_at(LossKind::Logistic, alpha, X, y);
  return {p.value, X.transpose() * p.w};
}

LossValue least_squares_loss(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& y) {
  const LossAtPoint p = loss_at(LossKind::LeastSquares, alpha, X, y);
  return {p.value, X.transpose() * p.w};
}

LossValue evaluate_loss(LossKind kind, const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& y) {
  return kind == LossKind::Logistic ? logistic_loss(alpha, X, y)
                                    : least_squares_loss(alpha, X, y);
}

double loss_only(LossKind kind, const Eigen::VectorXd& alpha, const Eigen::MatrixXd& X,
                 const Eigen::VectorXd& y) {
  return loss_at(kind, alpha, X, y).value;
}

}  // namespace gaitmtl
