#include "gaitmtl/phase_detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <unordered_map>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <json.hpp>

#include "gaitmtl/errors.hpp"
#include "text_util.hpp"

namespace gaitmtl {

namespace {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

Vec4 to_vec(const FootForces& f) { return Vec4(f[0], f[1], f[2], f[3]); }

struct Component {
  double weight = 0.0;
  Vec4 mean = Vec4::Zero();
  Mat4 cov = Mat4::Identity();
  // Cached from cov.
  Mat4 chol_inv = Mat4::Identity();  // inverse of the lower Cholesky factor
  double log_norm = 0.0;  // log weight - 0.5 (d log 2pi + log det)

  void refresh() {
    Eigen::LLT<Mat4> llt(cov);
    const Mat4 lower = llt.matrixL();
    chol_inv = lower.triangularView<Eigen::Lower>().solve(Mat4::Identity());
    double log_det = 0.0;
    for (int i = 0; i < 4; ++i) log_det += 2.0 * std::log(lower(i, i));
    log_norm = std::log(std::max(weight, std::numeric_limits<double>::min())) -
               0.5 * (4.0 * std::log(2.0 * std::numbers::pi) + log_det);
  }

  double log_density(const Vec4& x) const {
    const Vec4 d = x - mean;
    const Mat4& m = chol_inv;
    const double z0 = m(0, 0) * d(0);
    const double z1 = m(1, 0) * d(0) + m(1, 1) * d(1);
    const double z2 = m(2, 0) * d(0) + m(2, 1) * d(1) + m(2, 2) * d(2);
    const double z3 = m(3, 0) * d(0) + m(3, 1) * d(1) + m(3, 2) * d(2) + m(3, 3) * d(3);
    return log_norm - 0.5 * (z0 * z0 + z1 * z1 + z2 * z2 + z3 * z3);
  }
};

// Distinct samples with multiplicities; EM on these is the same as EM on
// the raw samples but skips the long runs of identical swing readings.
struct Points {
  std::vector<Vec4> x;
  std::vector<double> w;
  std::vector<std::size_t> index_of;  // raw sample -> distinct point
  double total = 0.0;
};

Points compress(std::span<const FootForces> data) {
  Points p;
  std::map<FootForces, std::size_t> slot;
  p.index_of.reserve(data.size());
  for (const auto& f : data) {
    auto [it, fresh] = slot.try_emplace(f, p.x.size());
    if (fresh) {
      p.x.push_back(to_vec(f));
      p.w.push_back(0.0);
    }
    p.w[it->second] += 1.0;
    p.index_of.push_back(it->second);
  }
  p.total = static_cast<double>(data.size());
  return p;
}

using RespMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct EmState {
  std::vector<Component> comps;
  RespMatrix resp;  // distinct points x k
  double log_likelihood = -std::numeric_limits<double>::infinity();
  int iterations = 0;
};

// k-means++ seeding over the raw samples; returns distinct-point indices.
std::vector<std::size_t> seed_centers(const Points& pts, int k, std::mt19937_64& rng) {
  const std::size_t n = pts.x.size();
  std::vector<std::size_t> centers;
  std::uniform_int_distribution<std::size_t> pick(0, pts.index_of.size() - 1);
  centers.push_back(pts.index_of[pick(rng)]);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (static_cast<int>(centers.size()) < k) {
    const Vec4& last = pts.x[centers.back()];
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (pts.x[i] - last).squaredNorm());
      total += pts.w[i] * d2[i];
    }
    if (!(total > 0.0)) break;
    double target = unit(rng) * total;
    std::size_t chosen = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      target -= pts.w[i] * d2[i];
      if (target <= 0.0 && d2[i] > 0.0) {
        chosen = i;
        break;
      }
    }
    while (d2[chosen] <= 0.0 && chosen > 0) --chosen;
    centers.push_back(chosen);
  }
  return centers;
}

void m_step(const Points& pts, EmState& st, double floor) {
  const std::size_t k = st.comps.size();
  const std::size_t n = pts.x.size();
  std::vector<double> nk(k, 0.0);
  std::vector<Vec4> sums(k, Vec4::Zero());
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = st.resp.row(static_cast<Eigen::Index>(i)).data();
    for (std::size_t j = 0; j < k; ++j) {
      const double wr = pts.w[i] * r[j];
      nk[j] += wr;
      sums[j] += wr * pts.x[i];
    }
  }
  std::vector<Vec4> means(k);
  std::vector<Mat4> covs(k, Mat4::Zero());
  for (std::size_t j = 0; j < k; ++j) means[j] = nk[j] < 1e-10 ? Vec4::Zero() : Vec4(sums[j] / nk[j]);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = st.resp.row(static_cast<Eigen::Index>(i)).data();
    for (std::size_t j = 0; j < k; ++j) {
      if (r[j] == 0.0) continue;
      const Vec4 d = pts.x[i] - means[j];
      covs[j].noalias() += (pts.w[i] * r[j]) * d * d.transpose();
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    auto& c = st.comps[j];
    if (nk[j] < 1e-10) {
      c.weight = 1e-12;
      c.refresh();
      continue;
    }
    c.weight = nk[j] / pts.total;
    c.mean = means[j];
    c.cov = covs[j] / nk[j];
    c.cov.diagonal().array() += floor;
    c.refresh();
  }
}

// Returns the total log-likelihood and fills responsibilities.
double e_step(const Points& pts, EmState& st) {
  const std::size_t k = st.comps.size();
  double ll = 0.0;
  for (std::size_t i = 0; i < pts.x.size(); ++i) {
    double* lp = st.resp.row(static_cast<Eigen::Index>(i)).data();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      lp[j] = st.comps[j].log_density(pts.x[i]);
      best = std::max(best, lp[j]);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double d = lp[j] - best;
      // exp(-745) underflows to zero anyway.
      lp[j] = d < -745.0 ? 0.0 : std::exp(d);
      sum += lp[j];
    }
    ll += pts.w[i] * (best + std::log(sum));
    for (std::size_t j = 0; j < k; ++j) lp[j] /= sum;
  }
  return ll;
}

EmState run_em(const Points& pts, int k, const GmmConfig& cfg, std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(pts.x.size());
  EmState st;
  st.comps.resize(static_cast<std::size_t>(k));
  st.resp = RespMatrix::Zero(n, k);

  const auto seeds = seed_centers(pts, k, rng);
  // Hard assignment to the nearest seed starts the first M-step.
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < seeds.size(); ++j) {
      const double d = (pts.x[static_cast<std::size_t>(i)] - pts.x[seeds[j]]).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    st.resp(i, static_cast<Eigen::Index>(best)) = 1.0;
  }
  m_step(pts, st, cfg.covariance_floor);

  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.max_iterations; ++it) {
    const double ll = e_step(pts, st);
    st.log_likelihood = ll;
    st.iterations = it + 1;
    if (std::isfinite(prev) && std::abs(ll - prev) <= cfg.tolerance * std::abs(ll)) break;
    prev = ll;
    m_step(pts, st, cfg.covariance_floor);
  }
  return st;
}

// Maximum-posterior component per raw sample, renumbered by first appearance.
std::vector<PhaseId> compact_labels(const Points& pts, const RespMatrix& resp) {
  std::vector<PhaseId> labels(pts.index_of.size());
  std::unordered_map<Eigen::Index, PhaseId> remap;
  for (std::size_t i = 0; i < pts.index_of.size(); ++i) {
    Eigen::Index arg = 0;
    resp.row(static_cast<Eigen::Index>(pts.index_of[i])).maxCoeff(&arg);
    auto [it, inserted] = remap.try_emplace(arg, static_cast<PhaseId>(remap.size()));
    labels[i] = it->second;
  }
  return labels;
}

GmmFit fit_compressed(const Points& pts, int k, const GmmConfig& cfg) {
  EmState best;
  for (int r = 0; r < cfg.restarts; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    EmState st = run_em(pts, k, cfg, rng);
    if (st.log_likelihood > best.log_likelihood) best = std::move(st);
  }

  GmmFit fit;
  fit.k = k;
  fit.log_likelihood = best.log_likelihood;
  const double params = (k - 1) + 4.0 * k + 10.0 * k;
  fit.bic = -2.0 * best.log_likelihood + params * std::log(pts.total);
  fit.iterations = best.iterations;
  for (const auto& c : best.comps) {
    fit.weights.push_back(c.weight);
    fit.means.push_back({c.mean(0), c.mean(1), c.mean(2), c.mean(3)});
  }
  fit.labels = compact_labels(pts, best.resp);
  return fit;
}

}  // namespace

GmmFit fit_gmm(std::span<const FootForces> data, int k, const GmmConfig& cfg) {
  if (k < 1) throw DomainError("fit_gmm: k must be positive");
  if (data.size() < static_cast<std::size_t>(k)) {
    throw DomainError("fit_gmm: fewer samples than components");
  }
  if (cfg.restarts < 1) throw DomainError("fit_gmm: restarts must be positive");
  return fit_compressed(compress(data), k, cfg);
}

PhaseHypothesisSet detect_phases_baseline(const Trial& trial, Foot foot, const GmmConfig& cfg) {
  if (!(2 <= cfg.k_min && cfg.k_min <= cfg.k_max && cfg.k_max <= 12)) {
    throw DomainError("phase detector requires 2 <= k_min <= k_max <= 12");
  }
  if (cfg.restarts < 1) throw DomainError("phase detector: restarts must be positive");
  if (trial.samples.empty()) throw DomainError("phase detector: empty trial");
  const auto data = foot_samples(trial, foot);
  const Points pts = compress(data);

  PhaseHypothesisSet out;
  out.foot = foot;
  const int distinct = static_cast<int>(pts.x.size());
  if (distinct <= 1) {
    out.degenerate = true;
    out.hypotheses.push_back({1.0, std::vector<PhaseId>(data.size(), 0), 1});
    return out;
  }
  const int k_hi = std::min(cfg.k_max, distinct);
  const int k_lo = std::min(cfg.k_min, k_hi);

  GmmFit best;
  best.bic = std::numeric_limits<double>::infinity();
  for (int k = k_lo; k <= k_hi; ++k) {
    GmmFit fit = fit_compressed(pts, k, cfg);
    if (fit.bic < best.bic) best = std::move(fit);
  }
  PhaseHypothesis h;
  h.weight = 1.0;
  h.num_phases = count_distinct(best.labels);
  h.labels = std::move(best.labels);
  out.hypotheses.push_back(std::move(h));
  return out;
}

PhaseHypothesisSet parse_hypotheses_jsonl(std::istream& in, Foot foot, std::size_t sample_count) {
  PhaseHypothesisSet out;
  out.foot = foot;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!obj.contains("weight") || !obj["weight"].is_number() || !obj.contains("labels") ||
        !obj["labels"].is_array()) {
      throw ParseError("hypothesis needs numeric 'weight' and array 'labels'", line_no);
    }
    PhaseHypothesis h;
    h.weight = obj["weight"].get<double>();
    for (const auto& v : obj["labels"]) {
      if (!v.is_number_integer()) throw ParseError("labels must be integers", line_no);
      h.labels.push_back(v.get<PhaseId>());
    }
    h.num_phases = count_distinct(h.labels);
    out.hypotheses.push_back(std::move(h));
  }
  check_hypotheses(out, sample_count);
  return out;
}

PhaseHypothesisSet load_hypotheses_jsonl(const std::string& path, Foot foot,
                                         std::size_t sample_count) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open hypothesis file: " + path);
  return parse_hypotheses_jsonl(in, foot, sample_count);
}

void write_hypotheses_jsonl(std::ostream& out, const PhaseHypothesisSet& phs) {
  for (const auto& h : phs.hypotheses) {
    nlohmann::json obj;
    obj["weight"] = h.weight;
    obj["labels"] = h.labels;
    out << obj.dump() << '\n';
  }
}

}  // namespace gaitmtl
