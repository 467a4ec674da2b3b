#include "owcluster/selection.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "owcluster/validity.hpp"

namespace owcluster {
namespace {

constexpr double kObservationNoise = 1e-6;
constexpr std::size_t kAcquisitionGrid = 2001;
constexpr std::size_t kLengthScaleGrid = 31;

void check_range(std::size_t n, std::size_t k_min, std::size_t k_max) {
  if (k_min < 2 || k_min > k_max || k_max + 1 > n) {
    throw Error(ErrorCode::BadRange, "need 2 <= k_min <= k_max <= n-1, got [" +
                                         std::to_string(k_min) + ", " + std::to_string(k_max) +
                                         "] with n=" + std::to_string(n));
  }
}

// Caches the Euclidean matrix used for scoring and the engine's own matrix.
class CandidateScorer {
 public:
  CandidateScorer(const EmbeddingMatrix& y, const EngineConfig& engine)
      : y_(y), engine_(engine), euclidean_(pairwise_distance_matrix(y, Metric::euclidean())) {
    if (engine.kind != EngineKind::KMeans) {
      const bool plain = engine.metric.kind == MetricKind::Euclidean && !engine.metric.normalized;
      if (!plain) medoid_ = distance_matrix(y, engine.metric);
    }
  }

  std::pair<ClusterAssignment, double> evaluate(std::size_t k) const {
    const DistanceMatrix* medoid = nullptr;
    if (engine_.kind != EngineKind::KMeans) medoid = medoid_ ? &*medoid_ : &euclidean_;
    auto labels = run_engine(y_, k, engine_, medoid);
    const double sil = silhouette_score(euclidean_, labels);
    return {std::move(labels), sil};
  }

 private:
  const EmbeddingMatrix& y_;
  const EngineConfig& engine_;
  DistanceMatrix euclidean_;
  std::optional<DistanceMatrix> medoid_;
};

std::size_t nearest_free(double target, std::size_t k_min, std::size_t k_max,
                         const std::set<std::size_t>& taken) {
  const double clamped = std::clamp(target, static_cast<double>(k_min), static_cast<double>(k_max));
  const auto center = static_cast<std::size_t>(std::llround(clamped));
  for (std::size_t step = 0; step <= k_max - k_min; ++step) {
    if (center >= k_min + step && !taken.count(center - step)) return center - step;
    if (center + step <= k_max && !taken.count(center + step)) return center + step;
  }
  throw Error(ErrorCode::BudgetTooSmall, "no unevaluated k left");
}

}  // namespace

ClusterAssignment run_engine(const EmbeddingMatrix& y, std::size_t k, const EngineConfig& engine,
                             const DistanceMatrix* medoid_distances) {
  const RngSeed seed = derive_seed(engine.seed, k);
  if (engine.kind == EngineKind::KMeans) {
    KMeansConfig cfg = engine.kmeans;
    cfg.k = k;
    cfg.seed = seed;
    return kmeans(y, cfg);
  }
  MedoidConfig cfg = engine.medoid;
  cfg.k = k;
  cfg.seed = seed;
  std::optional<DistanceMatrix> own;
  if (!medoid_distances) {
    own = distance_matrix(y, engine.metric);
    medoid_distances = &*own;
  }
  ClusterAssignment a = engine.kind == EngineKind::FasterPAM ? fasterpam(*medoid_distances, cfg)
                                                              : fastermsc(*medoid_distances, cfg);
  a.attach_centroids(y);
  return a;
}

SweepResult sweep_estimate(const EmbeddingMatrix& y, std::size_t k_min, std::size_t k_max,
                           const EngineConfig& engine) {
  check_range(y.rows(), k_min, k_max);
  const CandidateScorer scorer(y, engine);
  SweepResult result;
  result.best_sil = -std::numeric_limits<double>::infinity();
  for (std::size_t k = k_min; k <= k_max; ++k) {
    auto [labels, sil] = scorer.evaluate(k);
    result.trace.emplace_back(k, sil);
    if (sil > result.best_sil) {
      result.best_sil = sil;
      result.best_k = k;
      result.best_labels = std::move(labels);
    }
  }
  return result;
}

SweepResult bayes_estimate(const EmbeddingMatrix& y, const BayesOptConfig& cfg,
                           const EngineConfig& engine) {
  check_range(y.rows(), cfg.k_min, cfg.k_max);
  const std::size_t count = cfg.k_max - cfg.k_min + 1;
  if (cfg.budget > count) {
    throw Error(ErrorCode::BadRange, "budget " + std::to_string(cfg.budget) + " exceeds the " +
                                         std::to_string(count) + " candidates");
  }
  if (cfg.budget < count && (cfg.init_points < 1 || cfg.init_points >= cfg.budget)) {
    throw Error(ErrorCode::BudgetTooSmall, "budget " + std::to_string(cfg.budget) +
                                               " must exceed init_points " +
                                               std::to_string(cfg.init_points));
  }
  if (cfg.budget == 0) throw Error(ErrorCode::BudgetTooSmall, "budget must be positive");

  const CandidateScorer scorer(y, engine);
  SweepResult result;
  result.best_sil = -std::numeric_limits<double>::infinity();
  std::set<std::size_t> taken;
  std::vector<double> xs, ys;
  const double span = static_cast<double>(cfg.k_max - cfg.k_min);
  const auto record = [&](std::size_t k) {
    auto [labels, sil] = scorer.evaluate(k);
    taken.insert(k);
    result.trace.emplace_back(k, sil);
    xs.push_back(span > 0 ? static_cast<double>(k - cfg.k_min) / span : 0.0);
    ys.push_back(sil);
    if (sil > result.best_sil || (sil == result.best_sil && k < result.best_k)) {
      result.best_sil = sil;
      result.best_k = k;
      result.best_labels = std::move(labels);
    }
  };

  if (cfg.budget == count) {
    for (std::size_t k = cfg.k_min; k <= cfg.k_max; ++k) record(k);
    return result;
  }

  // evenly spaced initial design
  for (std::size_t i = 0; i < cfg.init_points; ++i) {
    const double t = cfg.init_points > 1 ? static_cast<double>(i) / static_cast<double>(cfg.init_points - 1)
                                         : 0.5;
    record(nearest_free(static_cast<double>(cfg.k_min) + t * span, cfg.k_min, cfg.k_max, taken));
  }

  while (result.trace.size() < cfg.budget) {
    // length scale by marginal likelihood over a log grid in [1e-2, 10]
    double best_ll = -std::numeric_limits<double>::infinity();
    double length_scale = 1.0;
    for (std::size_t g = 0; g < kLengthScaleGrid; ++g) {
      const double ls = std::pow(10.0, -2.0 + 3.0 * static_cast<double>(g) / (kLengthScaleGrid - 1));
      const gp::Regressor model(xs, ys, ls, kObservationNoise);
      if (model.log_marginal_likelihood() > best_ll) {
        best_ll = model.log_marginal_likelihood();
        length_scale = ls;
      }
    }
    const gp::Regressor model(xs, ys, length_scale, kObservationNoise);
    const double incumbent = *std::max_element(ys.begin(), ys.end());
    double best_x = 0.0;
    double best_ei = -1.0;
    for (std::size_t g = 0; g < kAcquisitionGrid; ++g) {
      const double x = static_cast<double>(g) / (kAcquisitionGrid - 1);
      const double ei = gp::expected_improvement(model.predict(x), incumbent);
      if (ei > best_ei) {
        best_ei = ei;
        best_x = x;
      }
    }
    record(nearest_free(static_cast<double>(cfg.k_min) + best_x * span, cfg.k_min, cfg.k_max, taken));
  }
  return result;
}

namespace gp {

double matern52(double r, double length_scale) {
  const double s = std::sqrt(5.0) * std::abs(r) / length_scale;
  return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

Regressor::Regressor(std::vector<double> xs, std::vector<double> ys, double length_scale,
                     double noise)
    : xs_(std::move(xs)), length_scale_(length_scale) {
  const auto n = static_cast<Eigen::Index>(xs_.size());
  double mean = 0.0;
  for (double v : ys) mean += v;
  mean /= static_cast<double>(ys.size());
  double var = 0.0;
  for (double v : ys) var += (v - mean) * (v - mean);
  var /= static_cast<double>(ys.size());
  y_mean_ = mean;
  y_scale_ = var > 0.0 ? std::sqrt(var) : 1.0;

  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      gram(i, j) = matern52(xs_[static_cast<std::size_t>(i)] - xs_[static_cast<std::size_t>(j)],
                            length_scale_);
    }
    gram(i, i) += noise;
  }
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) target(i) = (ys[static_cast<std::size_t>(i)] - y_mean_) / y_scale_;
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  const Eigen::VectorXd alpha = llt.solve(target);
  const Eigen::MatrixXd lower = llt.matrixL();
  alpha_.assign(alpha.data(), alpha.data() + n);
  chol_.resize(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) chol_[static_cast<std::size_t>(i * n + j)] = lower(i, j);
  }
  log_marginal_ = -0.5 * target.dot(alpha) - lower.diagonal().array().log().sum() -
                  0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

Posterior Regressor::predict(double x) const {
  const auto n = static_cast<Eigen::Index>(xs_.size());
  Eigen::VectorXd kstar(n);
  for (Eigen::Index i = 0; i < n; ++i) kstar(i) = matern52(x - xs_[static_cast<std::size_t>(i)], length_scale_);
  const Eigen::Map<const Eigen::VectorXd> alpha(alpha_.data(), n);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> lower(
      chol_.data(), n, n);
  const Eigen::VectorXd v = lower.triangularView<Eigen::Lower>().solve(kstar);
  const double mean = kstar.dot(alpha);
  const double var = std::max(1.0 - v.squaredNorm(), 0.0);
  return {y_mean_ + y_scale_ * mean, y_scale_ * std::sqrt(var)};
}

double expected_improvement(const Posterior& p, double best) {
  const double gain = p.mean - best;
  if (p.stddev <= 0.0) return std::max(gain, 0.0);
  const double z = gain / p.stddev;
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  return gain * cdf + p.stddev * pdf;
}

}  // namespace gp

}  // namespace owcluster
