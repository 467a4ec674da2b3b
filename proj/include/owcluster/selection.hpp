#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "owcluster/cluster.hpp"
#include "owcluster/core.hpp"
#include "owcluster/distance.hpp"

namespace owcluster {

// How one candidate k is clustered. The k fields of the nested configs are
// overwritten per candidate, and every candidate derives its own seed from
// `seed`, so a given k always yields the same clustering.
struct EngineConfig {
  EngineKind kind = EngineKind::KMeans;
  KMeansConfig kmeans;
  MedoidConfig medoid;
  // Dissimilarity handed to the medoid engines.
  Metric metric = Metric::euclidean();
  RngSeed seed = 0;
};

// Clusters y into k groups with the configured engine. `medoid_distances`
// may carry a precomputed matrix under engine.metric.
ClusterAssignment run_engine(const EmbeddingMatrix& y, std::size_t k, const EngineConfig& engine,
                             const DistanceMatrix* medoid_distances = nullptr);

struct SweepResult {
  std::size_t best_k = 0;
  ClusterAssignment best_labels;
  double best_sil = 0.0;
  // (k, silhouette) in evaluation order.
  std::vector<std::pair<std::size_t, double>> trace;
};

// Exhaustive silhouette sweep over [k_min, k_max]; ties keep the smaller k.
SweepResult sweep_estimate(const EmbeddingMatrix& y, std::size_t k_min, std::size_t k_max,
                           const EngineConfig& engine);

struct BayesOptConfig {
  std::size_t k_min = 2;
  std::size_t k_max = 10;
  // Total silhouette evaluations, initial design included.
  std::size_t budget = 5;
  std::size_t init_points = 3;
  RngSeed seed = 0;
};

// Gaussian-process (Matern 5/2) surrogate over k scaled to [0, 1] with
// expected-improvement acquisition. Evaluates exactly `budget` distinct k.
SweepResult bayes_estimate(const EmbeddingMatrix& y, const BayesOptConfig& cfg,
                           const EngineConfig& engine);

namespace gp {

// Matern 5/2 correlation at distance r for the given length scale.
double matern52(double r, double length_scale);

struct Posterior {
  double mean;
  double stddev;
};

// Exact GP regression on standardized targets with unit signal variance.
class Regressor {
 public:
  Regressor(std::vector<double> xs, std::vector<double> ys, double length_scale, double noise);

  Posterior predict(double x) const;
  double log_marginal_likelihood() const { return log_marginal_; }

 private:
  std::vector<double> xs_;
  double length_scale_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  std::vector<double> alpha_;
  std::vector<double> chol_;  // lower-triangular, row-major
  double log_marginal_ = 0.0;
};

double expected_improvement(const Posterior& p, double best);

}  // namespace gp

}  // namespace owcluster
