#pragma once

#include <cstddef>
#include <vector>

#include "owcluster/core.hpp"

namespace owcluster {

struct SilhouetteTerms {
  // Mean distance to the other members of the own cluster.
  std::vector<double> intra;
  // Smallest mean distance to the members of another cluster.
  std::vector<double> nearest_other;
  // (b - a) / max(a, b); 0 for singleton clusters.
  std::vector<double> scores;
};

SilhouetteTerms silhouette_terms(const DistanceMatrix& d, const ClusterAssignment& a);

// Mean per-point silhouette in [-1, 1]. Throws SingleCluster when k < 2.
double silhouette_score(const DistanceMatrix& d, const ClusterAssignment& a);

struct ScatterTraces {
  double between = 0.0;  // trace of sum_j n_j (mu_j - mu)(mu_j - mu)^T
  double within = 0.0;   // trace of sum_j sum_{x in C_j} (x - mu_j)(x - mu_j)^T
};

ScatterTraces scatter_traces(const EmbeddingMatrix& x, const ClusterAssignment& a);

// trace(B)(N - K) / (trace(W)(K - 1)); +infinity when trace(W) is zero.
double calinski_harabasz(const EmbeddingMatrix& x, const ClusterAssignment& a);

// Mean over clusters of max_{j != i} (S_i + S_j) / ||mu_i - mu_j||.
double davies_bouldin(const EmbeddingMatrix& x, const ClusterAssignment& a);

struct GraphStats {
  std::vector<double> local_coefficients;
  std::vector<std::size_t> degrees;
  double average = 0.0;
};

// Local clustering coefficients over the undirected graph; nodes of degree
// below two count as 0.
GraphStats clustering_coefficients(const KnnGraph& graph);
double avg_clustering_coefficient(const KnnGraph& graph);

}  // namespace owcluster
