#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "owcluster/core.hpp"

namespace owcluster {

enum class MetricKind { Euclidean, Manhattan, Chebyshev, Cosine, Jeffreys, Geodesic };

struct Metric {
  MetricKind kind = MetricKind::Euclidean;
  // Neighbor count of the kNN graph; only read for Geodesic.
  std::size_t geodesic_k = 10;
  // L2-normalize each vector before measuring.
  bool normalized = false;

  static Metric euclidean(bool normalized = false) { return {MetricKind::Euclidean, 10, normalized}; }
  static Metric geodesic(std::size_t k, bool normalized = false) {
    return {MetricKind::Geodesic, k, normalized};
  }
};

// Parses "euclidean", "manhattan", "chebyshev", "cosine", "jeffreys",
// "geodesic" or "geodesic:K", each optionally prefixed by "normalized-".
Metric parse_metric(const std::string& text);
std::string to_string(const Metric& metric);

// Dissimilarity between two vectors. Cosine yields 1 - cos(theta).
double vector_distance(std::span<const float> a, std::span<const float> b, const Metric& metric);

// Symmetric Kullback-Leibler divergence D(p||q) + D(q||p) after mapping each
// vector onto the probability simplex (see to_probability).
double jeffreys_divergence(std::span<const float> p, std::span<const float> q);

// Vectors with a negative entry are shifted so their minimum is zero; zero
// entries are then smoothed by 1e-12 and the result is L1-normalized.
std::vector<double> to_probability(std::span<const float> v);

DistanceMatrix pairwise_distance_matrix(const EmbeddingMatrix& x, const Metric& metric);

// Exact kNN by full scan; equal distances resolve to the lower row index.
KnnGraph build_knn_graph(const EmbeddingMatrix& x, std::size_t k, const Metric& metric,
                         bool symmetrize);

// Shortest weighted path lengths by per-source Dijkstra. Pairs with no
// connecting path are +infinity.
DistanceMatrix shortest_path_lengths(const KnnGraph& graph);

// Geodesic distances over a symmetrized kNN graph of x. Disconnected
// components are first joined by the closest cross-component pair (under
// metric) for every pair of components.
DistanceMatrix geodesic_distance_matrix(const KnnGraph& graph, const EmbeddingMatrix& x,
                                        const Metric& metric);

// Convenience: builds the symmetrized graph with metric.geodesic_k neighbors
// under the Euclidean metric (respecting metric.normalized).
DistanceMatrix geodesic_distance_matrix(const EmbeddingMatrix& x, const Metric& metric);

// Dispatches to geodesic_distance_matrix for Geodesic, otherwise pairwise.
DistanceMatrix distance_matrix(const EmbeddingMatrix& x, const Metric& metric);

}  // namespace owcluster
