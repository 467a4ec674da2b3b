#include "owcluster/validity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace owcluster {
namespace {

void require_two_clusters(const ClusterAssignment& a) {
  if (a.k() < 2) throw Error(ErrorCode::SingleCluster, "index needs at least two clusters");
}

void require_same_rows(std::size_t rows, const ClusterAssignment& a) {
  if (rows != a.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(rows) + " rows vs " +
                                               std::to_string(a.size()) + " labels");
  }
}

std::vector<double> centroids_of(const EmbeddingMatrix& x, const ClusterAssignment& a) {
  ClusterAssignment copy = a;
  copy.attach_centroids(x);
  return *copy.centroids();
}

}  // namespace

SilhouetteTerms silhouette_terms(const DistanceMatrix& d, const ClusterAssignment& a) {
  require_same_rows(d.size(), a);
  require_two_clusters(a);
  const std::size_t n = d.size();
  const std::size_t k = a.k();
  SilhouetteTerms t;
  t.intra.resize(n);
  t.nearest_other.resize(n);
  t.scores.resize(n);
  std::vector<double> sums(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    const auto row = d.row(i);
    for (std::size_t j = 0; j < n; ++j) sums[a[j]] += row[j];
    const std::size_t own = a[i];
    const std::size_t own_size = a.sizes()[own];
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own) b = std::min(b, sums[c] / static_cast<double>(a.sizes()[c]));
    }
    const double intra = own_size > 1 ? sums[own] / static_cast<double>(own_size - 1) : 0.0;
    t.intra[i] = intra;
    t.nearest_other[i] = b;
    const double denom = std::max(intra, b);
    t.scores[i] = (own_size > 1 && denom > 0.0) ? (b - intra) / denom : 0.0;
  }
  return t;
}

double silhouette_score(const DistanceMatrix& d, const ClusterAssignment& a) {
  const auto t = silhouette_terms(d, a);
  double s = 0.0;
  for (double v : t.scores) s += v;
  return s / static_cast<double>(t.scores.size());
}

ScatterTraces scatter_traces(const EmbeddingMatrix& x, const ClusterAssignment& a) {
  require_same_rows(x.rows(), a);
  const std::size_t n = x.rows();
  const std::size_t dims = x.cols();
  const auto centroids = centroids_of(x, a);
  std::vector<double> mean(dims, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < dims; ++c) mean[c] += x(i, c);
  }
  for (double& m : mean) m /= static_cast<double>(n);

  ScatterTraces t;
  for (std::size_t j = 0; j < a.k(); ++j) {
    double sq = 0.0;
    for (std::size_t c = 0; c < dims; ++c) {
      const double diff = centroids[j * dims + c] - mean[c];
      sq += diff * diff;
    }
    t.between += static_cast<double>(a.sizes()[j]) * sq;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double* mu = centroids.data() + a[i] * dims;
    for (std::size_t c = 0; c < dims; ++c) {
      const double diff = x(i, c) - mu[c];
      t.within += diff * diff;
    }
  }
  return t;
}

double calinski_harabasz(const EmbeddingMatrix& x, const ClusterAssignment& a) {
  require_two_clusters(a);
  if (a.size() == a.k()) {
    throw Error(ErrorCode::DegenerateAllPoints, "every point is its own cluster");
  }
  const auto t = scatter_traces(x, a);
  if (t.within == 0.0) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(a.size());
  const double k = static_cast<double>(a.k());
  return t.between * (n - k) / (t.within * (k - 1.0));
}

double davies_bouldin(const EmbeddingMatrix& x, const ClusterAssignment& a) {
  require_two_clusters(a);
  require_same_rows(x.rows(), a);
  const std::size_t k = a.k();
  const std::size_t dims = x.cols();
  const auto centroids = centroids_of(x, a);
  std::vector<double> scatter(k, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double* mu = centroids.data() + a[i] * dims;
    double sq = 0.0;
    for (std::size_t c = 0; c < dims; ++c) {
      const double diff = x(i, c) - mu[c];
      sq += diff * diff;
    }
    scatter[a[i]] += std::sqrt(sq);
  }
  for (std::size_t j = 0; j < k; ++j) scatter[j] /= static_cast<double>(a.sizes()[j]);

  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      double sq = 0.0;
      for (std::size_t c = 0; c < dims; ++c) {
        const double diff = centroids[i * dims + c] - centroids[j * dims + c];
        sq += diff * diff;
      }
      const double separation = std::sqrt(sq);
      if (separation < 1e-12) {
        throw Error(ErrorCode::CoincidentCentroids,
                    "clusters " + std::to_string(i) + " and " + std::to_string(j));
      }
      worst = std::max(worst, (scatter[i] + scatter[j]) / separation);
    }
    total += worst;
  }
  return total / static_cast<double>(k);
}

GraphStats clustering_coefficients(const KnnGraph& graph) {
  const std::size_t n = graph.n;
  // undirected, duplicate-free neighbor sets
  std::vector<std::vector<std::size_t>> nbrs(n);
  for (std::size_t u = 0; u < n; ++u) {
    for (const auto& e : graph.adjacency[u]) {
      if (e.target == u) continue;
      nbrs[u].push_back(e.target);
      nbrs[e.target].push_back(u);
    }
  }
  for (auto& list : nbrs) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  GraphStats stats;
  stats.local_coefficients.resize(n, 0.0);
  stats.degrees.resize(n, 0);
  double sum = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    const auto& list = nbrs[v];
    const std::size_t deg = list.size();
    stats.degrees[v] = deg;
    if (deg < 2) continue;
    std::size_t links = 0;
    for (std::size_t i = 0; i < deg; ++i) {
      const auto& ni = nbrs[list[i]];
      for (std::size_t j = i + 1; j < deg; ++j) {
        if (std::binary_search(ni.begin(), ni.end(), list[j])) ++links;
      }
    }
    stats.local_coefficients[v] =
        2.0 * static_cast<double>(links) / (static_cast<double>(deg) * static_cast<double>(deg - 1));
    sum += stats.local_coefficients[v];
  }
  stats.average = n > 0 ? sum / static_cast<double>(n) : 0.0;
  return stats;
}

double avg_clustering_coefficient(const KnnGraph& graph) {
  return clustering_coefficients(graph).average;
}

}  // namespace owcluster
