#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "owcluster/distance.hpp"
#include "owcluster/validity.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace owcluster;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no throw");
  return ErrorCode::InvalidArgument;
}

KnnGraph graph_from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  KnnGraph g;
  g.n = n;
  g.symmetrized = true;
  g.adjacency.resize(n);
  for (auto [a, b] : edges) {
    g.adjacency[a].push_back({b, 1.0});
    g.adjacency[b].push_back({a, 1.0});
  }
  return g;
}

ClusterAssignment permuted(const ClusterAssignment& a, const std::vector<std::uint32_t>& perm) {
  std::vector<std::uint32_t> labels(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) labels[i] = perm[a[i]];
  return ClusterAssignment(labels, a.k());
}

}  // namespace

TEST_CASE("silhouette matches the definition-level oracle") {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.index(48);
    const std::size_t k = 2 + rng.index(std::min<std::size_t>(n - 1, 6));
    const auto x = testing::uniform_matrix(n, 3, rng);
    const auto labels = testing::random_labels(n, k, rng);
    const auto d = pairwise_distance_matrix(x, Metric::euclidean());
    const double got = silhouette_score(d, ClusterAssignment(labels, k));
    CHECK(std::abs(got - oracle::silhouette(d.values(), labels, k)) <= 1e-9);
  }
}

TEST_CASE("silhouette geometry") {
  EmbeddingMatrix x(4, 1, {0.f, 0.01f, 100.f, 100.01f});
  const auto d = pairwise_distance_matrix(x, Metric::euclidean());
  CHECK(silhouette_score(d, ClusterAssignment({0, 0, 1, 1}, 2)) > 0.99);

  const auto blobs = testing::gaussian_blobs(2, 20, 3, 20.0, 0.5, 2);
  const auto bd = pairwise_distance_matrix(blobs.x, Metric::euclidean());
  std::vector<std::uint32_t> wrong(blobs.labels);
  std::fill_n(wrong.begin(), 5, 1u);       // blob 0 points moved to cluster 1
  std::fill_n(wrong.begin() + 20, 5, 0u);  // and vice versa
  const auto terms = silhouette_terms(bd, ClusterAssignment(wrong, 2));
  for (std::size_t i = 0; i < 5; ++i) CHECK(terms.scores[i] < 0.0);
  // alternating labels split both blobs evenly
  std::vector<std::uint32_t> mixed(40);
  for (std::size_t i = 0; i < 40; ++i) mixed[i] = (i % 2 == 0) ? 0 : 1;
  CHECK(silhouette_score(bd, ClusterAssignment(mixed, 2)) < 0.0);

  CHECK(code_of([&] { silhouette_score(d, ClusterAssignment({0, 0, 0, 0}, 1)); }) == ErrorCode::SingleCluster);
  const auto single = silhouette_terms(d, ClusterAssignment({0, 1, 1, 1}, 2));
  CHECK(single.scores[0] == 0.0);
}

TEST_CASE("silhouette ignores scaling and label permutation") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = testing::uniform_matrix(30, 4, rng);
    const auto labels = testing::random_labels(30, 3, rng);
    const ClusterAssignment a(labels, 3);
    const auto d = pairwise_distance_matrix(x, Metric::euclidean());
    DistanceMatrix scaled(30);
    for (std::size_t i = 0; i < 30; ++i)
      for (std::size_t j = 0; j < 30; ++j) scaled(i, j) = 7.5 * d(i, j);
    const double s = silhouette_score(d, a);
    CHECK(std::abs(silhouette_score(scaled, a) - s) <= 1e-9);
    CHECK(std::abs(silhouette_score(d, permuted(a, {2, 0, 1})) - s) <= 1e-12);
    CHECK(std::abs(calinski_harabasz(x, permuted(a, {1, 2, 0})) - calinski_harabasz(x, a)) <=
          1e-9 * calinski_harabasz(x, a));
    CHECK(std::abs(davies_bouldin(x, permuted(a, {1, 2, 0})) - davies_bouldin(x, a)) <= 1e-9);
  }
}

TEST_CASE("calinski-harabasz matches explicit scatter matrices") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + rng.index(47);
    const std::size_t k = 2 + rng.index(std::min<std::size_t>(n - 2, 6));
    const auto x = testing::uniform_matrix(n, 3, rng);
    const auto labels = testing::random_labels(n, k, rng);
    const double got = calinski_harabasz(x, ClusterAssignment(labels, k));
    const double expect = oracle::calinski_harabasz(x, labels, k);
    CHECK(std::abs(got - expect) <= 1e-6 * std::abs(expect));
  }
}

TEST_CASE("calinski-harabasz edge cases and rotation") {
  EmbeddingMatrix points(4, 2, {1.f, 1.f, 1.f, 1.f, 5.f, 2.f, 5.f, 2.f});
  CHECK(std::isinf(calinski_harabasz(points, ClusterAssignment({0, 0, 1, 1}, 2))));
  CHECK(code_of([&] { calinski_harabasz(points, ClusterAssignment({0, 1, 2, 3}, 4)); }) ==
        ErrorCode::DegenerateAllPoints);
  CHECK(code_of([&] { calinski_harabasz(points, ClusterAssignment({0, 0, 0, 0}, 1)); }) ==
        ErrorCode::SingleCluster);

  Rng rng(5);
  const auto x = testing::uniform_matrix(40, 2, rng);
  const auto labels = testing::random_labels(40, 3, rng);
  const double theta = 0.7;
  EmbeddingMatrix rotated(40, 2);
  for (std::size_t i = 0; i < 40; ++i) {
    rotated(i, 0) = static_cast<float>(std::cos(theta) * x(i, 0) - std::sin(theta) * x(i, 1));
    rotated(i, 1) = static_cast<float>(std::sin(theta) * x(i, 0) + std::cos(theta) * x(i, 1));
  }
  const ClusterAssignment a(labels, 3);
  CHECK(std::abs(calinski_harabasz(rotated, a) - calinski_harabasz(x, a)) <= 1e-6 * calinski_harabasz(x, a));
}

TEST_CASE("davies-bouldin matches the definition-level oracle") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + rng.index(47);
    const std::size_t k = 2 + rng.index(std::min<std::size_t>(n - 2, 6));
    const auto x = testing::uniform_matrix(n, 3, rng);
    const auto labels = testing::random_labels(n, k, rng);
    CHECK(std::abs(davies_bouldin(x, ClusterAssignment(labels, k)) - oracle::davies_bouldin(x, labels, k)) <= 1e-9);
  }
}

TEST_CASE("davies-bouldin geometry and errors") {
  const auto blobs = testing::gaussian_blobs(2, 20, 3, 100.0, 0.5, 7);
  const ClusterAssignment a(blobs.labels, 2);
  CHECK(davies_bouldin(blobs.x, a) < 0.05);

  EmbeddingMatrix scaled = blobs.x;
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t c = 0; c < 3; ++c) scaled(i, c) *= 3.0f;
  CHECK(std::abs(davies_bouldin(scaled, a) - davies_bouldin(blobs.x, a)) <= 1e-6 * davies_bouldin(blobs.x, a));

  EmbeddingMatrix same_center(4, 1, {-1.f, 1.f, -2.f, 2.f});
  CHECK(code_of([&] { davies_bouldin(same_center, ClusterAssignment({0, 0, 1, 1}, 2)); }) ==
        ErrorCode::CoincidentCentroids);
}

TEST_CASE("average clustering coefficient") {
  std::vector<std::pair<std::size_t, std::size_t>> complete;
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = a + 1; b < 5; ++b) complete.emplace_back(a, b);
  CHECK(avg_clustering_coefficient(graph_from_edges(5, complete)) == 1.0);

  std::vector<std::pair<std::size_t, std::size_t>> star;
  for (std::size_t leaf = 1; leaf <= 6; ++leaf) star.emplace_back(0, leaf);
  CHECK(avg_clustering_coefficient(graph_from_edges(7, star)) == 0.0);

  // triangles {0,1,2} and {2,3,4}; node 2 sees 2 of its 6 neighbor pairs linked
  const auto g = graph_from_edges(5, {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}, {2, 4}});
  const auto stats = clustering_coefficients(g);
  CHECK(stats.local_coefficients[2] == doctest::Approx(1.0 / 3.0));
  CHECK(stats.degrees[2] == 4);
  CHECK(stats.average == doctest::Approx(13.0 / 15.0));

  // a leaf hanging off a triangle has degree one and contributes zero
  const auto tail = clustering_coefficients(graph_from_edges(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}}));
  CHECK(tail.local_coefficients[3] == 0.0);
  CHECK(tail.local_coefficients[2] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("clustering coefficient of a knn graph on blobs") {
  const auto blobs = testing::gaussian_blobs(3, 30, 4, 20.0, 0.5, 8);
  const auto g = build_knn_graph(blobs.x, 5, Metric::euclidean(), true);
  const double c = avg_clustering_coefficient(g);
  CHECK(c > 0.0);
  CHECK(c <= 1.0);
}
