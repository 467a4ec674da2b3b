#include <algorithm>

#include "doctest.h"
#include "owcluster/cluster.hpp"
#include "owcluster/evaluation.hpp"
#include "owcluster/pseudo_label.hpp"
#include "support/synthetic.hpp"

using namespace owcluster;

namespace {

double kept_accuracy(const PseudoLabelSet& set, const LabelVector& truth) {
  LabelVector kept_truth;
  for (auto i : set.kept_indices) kept_truth.push_back(truth[i]);
  return clustering_accuracy(set.pseudo_labels, kept_truth);
}

}  // namespace

TEST_CASE("full retention keeps every instance") {
  Rng rng(1);
  const auto x = testing::uniform_matrix(20, 3, rng);
  const ClusterAssignment a(testing::random_labels(20, 3, rng), 3);
  const auto set = core_percentile_labels(x, a, 1.0);
  REQUIRE(set.kept_indices.size() == 20);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(set.kept_indices[i] == i);
    CHECK(set.pseudo_labels[i] == a[i]);
  }
}

TEST_CASE("half of four collinear points") {
  const EmbeddingMatrix x(4, 1, {0.f, 1.f, 2.f, 9.f});
  const auto set = core_percentile_labels(x, ClusterAssignment({0, 0, 0, 0}, 1), 0.5);
  CHECK(set.kept_indices == std::vector<std::size_t>{1, 2});
  CHECK(set.percentile == 0.5);
}

TEST_CASE("per-cluster counts round up and never drop a cluster") {
  const EmbeddingMatrix x(7, 1, {0.f, 1.f, 2.f, 10.f, 11.f, 12.f, 50.f});
  const ClusterAssignment a({0, 0, 0, 1, 1, 1, 2}, 3);
  const auto set = core_percentile_labels(x, a, 0.1);
  CHECK(set.kept_indices == std::vector<std::size_t>{1, 4, 6});
  const auto half = core_percentile_labels(x, a, 0.5);
  CHECK(half.kept_indices.size() == 5);  // ceil(1.5) + ceil(1.5) + 1
}

TEST_CASE("ties go to the lower index and attached centroids are used") {
  const EmbeddingMatrix x(4, 1, {-1.f, 1.f, -1.f, 1.f});
  const auto set = core_percentile_labels(x, ClusterAssignment({0, 0, 0, 0}, 1), 0.5);
  CHECK(set.kept_indices == std::vector<std::size_t>{0, 1});

  ClusterAssignment a({0, 0, 0, 0}, 1);
  a.attach_medoids({3});
  // no centroids attached: member mean 0 is used
  CHECK(core_percentile_labels(x, a, 0.25).kept_indices == std::vector<std::size_t>{0});
}

TEST_CASE("retention is nested across percentiles") {
  const auto data = testing::gaussian_blobs(4, 40, 5, 3.0, 1.0, 3);
  KMeansConfig cfg;
  cfg.k = 4;
  const auto a = kmeans(data.x, cfg);
  std::vector<std::size_t> previous;
  for (double p : {0.1, 0.25, 0.5, 0.75, 1.0}) {
    const auto set = core_percentile_labels(data.x, a, p);
    CHECK(std::includes(set.kept_indices.begin(), set.kept_indices.end(), previous.begin(), previous.end()));
    previous = set.kept_indices;
  }
}

TEST_CASE("pseudo-label accuracy on clean and overlapping blobs") {
  const auto clean = testing::gaussian_blobs(3, 50, 8, 10.0, 0.5, 4);
  KMeansConfig cfg;
  cfg.k = 3;
  const auto a = kmeans(clean.x, cfg);
  CHECK(kept_accuracy(core_percentile_labels(clean.x, a, 0.5), clean.labels) == 1.0);

  const auto overlap = testing::gaussian_blobs(3, 100, 4, 2.0, 1.0, 5);
  const auto b = kmeans(overlap.x, cfg);
  const double core = kept_accuracy(core_percentile_labels(overlap.x, b, 0.25), overlap.labels);
  const double all = kept_accuracy(core_percentile_labels(overlap.x, b, 1.0), overlap.labels);
  CHECK(all < 1.0);
  CHECK(core >= all);
}

TEST_CASE("percentile bounds") {
  const EmbeddingMatrix x(2, 1, {0.f, 1.f});
  const ClusterAssignment a({0, 0}, 1);
  for (double p : {0.0, -0.5, 1.5}) {
    try {
      core_percentile_labels(x, a, p);
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadPercentile);
    }
  }
}
