#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "owcluster/distance.hpp"
#include "owcluster/selection.hpp"
#include "owcluster/validity.hpp"
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

EngineConfig fast_kmeans(RngSeed seed) {
  EngineConfig e;
  e.kind = EngineKind::KMeans;
  e.kmeans.n_init = 5;
  e.seed = seed;
  return e;
}

double recomputed_silhouette(const EmbeddingMatrix& y, const ClusterAssignment& a) {
  return silhouette_score(pairwise_distance_matrix(y, Metric::euclidean()), a);
}

}  // namespace

TEST_CASE("sweep evaluates every candidate and keeps the best") {
  const auto data = testing::gaussian_blobs(4, 30, 5, 10.0, 0.5, 1);
  const auto r = sweep_estimate(data.x, 2, 9, fast_kmeans(3));
  CHECK(r.trace.size() == 8);
  for (std::size_t i = 0; i < r.trace.size(); ++i) CHECK(r.trace[i].first == 2 + i);
  CHECK(r.best_k == 4);
  CHECK(r.best_labels.k() == 4);
  double top = -2.0;
  for (auto [k, s] : r.trace) top = std::max(top, s);
  CHECK(r.best_sil == top);
  CHECK(std::abs(recomputed_silhouette(data.x, r.best_labels) - r.best_sil) <= 1e-12);
}

TEST_CASE("single-candidate sweep") {
  const auto data = testing::gaussian_blobs(3, 20, 4, 10.0, 0.5, 2);
  const auto engine = fast_kmeans(4);
  const auto r = sweep_estimate(data.x, 5, 5, engine);
  CHECK(r.best_k == 5);
  CHECK(r.trace.size() == 1);
  CHECK(r.best_labels.labels() == run_engine(data.x, 5, engine).labels());
}

TEST_CASE("sweep range errors") {
  const auto data = testing::gaussian_blobs(2, 5, 3, 10.0, 0.5, 3);
  const auto engine = fast_kmeans(0);
  CHECK(code_of([&] { sweep_estimate(data.x, 1, 4, engine); }) == ErrorCode::BadRange);
  CHECK(code_of([&] { sweep_estimate(data.x, 5, 4, engine); }) == ErrorCode::BadRange);
  CHECK(code_of([&] { sweep_estimate(data.x, 2, 10, engine); }) == ErrorCode::BadRange);
}

TEST_CASE("sweep with medoid engines") {
  const auto data = testing::gaussian_blobs(3, 20, 4, 10.0, 0.5, 4);
  for (auto kind : {EngineKind::FasterPAM, EngineKind::FasterMSC}) {
    EngineConfig e;
    e.kind = kind;
    e.medoid.restarts = 3;
    const auto r = sweep_estimate(data.x, 2, 6, e);
    CHECK(r.best_k == 3);
    CHECK(r.best_labels.centroids().has_value());
    CHECK(std::abs(recomputed_silhouette(data.x, r.best_labels) - r.best_sil) <= 1e-12);
  }
}

TEST_CASE("bayes with the full budget equals the sweep") {
  const auto data = testing::gaussian_blobs(5, 20, 6, 8.0, 0.7, 5);
  const auto engine = fast_kmeans(6);
  BayesOptConfig cfg;
  cfg.k_min = 2;
  cfg.k_max = 9;
  cfg.budget = 8;
  const auto bayes = bayes_estimate(data.x, cfg, engine);
  const auto sweep = sweep_estimate(data.x, 2, 9, engine);
  CHECK(bayes.best_k == sweep.best_k);
  CHECK(bayes.best_sil == sweep.best_sil);
  CHECK(bayes.best_labels.labels() == sweep.best_labels.labels());
}

TEST_CASE("bayes evaluates distinct in-range candidates within budget") {
  for (RngSeed seed = 0; seed < 5; ++seed) {
    const auto data = testing::gaussian_blobs(4, 25, 6, 8.0, 0.7, 10 + seed);
    const auto engine = fast_kmeans(seed);
    BayesOptConfig cfg;
    cfg.k_min = 2;
    cfg.k_max = 20;
    cfg.budget = 6;
    cfg.seed = seed;
    const auto bayes = bayes_estimate(data.x, cfg, engine);
    CHECK(bayes.trace.size() == 6);
    std::set<std::size_t> seen;
    for (auto [k, s] : bayes.trace) {
      CHECK(k >= 2);
      CHECK(k <= 20);
      seen.insert(k);
    }
    CHECK(seen.size() == 6);
    const auto sweep = sweep_estimate(data.x, 2, 20, engine);
    CHECK(bayes.best_sil <= sweep.best_sil);
    CHECK(std::abs(recomputed_silhouette(data.x, bayes.best_labels) - bayes.best_sil) <= 1e-12);
    // every evaluated k scores exactly as in the sweep
    for (auto [k, s] : bayes.trace) CHECK(s == sweep.trace[k - 2].second);
  }
}

TEST_CASE("bayes budget errors") {
  const auto data = testing::gaussian_blobs(3, 10, 3, 8.0, 0.5, 6);
  const auto engine = fast_kmeans(0);
  BayesOptConfig cfg;
  cfg.k_min = 2;
  cfg.k_max = 10;
  cfg.budget = 3;
  cfg.init_points = 3;
  CHECK(code_of([&] { bayes_estimate(data.x, cfg, engine); }) == ErrorCode::BudgetTooSmall);
  cfg.budget = 10;
  CHECK(code_of([&] { bayes_estimate(data.x, cfg, engine); }) == ErrorCode::BadRange);
  cfg.k_min = 1;
  cfg.budget = 5;
  CHECK(code_of([&] { bayes_estimate(data.x, cfg, engine); }) == ErrorCode::BadRange);
}

TEST_CASE("gaussian process surrogate") {
  CHECK(gp::matern52(0.0, 0.3) == 1.0);
  CHECK(gp::matern52(0.5, 0.3) < gp::matern52(0.1, 0.3));
  const std::vector<double> xs{0.0, 0.25, 0.5, 1.0}, ys{0.1, 0.5, 0.3, -0.2};
  const gp::Regressor model(xs, ys, 0.3, 1e-6);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto p = model.predict(xs[i]);
    CHECK(p.mean == doctest::Approx(ys[i]).epsilon(1e-3));
    CHECK(p.stddev < 1e-2);
  }
  CHECK(model.predict(0.75).stddev > model.predict(0.25).stddev);
  CHECK(std::isfinite(model.log_marginal_likelihood()));
  CHECK(gp::expected_improvement({0.0, 1.0}, 0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)));
  CHECK(gp::expected_improvement({1.0, 0.0}, 0.5) == doctest::Approx(0.5));
  CHECK(gp::expected_improvement({0.0, 0.0}, 0.5) == 0.0);
}
