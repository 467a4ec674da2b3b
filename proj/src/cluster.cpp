#include "owcluster/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "owcluster/parallel.hpp"
#include "owcluster/validity.hpp"

namespace owcluster {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSwapEpsilon = 1e-12;

// ---- k-means ---------------------------------------------------------------

struct DenseRows {
  std::size_t n;
  std::size_t d;
  std::vector<double> values;

  const double* row(std::size_t i) const { return values.data() + i * d; }
};

double sq_dist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    const double diff = a[c] - b[c];
    s += diff * diff;
  }
  return s;
}

std::vector<double> plus_plus_seeds(const DenseRows& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.n;
  const std::size_t d = x.d;
  std::vector<double> centers(k * d);
  std::vector<bool> chosen(n, false);
  std::size_t first = rng.index(n);
  std::copy_n(x.row(first), d, centers.begin());
  chosen[first] = true;
  std::vector<double> closest(n);
  for (std::size_t i = 0; i < n; ++i) closest[i] = sq_dist(x.row(i), centers.data(), d);

  for (std::size_t j = 1; j < k; ++j) {
    const double total = std::accumulate(closest.begin(), closest.end(), 0.0);
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double run = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        run += closest[i];
        if (run > target && closest[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        for (std::size_t i = n; i-- > 0;) {
          if (closest[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // every point coincides with a center; fall back to unused rows
      for (std::size_t i = 0; i < n && pick == n; ++i) {
        if (!chosen[i]) pick = i;
      }
    }
    chosen[pick] = true;
    std::copy_n(x.row(pick), d, centers.begin() + static_cast<std::ptrdiff_t>(j * d));
    for (std::size_t i = 0; i < n; ++i) {
      closest[i] = std::min(closest[i], sq_dist(x.row(i), centers.data() + j * d, d));
    }
  }
  return centers;
}

struct LloydRun {
  std::vector<std::uint32_t> labels;
  double inertia = kInf;
  std::vector<double> trace;
};

LloydRun lloyd(const DenseRows& x, std::size_t k, const KMeansConfig& cfg, RngSeed seed) {
  const std::size_t n = x.n;
  const std::size_t d = x.d;
  Rng rng(seed);
  std::vector<double> centers = plus_plus_seeds(x, k, rng);
  LloydRun run;
  run.labels.assign(n, 0);
  std::vector<double> cost(n);
  std::vector<std::size_t> sizes(k);
  double previous = kInf;

  for (std::size_t iter = 0; iter < std::max<std::size_t>(cfg.max_iter, 1); ++iter) {
    bool changed = false;
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t best = 0;
      double best_d = kInf;
      for (std::size_t j = 0; j < k; ++j) {
        const double dd = sq_dist(x.row(i), centers.data() + j * d, d);
        if (dd < best_d) {
          best_d = dd;
          best = static_cast<std::uint32_t>(j);
        }
      }
      if (iter == 0 || run.labels[i] != best) changed = true;
      run.labels[i] = best;
      cost[i] = best_d;
      ++sizes[best];
    }
    // empty-cluster repair: move the point farthest from its centroid
    for (std::size_t j = 0; j < k; ++j) {
      if (sizes[j] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[run.labels[i]] > 1 && (far == n || cost[i] > cost[far])) far = i;
      }
      --sizes[run.labels[far]];
      run.labels[far] = static_cast<std::uint32_t>(j);
      sizes[j] = 1;
      cost[far] = 0.0;
      std::copy_n(x.row(far), d, centers.begin() + static_cast<std::ptrdiff_t>(j * d));
      changed = true;
    }
    double inertia = 0.0;
    for (double c : cost) inertia += c;
    run.trace.push_back(inertia);
    run.inertia = inertia;

    const bool converged = !changed || (std::isfinite(previous) &&
                                        previous - inertia <= cfg.tol * std::max(previous, 1e-300));
    previous = inertia;

    std::fill(centers.begin(), centers.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double* dst = centers.data() + run.labels[i] * d;
      const double* src = x.row(i);
      for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
    }
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t c = 0; c < d; ++c) centers[j * d + c] /= static_cast<double>(sizes[j]);
    }
    if (converged) break;
  }
  // inertia against the final means
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) inertia += sq_dist(x.row(i), centers.data() + run.labels[i] * d, d);
  if (inertia < run.inertia) {
    run.inertia = inertia;
  }
  return run;
}

// ---- medoids ---------------------------------------------------------------

void check_medoid_k(const DistanceMatrix& d, std::size_t k, std::size_t lo, std::size_t hi_offset,
                    ErrorCode code) {
  const std::size_t n = d.size();
  if (k < lo || k + hi_offset > n) {
    throw Error(code, "k=" + std::to_string(k) + " out of range for n=" + std::to_string(n));
  }
}

std::vector<std::size_t> random_medoids(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.index(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

// Nearest, second and third nearest medoid slot per point.
struct NearestCache {
  std::vector<std::size_t> slot1, slot2, slot3;
  std::vector<double> d1, d2, d3;

  void rebuild(const DistanceMatrix& d, const std::vector<std::size_t>& medoids) {
    const std::size_t n = d.size();
    slot1.assign(n, 0);
    slot2.assign(n, 0);
    slot3.assign(n, 0);
    d1.assign(n, kInf);
    d2.assign(n, kInf);
    d3.assign(n, kInf);
    for (std::size_t o = 0; o < n; ++o) {
      for (std::size_t s = 0; s < medoids.size(); ++s) {
        const double v = d(o, medoids[s]);
        if (v < d1[o]) {
          d3[o] = d2[o], slot3[o] = slot2[o];
          d2[o] = d1[o], slot2[o] = slot1[o];
          d1[o] = v, slot1[o] = s;
        } else if (v < d2[o]) {
          d3[o] = d2[o], slot3[o] = slot2[o];
          d2[o] = v, slot2[o] = s;
        } else if (v < d3[o]) {
          d3[o] = v, slot3[o] = s;
        }
      }
    }
  }
};

double ratio(double a, double b) { return b > 0.0 && std::isfinite(b) ? a / b : 0.0; }

// Change of sum(d1/d2) if medoid slot `slot` is replaced; the caller adds
// the slot-specific terms. Returns the best slot and its delta.
std::pair<std::size_t, double> best_msc_swap(const DistanceMatrix& d, const NearestCache& cache,
                                             std::size_t candidate, std::size_t k,
                                             std::vector<double>& per_slot) {
  std::fill(per_slot.begin(), per_slot.end(), 0.0);
  double shared = 0.0;
  const std::size_t n = d.size();
  for (std::size_t o = 0; o < n; ++o) {
    const double doc = d(o, candidate);
    const double d1 = cache.d1[o];
    const double d2 = cache.d2[o];
    const double d3 = cache.d3[o];
    const double current = ratio(d1, d2);

    double generic;
    if (doc < d1) generic = ratio(doc, d1);
    else if (doc < d2) generic = ratio(d1, doc);
    else generic = current;

    double drop_first;
    if (doc < d2) drop_first = ratio(doc, d2);
    else if (doc < d3) drop_first = ratio(d2, doc);
    else drop_first = ratio(d2, d3);

    double drop_second;
    if (doc < d1) drop_second = ratio(doc, d1);
    else if (doc < d3) drop_second = ratio(d1, doc);
    else drop_second = ratio(d1, d3);

    shared += generic - current;
    per_slot[cache.slot1[o]] += drop_first - generic;
    per_slot[cache.slot2[o]] += drop_second - generic;
  }
  std::size_t best = 0;
  for (std::size_t s = 1; s < k; ++s) {
    if (per_slot[s] < per_slot[best]) best = s;
  }
  return {best, shared + per_slot[best]};
}

std::pair<std::size_t, double> best_pam_swap(const DistanceMatrix& d, const NearestCache& cache,
                                             const std::vector<double>& removal_loss,
                                             std::size_t candidate, std::vector<double>& per_slot) {
  per_slot = removal_loss;
  double shared = 0.0;
  for (std::size_t o = 0; o < d.size(); ++o) {
    const double doc = d(o, candidate);
    const double d1 = cache.d1[o];
    const double d2 = cache.d2[o];
    if (doc < d1) {
      shared += doc - d1;
      per_slot[cache.slot1[o]] += d1 - d2;
    } else if (doc < d2) {
      per_slot[cache.slot1[o]] += doc - d2;
    }
  }
  std::size_t best = 0;
  for (std::size_t s = 1; s < per_slot.size(); ++s) {
    if (per_slot[s] < per_slot[best]) best = s;
  }
  return {best, shared + per_slot[best]};
}

std::vector<double> removal_losses(const NearestCache& cache, std::size_t k) {
  std::vector<double> loss(k, 0.0);
  for (std::size_t o = 0; o < cache.d1.size(); ++o) loss[cache.slot1[o]] += cache.d2[o] - cache.d1[o];
  return loss;
}

bool is_medoid(const std::vector<std::size_t>& medoids, std::size_t i) {
  return std::find(medoids.begin(), medoids.end(), i) != medoids.end();
}

struct MedoidRun {
  std::vector<std::size_t> medoids;
  double objective = 0.0;
  std::vector<double> trace;
};

MedoidRun run_fasterpam(const DistanceMatrix& d, std::vector<std::size_t> medoids,
                        std::size_t max_iter) {
  const std::size_t n = d.size();
  const std::size_t k = medoids.size();
  NearestCache cache;
  cache.rebuild(d, medoids);
  std::vector<double> removal = removal_losses(cache, k);
  std::vector<double> per_slot(k);
  double td = std::accumulate(cache.d1.begin(), cache.d1.end(), 0.0);
  MedoidRun run;
  run.trace.push_back(td);

  // eager swapping: stop after a full pass over candidates without a swap
  std::size_t last_swap = 0;
  std::size_t steps = 0;
  const std::size_t limit = std::max<std::size_t>(max_iter, 1) * n;
  for (std::size_t c = 0; steps < limit; c = (c + 1) % n, ++steps) {
    if (steps > 0 && c == last_swap) break;
    if (is_medoid(medoids, c)) continue;
    const auto [slot, delta] = best_pam_swap(d, cache, removal, c, per_slot);
    if (delta < -kSwapEpsilon) {
      medoids[slot] = c;
      cache.rebuild(d, medoids);
      removal = removal_losses(cache, k);
      td = std::accumulate(cache.d1.begin(), cache.d1.end(), 0.0);
      run.trace.push_back(td);
      last_swap = c;
    }
  }
  run.medoids = std::move(medoids);
  run.objective = td;
  return run;
}

MedoidRun run_fastermsc(const DistanceMatrix& d, std::vector<std::size_t> medoids,
                        std::size_t max_iter) {
  const std::size_t n = d.size();
  const std::size_t k = medoids.size();
  NearestCache cache;
  cache.rebuild(d, medoids);
  std::vector<double> per_slot(k);
  const auto loss_of = [&] {
    double s = 0.0;
    for (std::size_t o = 0; o < n; ++o) s += ratio(cache.d1[o], cache.d2[o]);
    return s;
  };
  double loss = loss_of();
  MedoidRun run;
  run.trace.push_back(1.0 - loss / static_cast<double>(n));

  std::size_t last_swap = 0;
  std::size_t steps = 0;
  const std::size_t limit = std::max<std::size_t>(max_iter, 1) * n;
  for (std::size_t c = 0; steps < limit; c = (c + 1) % n, ++steps) {
    if (steps > 0 && c == last_swap) break;
    if (is_medoid(medoids, c)) continue;
    const auto [slot, delta] = best_msc_swap(d, cache, c, k, per_slot);
    if (delta < -kSwapEpsilon) {
      medoids[slot] = c;
      cache.rebuild(d, medoids);
      loss = loss_of();
      run.trace.push_back(1.0 - loss / static_cast<double>(n));
      last_swap = c;
    }
  }
  run.medoids = std::move(medoids);
  run.objective = 1.0 - loss / static_cast<double>(n);
  return run;
}

template <typename Runner>
MedoidResult best_of_restarts(const DistanceMatrix& d, const MedoidConfig& cfg, bool maximize,
                              Runner runner) {
  const std::size_t restarts = std::max<std::size_t>(cfg.restarts, 1);
  std::vector<MedoidRun> runs(restarts);
  parallel_for(restarts, [&](std::size_t r) {
    std::vector<std::size_t> init;
    if (r == 0) {
      init = build_medoids(d, cfg.k);
    } else {
      Rng rng(derive_seed(cfg.seed, r));
      init = random_medoids(d.size(), cfg.k, rng);
    }
    runs[r] = runner(d, std::move(init), cfg.max_iter);
  });

  std::vector<double> score(restarts);
  for (std::size_t r = 0; r < restarts; ++r) {
    if (cfg.selection == RestartSelection::FullSilhouette) {
      score[r] = silhouette_score(d, assign_to_medoids(d, runs[r].medoids));
    } else {
      score[r] = maximize ? runs[r].objective : -runs[r].objective;
    }
  }
  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r) {
    if (score[r] > score[best]) best = r;
  }
  MedoidResult result;
  result.assignment = assign_to_medoids(d, runs[best].medoids);
  result.objective = runs[best].objective;
  result.trace = std::move(runs[best].trace);
  result.best_restart = best;
  return result;
}

}  // namespace

KMeansResult kmeans_detailed(const EmbeddingMatrix& y, const KMeansConfig& cfg) {
  const std::size_t n = y.rows();
  if (cfg.k < 1 || cfg.k > n) {
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(cfg.k) + " needs 1 <= k <= n=" +
                                          std::to_string(n));
  }
  DenseRows x{n, y.cols(), std::vector<double>(y.values().begin(), y.values().end())};
  const std::size_t restarts = std::max<std::size_t>(cfg.n_init, 1);
  std::vector<LloydRun> runs(restarts);
  parallel_for(restarts, [&](std::size_t r) { runs[r] = lloyd(x, cfg.k, cfg, derive_seed(cfg.seed, r)); });

  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r) {
    if (runs[r].inertia < runs[best].inertia) best = r;
  }
  KMeansResult result;
  result.assignment = ClusterAssignment(std::move(runs[best].labels), cfg.k);
  result.assignment.attach_centroids(y);
  result.inertia = runs[best].inertia;
  result.inertia_trace = std::move(runs[best].trace);
  result.best_restart = best;
  return result;
}

ClusterAssignment kmeans(const EmbeddingMatrix& y, const KMeansConfig& cfg) {
  return kmeans_detailed(y, cfg).assignment;
}

double total_deviation(const DistanceMatrix& d, const std::vector<std::size_t>& medoids) {
  double td = 0.0;
  for (std::size_t o = 0; o < d.size(); ++o) {
    double best = kInf;
    for (std::size_t m : medoids) best = std::min(best, d(o, m));
    td += best;
  }
  return td;
}

double medoid_silhouette(const DistanceMatrix& d, const std::vector<std::size_t>& medoids) {
  if (medoids.size() < 2) throw Error(ErrorCode::KOutOfRange, "medoid silhouette needs k >= 2");
  NearestCache cache;
  cache.rebuild(d, medoids);
  double s = 0.0;
  for (std::size_t o = 0; o < d.size(); ++o) s += 1.0 - ratio(cache.d1[o], cache.d2[o]);
  return s / static_cast<double>(d.size());
}

ClusterAssignment assign_to_medoids(const DistanceMatrix& d, const std::vector<std::size_t>& medoids) {
  std::vector<std::uint32_t> labels(d.size());
  for (std::size_t o = 0; o < d.size(); ++o) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < medoids.size(); ++s) {
      if (d(o, medoids[s]) < d(o, medoids[best])) best = s;
    }
    labels[o] = static_cast<std::uint32_t>(best);
  }
  // a medoid always belongs to its own slot, even next to a duplicate medoid
  for (std::size_t s = 0; s < medoids.size(); ++s) labels[medoids[s]] = static_cast<std::uint32_t>(s);
  ClusterAssignment a(std::move(labels), medoids.size());
  a.attach_medoids(medoids);
  return a;
}

std::vector<std::size_t> build_medoids(const DistanceMatrix& d, std::size_t k) {
  const std::size_t n = d.size();
  std::vector<std::size_t> medoids;
  std::vector<double> nearest(n, kInf);
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t best = n;
    double best_td = kInf;
    for (std::size_t c = 0; c < n; ++c) {
      if (is_medoid(medoids, c)) continue;
      double td = 0.0;
      for (std::size_t o = 0; o < n; ++o) td += std::min(nearest[o], d(o, c));
      if (td < best_td) {
        best_td = td;
        best = c;
      }
    }
    medoids.push_back(best);
    for (std::size_t o = 0; o < n; ++o) nearest[o] = std::min(nearest[o], d(o, best));
  }
  return medoids;
}

MedoidResult fasterpam_detailed(const DistanceMatrix& d, const MedoidConfig& cfg) {
  check_medoid_k(d, cfg.k, 1, 0, ErrorCode::KTooLarge);
  if (cfg.k == 1) {
    // exact: the row with the smallest summed distance
    std::size_t best = 0;
    double best_sum = kInf;
    for (std::size_t c = 0; c < d.size(); ++c) {
      const auto row = d.row(c);
      const double s = std::accumulate(row.begin(), row.end(), 0.0);
      if (s < best_sum) {
        best_sum = s;
        best = c;
      }
    }
    MedoidResult result;
    result.assignment = assign_to_medoids(d, {best});
    result.objective = best_sum;
    result.trace = {best_sum};
    return result;
  }
  return best_of_restarts(d, cfg, false, run_fasterpam);
}

ClusterAssignment fasterpam(const DistanceMatrix& d, const MedoidConfig& cfg) {
  return fasterpam_detailed(d, cfg).assignment;
}

MedoidResult fastermsc_detailed(const DistanceMatrix& d, const MedoidConfig& cfg) {
  check_medoid_k(d, cfg.k, 2, 1, ErrorCode::KOutOfRange);
  return best_of_restarts(d, cfg, true, run_fastermsc);
}

ClusterAssignment fastermsc(const DistanceMatrix& d, const MedoidConfig& cfg) {
  return fastermsc_detailed(d, cfg).assignment;
}

EngineKind parse_engine(const std::string& text) {
  if (text == "kmeans") return EngineKind::KMeans;
  if (text == "fasterpam") return EngineKind::FasterPAM;
  if (text == "fastermsc") return EngineKind::FasterMSC;
  throw Error(ErrorCode::InvalidArgument, "unknown engine '" + text + "'");
}

std::string to_string(EngineKind kind) {
  switch (kind) {
    case EngineKind::KMeans: return "kmeans";
    case EngineKind::FasterPAM: return "fasterpam";
    case EngineKind::FasterMSC: return "fastermsc";
  }
  return "kmeans";
}

}  // namespace owcluster
