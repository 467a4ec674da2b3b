#include "owcluster/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <utility>
#include <vector>

#include "owcluster/parallel.hpp"
#include "owcluster/reduction.hpp"

namespace owcluster {
namespace {

constexpr double kSimplexSmoothing = 1e-12;

void check_same_length(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
}

double squared_norm(std::span<const float> v) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * x;
  return s;
}

double raw_distance(std::span<const float> a, std::span<const float> b, MetricKind kind) {
  const std::size_t d = a.size();
  switch (kind) {
    case MetricKind::Euclidean: {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double diff = static_cast<double>(a[i]) - b[i];
        s += diff * diff;
      }
      return std::sqrt(s);
    }
    case MetricKind::Manhattan: {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += std::abs(static_cast<double>(a[i]) - b[i]);
      return s;
    }
    case MetricKind::Chebyshev: {
      double m = 0.0;
      for (std::size_t i = 0; i < d; ++i) m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
      return m;
    }
    case MetricKind::Cosine: {
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += static_cast<double>(a[i]) * b[i];
      const double denom = std::sqrt(squared_norm(a) * squared_norm(b));
      if (denom == 0.0) throw Error(ErrorCode::ZeroRow, "cosine of a zero vector is undefined");
      const double cos_theta = std::clamp(dot / denom, -1.0, 1.0);
      return std::max(0.0, 1.0 - cos_theta);
    }
    case MetricKind::Jeffreys:
      return jeffreys_divergence(a, b);
    case MetricKind::Geodesic:
      break;
  }
  throw Error(ErrorCode::GeodesicNotPointwise, "geodesic distance needs a neighbor graph");
}

std::vector<float> unit(std::span<const float> v) {
  const double norm = std::sqrt(squared_norm(v));
  if (norm == 0.0) throw Error(ErrorCode::ZeroRow, "cannot normalize a zero vector");
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

const EmbeddingMatrix& maybe_normalized(const EmbeddingMatrix& x, const Metric& metric,
                                        EmbeddingMatrix& storage) {
  if (!metric.normalized) return x;
  storage = l2_normalize(x);
  return storage;
}

std::vector<std::size_t> component_labels(const KnnGraph& graph, std::size_t& count) {
  std::vector<std::size_t> comp(graph.n, std::numeric_limits<std::size_t>::max());
  count = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < graph.n; ++s) {
    if (comp[s] != std::numeric_limits<std::size_t>::max()) continue;
    comp[s] = count;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (const auto& e : graph.adjacency[u]) {
        if (comp[e.target] == std::numeric_limits<std::size_t>::max()) {
          comp[e.target] = count;
          stack.push_back(e.target);
        }
      }
    }
    ++count;
  }
  return comp;
}

void add_undirected_edge(KnnGraph& graph, std::size_t a, std::size_t b, double w) {
  graph.adjacency[a].push_back({b, w});
  graph.adjacency[b].push_back({a, w});
}

}  // namespace

Metric parse_metric(const std::string& text) {
  Metric m;
  std::string body = text;
  const std::string prefix = "normalized-";
  if (body.rfind(prefix, 0) == 0) {
    m.normalized = true;
    body = body.substr(prefix.size());
  }
  if (body == "euclidean") {
    m.kind = MetricKind::Euclidean;
  } else if (body == "manhattan") {
    m.kind = MetricKind::Manhattan;
  } else if (body == "chebyshev") {
    m.kind = MetricKind::Chebyshev;
  } else if (body == "cosine") {
    m.kind = MetricKind::Cosine;
  } else if (body == "jeffreys") {
    m.kind = MetricKind::Jeffreys;
  } else if (body.rfind("geodesic", 0) == 0) {
    m.kind = MetricKind::Geodesic;
    if (body.size() > 8) {
      if (body[8] != ':') throw Error(ErrorCode::InvalidArgument, "unknown metric '" + text + "'");
      try {
        m.geodesic_k = std::stoul(body.substr(9));
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "bad geodesic neighbor count in '" + text + "'");
      }
      if (m.geodesic_k == 0) throw Error(ErrorCode::InvalidArgument, "geodesic k must be >= 1");
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown metric '" + text + "'");
  }
  return m;
}

std::string to_string(const Metric& metric) {
  std::string name;
  switch (metric.kind) {
    case MetricKind::Euclidean: name = "euclidean"; break;
    case MetricKind::Manhattan: name = "manhattan"; break;
    case MetricKind::Chebyshev: name = "chebyshev"; break;
    case MetricKind::Cosine: name = "cosine"; break;
    case MetricKind::Jeffreys: name = "jeffreys"; break;
    case MetricKind::Geodesic: name = "geodesic:" + std::to_string(metric.geodesic_k); break;
  }
  return metric.normalized ? "normalized-" + name : name;
}

std::vector<double> to_probability(std::span<const float> v) {
  std::vector<double> p(v.begin(), v.end());
  if (p.empty()) return p;
  const double lo = *std::min_element(p.begin(), p.end());
  if (lo < 0.0) {
    for (double& x : p) x -= lo;
  }
  double total = 0.0;
  for (double& x : p) {
    if (x == 0.0) x = kSimplexSmoothing;
    total += x;
  }
  for (double& x : p) x /= total;
  return p;
}

double jeffreys_divergence(std::span<const float> p, std::span<const float> q) {
  check_same_length(p, q);
  const auto ps = to_probability(p);
  const auto qs = to_probability(q);
  // D(p||q) + D(q||p) folds to sum (p - q) ln(p / q)
  double j = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) j += (ps[i] - qs[i]) * std::log(ps[i] / qs[i]);
  return std::max(0.0, j);
}

double vector_distance(std::span<const float> a, std::span<const float> b, const Metric& metric) {
  check_same_length(a, b);
  if (metric.kind == MetricKind::Geodesic) {
    throw Error(ErrorCode::GeodesicNotPointwise, "geodesic distance needs a neighbor graph");
  }
  if (metric.normalized) {
    const auto ua = unit(a);
    const auto ub = unit(b);
    return raw_distance(ua, ub, metric.kind);
  }
  return raw_distance(a, b, metric.kind);
}

DistanceMatrix pairwise_distance_matrix(const EmbeddingMatrix& x, const Metric& metric) {
  if (metric.kind == MetricKind::Geodesic) {
    throw Error(ErrorCode::GeodesicNotPointwise, "use geodesic_distance_matrix");
  }
  EmbeddingMatrix storage;
  const EmbeddingMatrix& src = maybe_normalized(x, metric, storage);
  const std::size_t n = src.rows();
  DistanceMatrix d(n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) d(i, j) = raw_distance(src.row(i), src.row(j), metric.kind);
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d(j, i) = d(i, j);
  }
  return d;
}

KnnGraph build_knn_graph(const EmbeddingMatrix& x, std::size_t k, const Metric& metric,
                         bool symmetrize) {
  const std::size_t n = x.rows();
  if (k < 1 || k + 1 > n) {
    throw Error(ErrorCode::KTooLarge,
                "k=" + std::to_string(k) + " needs 1 <= k <= n-1 with n=" + std::to_string(n));
  }
  if (metric.kind == MetricKind::Geodesic) {
    throw Error(ErrorCode::GeodesicNotPointwise, "kNN graph needs a pointwise metric");
  }
  EmbeddingMatrix storage;
  const EmbeddingMatrix& src = maybe_normalized(x, metric, storage);

  KnnGraph graph;
  graph.n = n;
  graph.k = k;
  graph.adjacency.resize(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<KnnEdge> candidates;
    candidates.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) candidates.push_back({j, raw_distance(src.row(i), src.row(j), metric.kind)});
    }
    const auto by_distance = [](const KnnEdge& a, const KnnEdge& b) {
      return a.weight < b.weight || (a.weight == b.weight && a.target < b.target);
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                      candidates.end(), by_distance);
    candidates.resize(k);
    graph.adjacency[i] = std::move(candidates);
  });

  if (symmetrize) {
    std::vector<std::vector<KnnEdge>> merged = graph.adjacency;
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& e : graph.adjacency[i]) merged[e.target].push_back({i, e.weight});
    }
    for (auto& edges : merged) {
      std::sort(edges.begin(), edges.end(), [](const KnnEdge& a, const KnnEdge& b) {
        return a.target < b.target;
      });
      edges.erase(std::unique(edges.begin(), edges.end(),
                              [](const KnnEdge& a, const KnnEdge& b) { return a.target == b.target; }),
                  edges.end());
      std::sort(edges.begin(), edges.end(), [](const KnnEdge& a, const KnnEdge& b) {
        return a.weight < b.weight || (a.weight == b.weight && a.target < b.target);
      });
    }
    graph.adjacency = std::move(merged);
    graph.symmetrized = true;
  }
  return graph;
}

DistanceMatrix shortest_path_lengths(const KnnGraph& graph) {
  const std::size_t n = graph.n;
  constexpr double inf = std::numeric_limits<double>::infinity();
  DistanceMatrix out(n);
  parallel_for(n, [&](std::size_t source) {
    std::vector<double> dist(n, inf);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.push({0.0, source});
    while (!heap.empty()) {
      const auto [du, u] = heap.top();
      heap.pop();
      if (du > dist[u]) continue;
      for (const auto& e : graph.adjacency[u]) {
        const double candidate = du + e.weight;
        if (candidate < dist[e.target]) {
          dist[e.target] = candidate;
          heap.push({candidate, e.target});
        }
      }
    }
    for (std::size_t j = 0; j < n; ++j) out(source, j) = dist[j];
  });
  // Directed graphs may be asymmetric; a symmetrized graph gives equal halves
  // up to summation order, so pin both halves to the lower-source value.
  if (graph.symmetrized) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) out(j, i) = out(i, j);
    }
  }
  return out;
}

DistanceMatrix geodesic_distance_matrix(const KnnGraph& graph, const EmbeddingMatrix& x,
                                        const Metric& metric) {
  if (!graph.symmetrized) {
    throw Error(ErrorCode::InvalidArgument, "geodesic distances need a symmetrized graph");
  }
  if (graph.n != x.rows()) {
    throw Error(ErrorCode::LengthMismatch, "graph and matrix disagree on instance count");
  }
  std::size_t components = 0;
  const auto comp = component_labels(graph, components);
  if (components <= 1) return shortest_path_lengths(graph);

  Metric edge_metric = metric;
  if (edge_metric.kind == MetricKind::Geodesic) edge_metric.kind = MetricKind::Euclidean;
  EmbeddingMatrix storage;
  const EmbeddingMatrix& src = maybe_normalized(x, edge_metric, storage);

  constexpr double inf = std::numeric_limits<double>::infinity();
  struct Bridge {
    double weight = inf;
    std::size_t a = 0;
    std::size_t b = 0;
  };
  std::vector<Bridge> bridges(components * components);
  for (std::size_t i = 0; i < graph.n; ++i) {
    for (std::size_t j = i + 1; j < graph.n; ++j) {
      if (comp[i] == comp[j]) continue;
      const double w = raw_distance(src.row(i), src.row(j), edge_metric.kind);
      const std::size_t ca = std::min(comp[i], comp[j]);
      const std::size_t cb = std::max(comp[i], comp[j]);
      Bridge& best = bridges[ca * components + cb];
      if (w < best.weight) best = {w, i, j};
    }
  }
  KnnGraph repaired = graph;
  for (std::size_t ca = 0; ca < components; ++ca) {
    for (std::size_t cb = ca + 1; cb < components; ++cb) {
      const Bridge& b = bridges[ca * components + cb];
      add_undirected_edge(repaired, b.a, b.b, b.weight);
    }
  }
  return shortest_path_lengths(repaired);
}

DistanceMatrix geodesic_distance_matrix(const EmbeddingMatrix& x, const Metric& metric) {
  Metric base = metric;
  base.kind = MetricKind::Euclidean;
  const auto graph = build_knn_graph(x, metric.geodesic_k, base, true);
  return geodesic_distance_matrix(graph, x, base);
}

DistanceMatrix distance_matrix(const EmbeddingMatrix& x, const Metric& metric) {
  if (metric.kind == MetricKind::Geodesic) return geodesic_distance_matrix(x, metric);
  return pairwise_distance_matrix(x, metric);
}

}  // namespace owcluster
