#include "owcluster/reduction.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "owcluster/parallel.hpp"

namespace owcluster {
namespace {

using MatrixXd = Eigen::MatrixXd;
using VectorXd = Eigen::VectorXd;

bool all_rows_identical(const EmbeddingMatrix& x) {
  for (std::size_t i = 1; i < x.rows(); ++i) {
    const auto a = x.row(0);
    const auto b = x.row(i);
    if (!std::equal(a.begin(), a.end(), b.begin())) return false;
  }
  return true;
}

MatrixXd centered(const EmbeddingMatrix& x) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto d = static_cast<Eigen::Index>(x.cols());
  MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < d; ++c) m(i, c) = x(i, c);
  }
  const Eigen::RowVectorXd mean = m.colwise().mean();
  m.rowwise() -= mean;
  return m;
}

// Flips each column so its largest-magnitude entry is positive.
void fix_signs(MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index arg = 0;
    vectors.col(c).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, c) < 0) vectors.col(c) *= -1.0;
  }
}

EmbeddingMatrix to_embedding(const MatrixXd& m) {
  EmbeddingMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(c)) = static_cast<float>(m(i, c));
    }
  }
  return out;
}

double squared_distance(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = static_cast<double>(a[i]) - b[i];
    s += diff * diff;
  }
  return s;
}

void check_target_dims(std::size_t dims, std::size_t limit, const char* what) {
  if (dims < 1 || dims > limit) {
    throw Error(ErrorCode::DimsTooLarge, std::string(what) + ": dims=" + std::to_string(dims) +
                                             " must lie in [1, " + std::to_string(limit) + "]");
  }
}

// ---- t-SNE ---------------------------------------------------------------

constexpr std::size_t kExaggerationIters = 250;
constexpr double kExaggeration = 12.0;
constexpr std::size_t kBisectionSteps = 64;
constexpr double kEntropyTolerance = 1e-5;

// Row-conditional affinities for one point; returns the precision found.
double search_precision(const std::vector<double>& sq_dist, std::size_t self, double perplexity,
                        std::vector<double>& row) {
  const double target = std::log(perplexity);
  double beta = 1.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  const std::size_t n = sq_dist.size();
  // Shift by the smallest off-diagonal distance so exp() never underflows to
  // an all-zero row; the shift cancels in the normalization.
  double min_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (j != self) min_d = std::min(min_d, sq_dist[j]);
  }
  for (std::size_t step = 0; step < kBisectionSteps; ++step) {
    double sum = 0.0;
    double weighted = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == self) {
        row[j] = 0.0;
        continue;
      }
      row[j] = std::exp(-beta * (sq_dist[j] - min_d));
      sum += row[j];
      weighted += row[j] * (sq_dist[j] - min_d);
    }
    const double entropy = std::log(sum) + beta * weighted / sum;
    const double diff = entropy - target;
    if (std::abs(diff) < kEntropyTolerance) break;
    if (diff > 0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
    } else {
      hi = beta;
      beta = std::isinf(lo) ? beta / 2.0 : (beta + lo) / 2.0;
    }
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    row[j] = (j == self) ? 0.0 : std::exp(-beta * (sq_dist[j] - min_d));
    sum += row[j];
  }
  for (double& v : row) v /= sum;
  return beta;
}

double tsne_kl(const std::vector<double>& p, const MatrixXd& y) {
  const auto n = y.rows();
  double z = 0.0;
  std::vector<double> q(static_cast<std::size_t>(n * n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double v = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
      q[static_cast<std::size_t>(i * n + j)] = v;
      z += v;
    }
  }
  double kl = 0.0;
  for (std::size_t idx = 0; idx < p.size(); ++idx) {
    if (p[idx] > 0.0) kl += p[idx] * std::log(p[idx] / std::max(q[idx] / z, 1e-300));
  }
  return kl;
}

// ---- UMAP ----------------------------------------------------------------

constexpr double kUmapSpread = 1.0;
constexpr std::size_t kNegativeSamples = 5;
constexpr double kRepulsionStrength = 1.0;
constexpr double kGradientClip = 4.0;
constexpr double kMinBandwidthScale = 1e-3;
constexpr std::size_t kBandwidthSteps = 64;
constexpr double kBandwidthTolerance = 1e-5;
constexpr double kInitScale = 10.0;

struct WeightedEdge {
  std::size_t head;
  std::size_t tail;
  double weight;
};

std::vector<WeightedEdge> fuzzy_simplicial_set(const EmbeddingMatrix& x, std::size_t n_neighbors) {
  const std::size_t n = x.rows();
  const std::size_t k = n_neighbors - 1;
  const auto graph = build_knn_graph(x, k, Metric::euclidean(), false);
  const double target = std::log2(static_cast<double>(n_neighbors));

  double mean_all = 0.0;
  for (const auto& edges : graph.adjacency) {
    for (const auto& e : edges) mean_all += e.weight;
  }
  mean_all /= static_cast<double>(n * k);

  // directed memberships, stored densely per row for the union step
  std::vector<std::vector<std::pair<std::size_t, double>>> membership(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& edges = graph.adjacency[i];
    double rho = 0.0;
    for (const auto& e : edges) {
      if (e.weight > 0.0) {
        rho = e.weight;
        break;
      }
    }
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double sigma = 1.0;
    for (std::size_t step = 0; step < kBandwidthSteps; ++step) {
      double psum = 0.0;
      for (const auto& e : edges) {
        const double dd = e.weight - rho;
        psum += dd > 0.0 ? std::exp(-dd / sigma) : 1.0;
      }
      if (std::abs(psum - target) < kBandwidthTolerance) break;
      if (psum > target) {
        hi = sigma;
        sigma = (lo + hi) / 2.0;
      } else {
        lo = sigma;
        sigma = std::isinf(hi) ? sigma * 2.0 : (lo + hi) / 2.0;
      }
    }
    double mean_i = 0.0;
    for (const auto& e : edges) mean_i += e.weight;
    mean_i /= static_cast<double>(k);
    const double floor = kMinBandwidthScale * (rho > 0.0 ? mean_i : mean_all);
    sigma = std::max(sigma, floor);
    if (sigma <= 0.0) sigma = std::numeric_limits<double>::min();
    for (const auto& e : edges) {
      const double dd = e.weight - rho;
      membership[i].push_back({e.target, dd > 0.0 ? std::exp(-dd / sigma) : 1.0});
    }
  }

  // probabilistic union w + w^T - w * w^T, keyed on (min, max)
  std::vector<WeightedEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, w] : membership[i]) {
      double reverse = 0.0;
      for (const auto& [t, wt] : membership[j]) {
        if (t == i) {
          reverse = wt;
          break;
        }
      }
      if (reverse > 0.0 && j < i) continue;  // already emitted from the lower index
      const double combined = w + reverse - w * reverse;
      edges.push_back({std::min(i, j), std::max(i, j), combined});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    return a.head < b.head || (a.head == b.head && a.tail < b.tail);
  });
  return edges;
}

MatrixXd umap_initial_layout(const EmbeddingMatrix& x, std::size_t dims, Rng& rng) {
  const std::size_t n = x.rows();
  MatrixXd y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims));
  const std::size_t pca_dims = std::min({dims, x.cols(), n > 1 ? n - 1 : std::size_t{1}});
  y.setZero();
  if (n > 1) {
    const auto projected = pca(x, pca_dims);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < pca_dims; ++c) {
        y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = projected(i, c);
      }
    }
  }
  const double extent = y.cwiseAbs().maxCoeff();
  if (extent > 0.0) y *= kInitScale / extent;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    for (Eigen::Index c = 0; c < y.cols(); ++c) y(i, c) += 1e-4 * rng.normal();
  }
  return y;
}

double clip(double v) { return std::clamp(v, -kGradientClip, kGradientClip); }

}  // namespace

ReducerMethod parse_reducer(const std::string& text) {
  if (text == "none") return ReducerMethod::None;
  if (text == "pca") return ReducerMethod::PCA;
  if (text == "mds") return ReducerMethod::MDS;
  if (text == "isomap") return ReducerMethod::Isomap;
  if (text == "tsne" || text == "t-sne") return ReducerMethod::TSNE;
  if (text == "umap") return ReducerMethod::UMAP;
  throw Error(ErrorCode::InvalidArgument, "unknown reducer '" + text + "'");
}

std::string to_string(ReducerMethod method) {
  switch (method) {
    case ReducerMethod::None: return "none";
    case ReducerMethod::PCA: return "pca";
    case ReducerMethod::MDS: return "mds";
    case ReducerMethod::Isomap: return "isomap";
    case ReducerMethod::TSNE: return "tsne";
    case ReducerMethod::UMAP: return "umap";
  }
  return "none";
}

ReducerConfig ReducerConfig::defaults(ReducerMethod method) {
  ReducerConfig cfg;
  cfg.method = method;
  switch (method) {
    case ReducerMethod::None: break;
    case ReducerMethod::PCA: cfg.target_dims = 30; break;
    case ReducerMethod::MDS: cfg.target_dims = 24; break;
    case ReducerMethod::Isomap: cfg.target_dims = 32; break;
    case ReducerMethod::TSNE:
      cfg.target_dims = 2;
      cfg.perplexity = 30.0;
      cfg.max_iter = 10000;
      break;
    case ReducerMethod::UMAP:
      cfg.target_dims = 3;
      cfg.n_neighbors = 10;
      cfg.min_dist = 0.1;
      cfg.max_iter = 200;
      break;
  }
  return cfg;
}

EmbeddingMatrix l2_normalize(const EmbeddingMatrix& x) {
  EmbeddingMatrix out = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (float v : x.row(i)) s += static_cast<double>(v) * v;
    if (s == 0.0) throw Error(ErrorCode::ZeroRow, "row " + std::to_string(i));
    const double norm = std::sqrt(s);
    auto dst = out.row(i);
    const auto src = x.row(i);
    for (std::size_t c = 0; c < x.cols(); ++c) dst[c] = static_cast<float>(src[c] / norm);
  }
  return out;
}

PcaResult pca_with_variances(const EmbeddingMatrix& x, std::size_t dims) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  check_target_dims(dims, std::min(n > 0 ? n - 1 : 0, d), "pca");
  const MatrixXd m = centered(x);
  const double denom = static_cast<double>(n - 1);
  const auto keep = static_cast<Eigen::Index>(dims);

  MatrixXd projection;
  VectorXd eigenvalues;
  if (d <= n) {
    const MatrixXd cov = (m.transpose() * m) / denom;
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(cov);
    // ascending order from Eigen; take the tail reversed
    MatrixXd vectors = solver.eigenvectors().rightCols(keep).rowwise().reverse();
    fix_signs(vectors);
    eigenvalues = solver.eigenvalues().tail(keep).reverse();
    projection = m * vectors;
  } else {
    // n < d: the centered Gram matrix shares the non-zero spectrum
    const MatrixXd gram = (m * m.transpose()) / denom;
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(gram);
    MatrixXd vectors = solver.eigenvectors().rightCols(keep).rowwise().reverse();
    eigenvalues = solver.eigenvalues().tail(keep).reverse();
    projection = MatrixXd(m.rows(), keep);
    for (Eigen::Index c = 0; c < keep; ++c) {
      const double lambda = std::max(eigenvalues(c), 0.0);
      projection.col(c) = vectors.col(c) * std::sqrt(lambda * denom);
    }
    fix_signs(projection);
  }
  PcaResult result{to_embedding(projection), {}};
  for (Eigen::Index c = 0; c < keep; ++c) result.variances.push_back(std::max(eigenvalues(c), 0.0));
  return result;
}

EmbeddingMatrix pca(const EmbeddingMatrix& x, std::size_t dims) {
  return pca_with_variances(x, dims).projection;
}

EmbeddingMatrix classical_mds(const DistanceMatrix& dist, std::size_t dims) {
  const std::size_t n = dist.size();
  check_target_dims(dims, n > 0 ? n - 1 : 0, "mds");
  const auto nn = static_cast<Eigen::Index>(n);
  MatrixXd b(nn, nn);
  for (Eigen::Index i = 0; i < nn; ++i) {
    for (Eigen::Index j = 0; j < nn; ++j) {
      const double v = dist(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      b(i, j) = v * v;
    }
  }
  // -1/2 J D^2 J with J = I - 11^T / n
  const VectorXd row_mean = b.rowwise().mean();
  const VectorXd col_mean = b.colwise().mean().transpose();
  const double grand = b.mean();
  for (Eigen::Index i = 0; i < nn; ++i) {
    for (Eigen::Index j = 0; j < nn; ++j) {
      b(i, j) = -0.5 * (b(i, j) - row_mean(i) - col_mean(j) + grand);
    }
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(b);
  const auto keep = static_cast<Eigen::Index>(dims);
  MatrixXd vectors = solver.eigenvectors().rightCols(keep).rowwise().reverse();
  const VectorXd values = solver.eigenvalues().tail(keep).reverse();
  fix_signs(vectors);
  for (Eigen::Index c = 0; c < keep; ++c) vectors.col(c) *= std::sqrt(std::max(values(c), 0.0));
  return to_embedding(vectors);
}

EmbeddingMatrix isomap(const EmbeddingMatrix& x, std::size_t dims, std::size_t k) {
  const Metric metric = Metric::euclidean();
  const auto graph = build_knn_graph(x, k, metric, true);
  return classical_mds(geodesic_distance_matrix(graph, x, metric), dims);
}

TsneResult tsne_detailed(const EmbeddingMatrix& x, const ReducerConfig& cfg) {
  const std::size_t n = x.rows();
  if (cfg.perplexity <= 0.0 || static_cast<double>(n) < 3.0 * cfg.perplexity) {
    throw Error(ErrorCode::PerplexityTooLarge, "perplexity " + std::to_string(cfg.perplexity) +
                                                   " needs at least " +
                                                   std::to_string(3.0 * cfg.perplexity) + " rows");
  }
  check_target_dims(cfg.target_dims, x.cols(), "tsne");
  const std::size_t dims = cfg.target_dims;
  TsneResult result;
  if (all_rows_identical(x)) {
    result.embedding = EmbeddingMatrix(n, dims);
    result.betas.assign(n, 0.0);
    return result;
  }

  // input affinities
  std::vector<double> p(n * n, 0.0);
  result.betas.resize(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> sq(n);
    for (std::size_t j = 0; j < n; ++j) sq[j] = squared_distance(x.row(i), x.row(j));
    std::vector<double> row(n);
    result.betas[i] = search_precision(sq, i, cfg.perplexity, row);
    std::copy(row.begin(), row.end(), p.begin() + static_cast<std::ptrdiff_t>(i * n));
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::max((p[i * n + j] + p[j * n + i]) / (2.0 * static_cast<double>(n)), 1e-12);
      p[i * n + j] = v;
      p[j * n + i] = v;
    }
  }

  // PCA initialization scaled to a 1e-4 standard deviation on the first axis
  const std::size_t init_dims = std::min(dims, std::min(n - 1, x.cols()));
  MatrixXd y = MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims));
  {
    const auto init = pca(x, init_dims);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < init_dims; ++c) {
        y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = init(i, c);
      }
    }
    const VectorXd first = y.col(0);
    const double sd = std::sqrt((first.array() - first.mean()).square().sum() /
                                static_cast<double>(std::max<std::size_t>(n - 1, 1)));
    if (sd > 0.0) y *= 1e-4 / sd;
    Rng rng(cfg.seed);
    // a tiny seeded jitter breaks exact ties along absent PCA axes
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      for (Eigen::Index c = 0; c < y.cols(); ++c) y(i, c) += 1e-8 * rng.normal();
    }
  }

  const double learning_rate = std::max(static_cast<double>(n) / kExaggeration, 50.0);
  MatrixXd update = MatrixXd::Zero(y.rows(), y.cols());
  MatrixXd gains = MatrixXd::Ones(y.rows(), y.cols());
  MatrixXd grad(y.rows(), y.cols());
  std::vector<double> num(n * n);

  const std::size_t iters = cfg.max_iter;
  bool exaggeration_logged = false;
  for (std::size_t iter = 0; iter < iters; ++iter) {
    const bool exaggerating = iter < kExaggerationIters;
    const double exaggeration = exaggerating ? kExaggeration : 1.0;
    const double momentum = exaggerating ? 0.5 : 0.8;
    if (!exaggerating && !exaggeration_logged) {
      result.kl_after_exaggeration = tsne_kl(p, y);
      exaggeration_logged = true;
    }

    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num[i * n + i] = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double v =
            1.0 / (1.0 + (y.row(static_cast<Eigen::Index>(i)) - y.row(static_cast<Eigen::Index>(j)))
                             .squaredNorm());
        num[i * n + j] = v;
        num[j * n + i] = v;
        z += 2.0 * v;
      }
    }
    grad.setZero();
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double coeff = (exaggeration * p[i * n + j] - num[i * n + j] / z) * num[i * n + j];
        grad.row(ii) += 4.0 * coeff * (y.row(ii) - y.row(static_cast<Eigen::Index>(j)));
      }
    }
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      for (Eigen::Index c = 0; c < y.cols(); ++c) {
        const bool same_sign = (grad(i, c) > 0) == (update(i, c) > 0);
        gains(i, c) = same_sign ? gains(i, c) * 0.8 : gains(i, c) + 0.2;
        gains(i, c) = std::max(gains(i, c), 0.01);
        update(i, c) = momentum * update(i, c) - learning_rate * gains(i, c) * grad(i, c);
        y(i, c) += update(i, c);
      }
    }
    const Eigen::RowVectorXd mean = y.colwise().mean();
    y.rowwise() -= mean;
  }
  if (!exaggeration_logged) result.kl_after_exaggeration = tsne_kl(p, y);
  result.kl_final = tsne_kl(p, y);
  result.embedding = to_embedding(y);
  return result;
}

EmbeddingMatrix tsne(const EmbeddingMatrix& x, const ReducerConfig& cfg) {
  return tsne_detailed(x, cfg).embedding;
}

UmapCurve fit_umap_curve(double min_dist, double spread) {
  constexpr std::size_t kPoints = 300;
  std::vector<double> xs(kPoints);
  std::vector<double> ys(kPoints);
  for (std::size_t i = 0; i < kPoints; ++i) {
    xs[i] = 3.0 * spread * static_cast<double>(i) / static_cast<double>(kPoints - 1);
    ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist) / spread);
  }
  const auto residual_sum = [&](double a, double b) {
    double s = 0.0;
    for (std::size_t i = 0; i < kPoints; ++i) {
      const double f = 1.0 / (1.0 + a * std::pow(xs[i], 2.0 * b));
      s += (f - ys[i]) * (f - ys[i]);
    }
    return s;
  };

  // Levenberg-Marquardt over (a, b)
  double a = 1.0;
  double b = 1.0;
  double lambda = 1e-3;
  double current = residual_sum(a, b);
  for (int iter = 0; iter < 500; ++iter) {
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < kPoints; ++i) {
      const double x = xs[i];
      const double xp = x > 0.0 ? std::pow(x, 2.0 * b) : 0.0;
      const double denom = 1.0 + a * xp;
      const double f = 1.0 / denom;
      const double r = f - ys[i];
      const double df_da = -xp / (denom * denom);
      const double df_db = x > 0.0 ? -a * xp * 2.0 * std::log(x) / (denom * denom) : 0.0;
      const Eigen::Vector2d jrow(df_da, df_db);
      jtj += jrow * jrow.transpose();
      jtr += jrow * r;
    }
    bool improved = false;
    while (lambda < 1e12) {
      Eigen::Matrix2d damped = jtj;
      damped.diagonal() *= (1.0 + lambda);
      const Eigen::Vector2d step = damped.ldlt().solve(-jtr);
      const double na = a + step(0);
      const double nb = b + step(1);
      if (na > 0.0 && nb > 0.0) {
        const double candidate = residual_sum(na, nb);
        if (candidate < current) {
          const double gain = current - candidate;
          a = na;
          b = nb;
          current = candidate;
          lambda = std::max(lambda / 10.0, 1e-12);
          improved = true;
          if (gain < 1e-16 * std::max(current, 1e-300)) lambda = 1e12;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!improved || jtr.norm() < 1e-14) break;
  }
  return {a, b};
}

UmapResult umap_detailed(const EmbeddingMatrix& x, const ReducerConfig& cfg) {
  const std::size_t n = x.rows();
  if (cfg.n_neighbors < 2 || cfg.n_neighbors > n) {
    throw Error(ErrorCode::KTooLarge, "n_neighbors=" + std::to_string(cfg.n_neighbors) +
                                          " needs 2 <= n_neighbors <= n=" + std::to_string(n));
  }
  if (!(cfg.min_dist > 0.0 && cfg.min_dist < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "min_dist must lie in (0, 1)");
  }
  check_target_dims(cfg.target_dims, x.cols(), "umap");
  UmapResult result;
  result.curve = fit_umap_curve(cfg.min_dist, kUmapSpread);
  result.epochs = cfg.max_iter;
  if (all_rows_identical(x)) {
    result.embedding = EmbeddingMatrix(n, cfg.target_dims);
    return result;
  }

  auto edges = fuzzy_simplicial_set(x, cfg.n_neighbors);
  const std::size_t n_epochs = cfg.max_iter;
  double max_weight = 0.0;
  for (const auto& e : edges) max_weight = std::max(max_weight, e.weight);
  std::erase_if(edges, [&](const WeightedEdge& e) {
    return e.weight < max_weight / static_cast<double>(std::max<std::size_t>(n_epochs, 1));
  });

  Rng rng(cfg.seed);
  MatrixXd y = umap_initial_layout(x, cfg.target_dims, rng);
  const double a = result.curve.a;
  const double b = result.curve.b;
  const auto dims = y.cols();

  const std::size_t m = edges.size();
  std::vector<double> epochs_per_sample(m);
  for (std::size_t e = 0; e < m; ++e) epochs_per_sample[e] = max_weight / edges[e].weight;
  std::vector<double> epochs_per_negative(m);
  std::vector<double> next_sample(m);
  std::vector<double> next_negative(m);
  for (std::size_t e = 0; e < m; ++e) {
    epochs_per_negative[e] = epochs_per_sample[e] / static_cast<double>(kNegativeSamples);
    next_sample[e] = epochs_per_sample[e];
    next_negative[e] = epochs_per_negative[e];
  }

  Eigen::VectorXd delta(dims);
  for (std::size_t epoch = 0; epoch < n_epochs; ++epoch) {
    const double alpha = 1.0 - static_cast<double>(epoch) / static_cast<double>(n_epochs);
    const double now = static_cast<double>(epoch);
    for (std::size_t e = 0; e < m; ++e) {
      if (next_sample[e] > now) continue;
      const auto head = static_cast<Eigen::Index>(edges[e].head);
      const auto tail = static_cast<Eigen::Index>(edges[e].tail);

      delta = y.row(head) - y.row(tail);
      const double d2 = delta.squaredNorm();
      if (d2 > 0.0) {
        const double coeff = -2.0 * a * b * std::pow(d2, b - 1.0) / (1.0 + a * std::pow(d2, b));
        for (Eigen::Index c = 0; c < dims; ++c) {
          const double g = clip(coeff * delta(c));
          y(head, c) += g * alpha;
          y(tail, c) -= g * alpha;
        }
      }
      next_sample[e] += epochs_per_sample[e];

      const auto negatives =
          static_cast<std::size_t>((now - next_negative[e]) / epochs_per_negative[e]);
      for (std::size_t s = 0; s < negatives; ++s) {
        const auto other = static_cast<Eigen::Index>(rng.index(n));
        if (other == head) continue;
        delta = y.row(head) - y.row(other);
        const double nd2 = delta.squaredNorm();
        if (nd2 <= 0.0) continue;
        const double coeff =
            2.0 * kRepulsionStrength * b / ((0.001 + nd2) * (1.0 + a * std::pow(nd2, b)));
        for (Eigen::Index c = 0; c < dims; ++c) y(head, c) += clip(coeff * delta(c)) * alpha;
      }
      next_negative[e] += static_cast<double>(negatives) * epochs_per_negative[e];
    }
  }
  result.embedding = to_embedding(y);
  return result;
}

EmbeddingMatrix umap(const EmbeddingMatrix& x, const ReducerConfig& cfg) {
  return umap_detailed(x, cfg).embedding;
}

EmbeddingMatrix reduce(const EmbeddingMatrix& x, const ReducerConfig& cfg) {
  switch (cfg.method) {
    case ReducerMethod::None: return x;
    case ReducerMethod::PCA:
      if (all_rows_identical(x)) return EmbeddingMatrix(x.rows(), cfg.target_dims);
      return pca(x, cfg.target_dims);
    case ReducerMethod::MDS: {
      check_target_dims(cfg.target_dims, x.rows() > 0 ? x.rows() - 1 : 0, "mds");
      return classical_mds(pairwise_distance_matrix(x, Metric::euclidean()), cfg.target_dims);
    }
    case ReducerMethod::Isomap:
      if (all_rows_identical(x)) return EmbeddingMatrix(x.rows(), cfg.target_dims);
      return isomap(x, cfg.target_dims, cfg.n_neighbors);
    case ReducerMethod::TSNE: return tsne(x, cfg);
    case ReducerMethod::UMAP: return umap(x, cfg);
  }
  return x;
}

}  // namespace owcluster
