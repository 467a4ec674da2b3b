#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "owcluster/core.hpp"
#include "owcluster/distance.hpp"

namespace owcluster {

enum class ReducerMethod { None, PCA, MDS, Isomap, TSNE, UMAP };

ReducerMethod parse_reducer(const std::string& text);
std::string to_string(ReducerMethod method);

struct ReducerConfig {
  ReducerMethod method = ReducerMethod::None;
  std::size_t target_dims = 2;
  double perplexity = 30.0;
  std::size_t n_neighbors = 10;
  double min_dist = 0.1;
  std::size_t max_iter = 10000;
  RngSeed seed = 0;

  // Defaults per method: t-SNE 2-D perplexity 30 with 10000 iterations, UMAP
  // 3-D with 10 neighbors and min_dist 0.1 over 200 epochs, PCA 30, MDS 24,
  // Isomap 32 dimensions over a 10-neighbor graph.
  static ReducerConfig defaults(ReducerMethod method);
};

// Scales every row to unit Euclidean norm; throws ZeroRow(i).
EmbeddingMatrix l2_normalize(const EmbeddingMatrix& x);

struct PcaResult {
  EmbeddingMatrix projection;
  // Covariance eigenvalues (n - 1 normalization) in descending order, one per
  // kept component.
  std::vector<double> variances;
};

PcaResult pca_with_variances(const EmbeddingMatrix& x, std::size_t dims);
EmbeddingMatrix pca(const EmbeddingMatrix& x, std::size_t dims);

// Classical (Torgerson) MDS. Negative eigenvalues are clamped to zero.
EmbeddingMatrix classical_mds(const DistanceMatrix& d, std::size_t dims);

EmbeddingMatrix isomap(const EmbeddingMatrix& x, std::size_t dims, std::size_t k);

struct TsneResult {
  EmbeddingMatrix embedding;
  // Gaussian precision 1 / (2 sigma_i^2) found by the perplexity search.
  std::vector<double> betas;
  double kl_after_exaggeration = 0.0;
  double kl_final = 0.0;
};

TsneResult tsne_detailed(const EmbeddingMatrix& x, const ReducerConfig& cfg);
EmbeddingMatrix tsne(const EmbeddingMatrix& x, const ReducerConfig& cfg);

struct UmapCurve {
  double a = 0.0;
  double b = 0.0;
};

// Least-squares fit of 1 / (1 + a x^(2b)) to the membership target that is 1
// below min_dist and exp(-(x - min_dist) / spread) beyond, on 300 points of
// [0, 3 * spread].
UmapCurve fit_umap_curve(double min_dist, double spread = 1.0);

struct UmapResult {
  EmbeddingMatrix embedding;
  UmapCurve curve;
  std::size_t epochs = 0;
};

UmapResult umap_detailed(const EmbeddingMatrix& x, const ReducerConfig& cfg);
EmbeddingMatrix umap(const EmbeddingMatrix& x, const ReducerConfig& cfg);

// Applies cfg.method; None returns the input unchanged.
EmbeddingMatrix reduce(const EmbeddingMatrix& x, const ReducerConfig& cfg);

}  // namespace owcluster
