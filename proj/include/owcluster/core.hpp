#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "owcluster/error.hpp"

namespace owcluster {

// Dense row-major n x d matrix of 32-bit feature coordinates. Row i is
// instance i for the whole pipeline.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t cols, float fill = 0.0f)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  EmbeddingMatrix(std::size_t rows, std::size_t cols, std::vector<float> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  float operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }
  float& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }

  std::span<const float> row(std::size_t r) const noexcept {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<float> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }

  const std::vector<float>& values() const noexcept { return values_; }

  bool operator==(const EmbeddingMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> values_;
};

// Throws NonFiniteValue(row, col) or EmptyMatrix.
void validate(const EmbeddingMatrix& matrix);

// Ground-truth class ids; ids need not be contiguous.
using LabelVector = std::vector<std::uint32_t>;

// Symmetric n x n dissimilarities with a zero diagonal, stored in double.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * n_ + j]; }

  // Writes both (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double v) noexcept {
    values_[i * n_ + j] = v;
    values_[j * n_ + i] = v;
  }

  std::span<const double> row(std::size_t i) const noexcept { return {values_.data() + i * n_, n_}; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool operator==(const DistanceMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

// Cluster index per instance, with per-cluster sizes and optional centers.
// Construction enforces that every cluster in [0, k) is non-empty.
class ClusterAssignment {
 public:
  ClusterAssignment() = default;
  ClusterAssignment(std::vector<std::uint32_t> labels, std::size_t k);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t k() const noexcept { return k_; }
  const std::vector<std::uint32_t>& labels() const noexcept { return labels_; }
  std::uint32_t operator[](std::size_t i) const noexcept { return labels_[i]; }
  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }

  // k x d row-major centroids (means of member rows), computed in double.
  const std::optional<std::vector<double>>& centroids() const noexcept { return centroids_; }
  const std::optional<std::vector<std::size_t>>& medoids() const noexcept { return medoids_; }

  // Recomputes centroids as the arithmetic mean of the member rows of y.
  ClusterAssignment& attach_centroids(const EmbeddingMatrix& y);
  ClusterAssignment& attach_medoids(std::vector<std::size_t> medoids);

 private:
  std::vector<std::uint32_t> labels_;
  std::size_t k_ = 0;
  std::vector<std::size_t> sizes_;
  std::optional<std::vector<double>> centroids_;
  std::optional<std::vector<std::size_t>> medoids_;
};

struct KnnEdge {
  std::size_t target;
  double weight;

  bool operator==(const KnnEdge&) const = default;
};

// Weighted k-nearest-neighbor graph. Before symmetrization every node holds
// exactly k out-edges sorted by (weight, target).
struct KnnGraph {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::vector<KnnEdge>> adjacency;
  bool symmetrized = false;
};

using RngSeed = std::uint64_t;

// Seeded generator with platform-independent draws; the standard
// distributions are implementation-defined, so only the engine is reused.
class Rng {
 public:
  explicit Rng(RngSeed seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform in [0, n).
  std::size_t index(std::size_t n);
  double normal();

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

// Derives an independent stream for sub-task `stream` of a seeded operation.
RngSeed derive_seed(RngSeed seed, std::uint64_t stream);

}  // namespace owcluster
