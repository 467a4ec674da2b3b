#include "owcluster/core.hpp"

#include <cmath>
#include <string>

namespace owcluster {

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t cols, std::vector<float> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(rows_ * cols_) + " values, got " +
                    std::to_string(values_.size()));
  }
}

void validate(const EmbeddingMatrix& matrix) {
  if (matrix.rows() == 0 || matrix.cols() == 0) {
    throw Error(ErrorCode::EmptyMatrix, "matrix has shape " + std::to_string(matrix.rows()) + "x" +
                                            std::to_string(matrix.cols()));
  }
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      if (!std::isfinite(matrix(r, c))) {
        throw Error(ErrorCode::NonFiniteValue,
                    "(" + std::to_string(r) + ", " + std::to_string(c) + ")");
      }
    }
  }
}

ClusterAssignment::ClusterAssignment(std::vector<std::uint32_t> labels, std::size_t k)
    : labels_(std::move(labels)), k_(k), sizes_(k, 0) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] >= k_) {
      throw Error(ErrorCode::InvalidArgument, "cluster index " + std::to_string(labels_[i]) +
                                                  " at instance " + std::to_string(i) +
                                                  " outside [0, " + std::to_string(k_) + ")");
    }
    ++sizes_[labels_[i]];
  }
  for (std::size_t j = 0; j < k_; ++j) {
    if (sizes_[j] == 0) {
      throw Error(ErrorCode::InvalidArgument, "cluster " + std::to_string(j) + " is empty");
    }
  }
}

ClusterAssignment& ClusterAssignment::attach_centroids(const EmbeddingMatrix& y) {
  if (y.rows() != labels_.size()) {
    throw Error(ErrorCode::LengthMismatch, "assignment covers " + std::to_string(labels_.size()) +
                                               " instances, matrix has " + std::to_string(y.rows()));
  }
  const std::size_t d = y.cols();
  std::vector<double> sums(k_ * d, 0.0);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const auto r = y.row(i);
    double* dst = sums.data() + labels_[i] * d;
    for (std::size_t c = 0; c < d; ++c) dst[c] += r[c];
  }
  for (std::size_t j = 0; j < k_; ++j) {
    for (std::size_t c = 0; c < d; ++c) sums[j * d + c] /= static_cast<double>(sizes_[j]);
  }
  centroids_ = std::move(sums);
  return *this;
}

ClusterAssignment& ClusterAssignment::attach_medoids(std::vector<std::size_t> medoids) {
  if (medoids.size() != k_) {
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(k_) + " medoids");
  }
  medoids_ = std::move(medoids);
  return *this;
}

std::size_t Rng::index(std::size_t n) {
  auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return i < n ? i : n - 1;
}

double Rng::normal() {
  if (spare_normal_) {
    const double v = *spare_normal_;
    spare_normal_.reset();
    return v;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_normal_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

RngSeed derive_seed(RngSeed seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace owcluster
