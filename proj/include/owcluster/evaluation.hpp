#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "owcluster/core.hpp"

namespace owcluster {

// Co-occurrence counts of two labelings; rows follow the first labeling's
// distinct ids in ascending order, columns the second's.
struct ContingencyTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> counts;  // rows x cols, row-major
  std::size_t n = 0;
  // Unordered pairs on which both labelings agree (same/same or diff/diff).
  std::uint64_t pair_agreements = 0;
  std::uint64_t pair_disagreements = 0;

  std::size_t operator()(std::size_t r, std::size_t c) const { return counts[r * cols + c]; }

  static ContingencyTable build(std::span<const std::uint32_t> first,
                                std::span<const std::uint32_t> second);
};

// Minimum-cost perfect matching on a square row-major cost matrix; returns
// the column assigned to each row.
std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t size);

double clustering_accuracy(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth);
double nmi(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth);
double ari(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth);

inline double clustering_accuracy(const ClusterAssignment& pred, const LabelVector& truth) {
  return clustering_accuracy(pred.labels(), truth);
}
inline double nmi(const ClusterAssignment& pred, const LabelVector& truth) {
  return nmi(pred.labels(), truth);
}
inline double ari(const ClusterAssignment& pred, const LabelVector& truth) {
  return ari(pred.labels(), truth);
}

}  // namespace owcluster
