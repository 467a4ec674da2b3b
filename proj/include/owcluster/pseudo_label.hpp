#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "owcluster/core.hpp"

namespace owcluster {

struct PseudoLabelSet {
  // Ascending instance indices that were kept.
  std::vector<std::size_t> kept_indices;
  // Cluster index of each kept instance, parallel to kept_indices.
  std::vector<std::uint32_t> pseudo_labels;
  double percentile = 1.0;
};

// Keeps, per cluster, the ceil(percentile * size) members (at least one)
// closest to the cluster centroid in y; ties resolve to the lower index.
// Centroids attached to `a` are used when present, otherwise the member
// means of y.
PseudoLabelSet core_percentile_labels(const EmbeddingMatrix& y, const ClusterAssignment& a,
                                      double percentile);

}  // namespace owcluster
