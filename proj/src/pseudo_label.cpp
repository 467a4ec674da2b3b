#include "owcluster/pseudo_label.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace owcluster {

PseudoLabelSet core_percentile_labels(const EmbeddingMatrix& y, const ClusterAssignment& a,
                                      double percentile) {
  if (!(percentile > 0.0 && percentile <= 1.0)) {
    throw Error(ErrorCode::BadPercentile, "percentile " + std::to_string(percentile) +
                                              " outside (0, 1]");
  }
  if (y.rows() != a.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(y.rows()) + " rows vs " +
                                               std::to_string(a.size()) + " labels");
  }
  const std::size_t dims = y.cols();
  std::vector<double> centroids;
  if (a.centroids() && a.centroids()->size() == a.k() * dims) {
    centroids = *a.centroids();
  } else {
    ClusterAssignment copy = a;
    copy.attach_centroids(y);
    centroids = *copy.centroids();
  }

  std::vector<std::vector<std::pair<double, std::size_t>>> members(a.k());
  for (std::size_t i = 0; i < y.rows(); ++i) {
    const double* mu = centroids.data() + a[i] * dims;
    double sq = 0.0;
    for (std::size_t c = 0; c < dims; ++c) {
      const double diff = y(i, c) - mu[c];
      sq += diff * diff;
    }
    members[a[i]].emplace_back(sq, i);
  }

  std::vector<std::pair<std::size_t, std::uint32_t>> kept;
  for (std::size_t j = 0; j < a.k(); ++j) {
    auto& list = members[j];
    std::sort(list.begin(), list.end());
    // the epsilon keeps exact products such as 0.7 * 10 from rounding up
    const double wanted = std::ceil(percentile * static_cast<double>(list.size()) - 1e-9);
    const std::size_t keep =
        std::clamp<std::size_t>(static_cast<std::size_t>(wanted), 1, list.size());
    for (std::size_t t = 0; t < keep; ++t) kept.emplace_back(list[t].second, static_cast<std::uint32_t>(j));
  }
  std::sort(kept.begin(), kept.end());

  PseudoLabelSet out;
  out.percentile = percentile;
  for (const auto& [index, label] : kept) {
    out.kept_indices.push_back(index);
    out.pseudo_labels.push_back(label);
  }
  return out;
}

}  // namespace owcluster
