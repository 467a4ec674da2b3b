#include "owcluster/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace owcluster {
namespace {

void check_lengths(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(a.size()) + " predictions vs " + std::to_string(b.size()) + " labels");
  }
}

std::vector<std::size_t> dense_ids(std::span<const std::uint32_t> labels, std::size_t& distinct) {
  std::map<std::uint32_t, std::size_t> ids;
  for (auto v : labels) ids.emplace(v, 0);
  std::size_t next = 0;
  for (auto& [key, id] : ids) id = next++;
  distinct = next;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = ids[labels[i]];
  return out;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

double entropy(const std::vector<double>& marginal, double n) {
  double h = 0.0;
  for (double c : marginal) {
    if (c > 0.0) h -= (c / n) * std::log(c / n);
  }
  return h;
}

}  // namespace

ContingencyTable ContingencyTable::build(std::span<const std::uint32_t> first,
                                         std::span<const std::uint32_t> second) {
  check_lengths(first, second);
  ContingencyTable t;
  const auto r = dense_ids(first, t.rows);
  const auto c = dense_ids(second, t.cols);
  t.n = first.size();
  t.counts.assign(t.rows * t.cols, 0);
  for (std::size_t i = 0; i < t.n; ++i) ++t.counts[r[i] * t.cols + c[i]];

  std::uint64_t both_same = 0;
  std::vector<std::uint64_t> row_sum(t.rows, 0), col_sum(t.cols, 0);
  for (std::size_t i = 0; i < t.rows; ++i) {
    for (std::size_t j = 0; j < t.cols; ++j) {
      const std::uint64_t v = t.counts[i * t.cols + j];
      both_same += v * (v - (v > 0 ? 1 : 0)) / 2;
      row_sum[i] += v;
      col_sum[j] += v;
    }
  }
  std::uint64_t same_first = 0, same_second = 0;
  for (auto v : row_sum) same_first += v * (v - (v > 0 ? 1 : 0)) / 2;
  for (auto v : col_sum) same_second += v * (v - (v > 0 ? 1 : 0)) / 2;
  const std::uint64_t pairs = static_cast<std::uint64_t>(t.n) * (t.n > 0 ? t.n - 1 : 0) / 2;
  const std::uint64_t both_diff = pairs - same_first - same_second + both_same;
  t.pair_agreements = both_same + both_diff;
  t.pair_disagreements = pairs - t.pair_agreements;
  return t;
}

std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t size) {
  // Shortest augmenting path with row/column potentials, 1-based internally.
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = size;
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

double clustering_accuracy(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth) {
  const auto t = ContingencyTable::build(pred, truth);
  if (t.n == 0) return 1.0;
  const std::size_t size = std::max(t.rows, t.cols);
  std::size_t peak = 0;
  for (auto c : t.counts) peak = std::max(peak, c);
  // zero-padded square matrix; maximize matches via cost = peak - count
  std::vector<double> cost(size * size, static_cast<double>(peak));
  for (std::size_t r = 0; r < t.rows; ++r) {
    for (std::size_t c = 0; c < t.cols; ++c) {
      cost[r * size + c] = static_cast<double>(peak - t(r, c));
    }
  }
  const auto match = solve_assignment(cost, size);
  std::size_t correct = 0;
  for (std::size_t r = 0; r < t.rows; ++r) {
    if (match[r] < t.cols) correct += t(r, match[r]);
  }
  return static_cast<double>(correct) / static_cast<double>(t.n);
}

double nmi(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth) {
  const auto t = ContingencyTable::build(pred, truth);
  const double n = static_cast<double>(t.n);
  std::vector<double> rows(t.rows, 0.0), cols(t.cols, 0.0);
  for (std::size_t r = 0; r < t.rows; ++r) {
    for (std::size_t c = 0; c < t.cols; ++c) {
      rows[r] += static_cast<double>(t(r, c));
      cols[c] += static_cast<double>(t(r, c));
    }
  }
  const double hu = entropy(rows, n);
  const double hv = entropy(cols, n);
  if (hu == 0.0 && hv == 0.0) return 1.0;
  if (hu == 0.0 || hv == 0.0) return 0.0;
  double mi = 0.0;
  for (std::size_t r = 0; r < t.rows; ++r) {
    for (std::size_t c = 0; c < t.cols; ++c) {
      const double nij = static_cast<double>(t(r, c));
      if (nij > 0.0) mi += (nij / n) * std::log(n * nij / (rows[r] * cols[c]));
    }
  }
  return std::clamp(mi / std::sqrt(hu * hv), 0.0, 1.0);
}

double ari(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth) {
  const auto t = ContingencyTable::build(pred, truth);
  const double n = static_cast<double>(t.n);
  double index = 0.0;
  std::vector<double> rows(t.rows, 0.0), cols(t.cols, 0.0);
  for (std::size_t r = 0; r < t.rows; ++r) {
    for (std::size_t c = 0; c < t.cols; ++c) {
      const double v = static_cast<double>(t(r, c));
      index += choose2(v);
      rows[r] += v;
      cols[c] += v;
    }
  }
  double sum_rows = 0.0, sum_cols = 0.0;
  for (double v : rows) sum_rows += choose2(v);
  for (double v : cols) sum_cols += choose2(v);
  const double total = choose2(n);
  if (total == 0.0) return 1.0;
  const double expected = sum_rows * sum_cols / total;
  const double maximum = 0.5 * (sum_rows + sum_cols);
  if (maximum == expected) return 1.0;
  return (index - expected) / (maximum - expected);
}

}  // namespace owcluster
