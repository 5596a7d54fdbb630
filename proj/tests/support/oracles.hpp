#pragma once

// Brute-force reference implementations and fixture builders shared by the
// unit, property and CLI tests.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "hebbcl/hebbcl.hpp"

namespace oracle {

using hebbcl::RowMatrix;

inline RowMatrix<float> random_matrix(hebbcl::Rng& rng, std::size_t rows, std::size_t cols, float lo = 0.0f,
                                      float hi = 1.0f) {
  RowMatrix<float> m(rows, cols);
  for (float& v : m.data()) v = lo + (hi - lo) * rng.uniform_float();
  return m;
}

inline std::vector<float> random_vector(hebbcl::Rng& rng, std::size_t n, float lo = 0.0f, float hi = 1.0f) {
  std::vector<float> v(n);
  for (float& x : v) x = lo + (hi - lo) * rng.uniform_float();
  return v;
}

inline double naive_dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

inline double naive_sqdist(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (static_cast<double>(a[i]) - b[i]) * (static_cast<double>(a[i]) - b[i]);
  return s;
}

/// Lowest index among maximal dot products over eligible rows.
inline std::size_t naive_winner(const hebbcl::Network& net, std::span<const float> x, bool unfrozen_only) {
  std::size_t best = net.size();
  double bv = 0.0;
  for (std::size_t j = 0; j < net.size(); ++j) {
    if (unfrozen_only && net.is_frozen(j)) continue;
    const double a = hebbcl::dot(net.row(j), x);
    if (best == net.size() || a > bv) {
      best = j;
      bv = a;
    }
  }
  return best;
}

/// Full sort by (value desc, index asc), keep first k.
inline std::vector<float> naive_k_winners(std::span<const float> a, std::size_t k) {
  std::vector<std::size_t> idx(a.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return a[i] > a[j]; });
  std::vector<float> out(a.size(), 0.0f);
  for (std::size_t t = 0; t < k; ++t) out[idx[t]] = a[idx[t]];
  return out;
}

inline double sse_of(const std::vector<std::vector<double>>& pts, const std::vector<std::size_t>& assign,
                     std::size_t k) {
  const std::size_t d = pts.front().size();
  std::vector<std::vector<double>> mean(k, std::vector<double>(d, 0.0));
  std::vector<std::size_t> cnt(k, 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ++cnt[assign[i]];
    for (std::size_t t = 0; t < d; ++t) mean[assign[i]][t] += pts[i][t];
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (double& v : mean[c]) v /= static_cast<double>(std::max<std::size_t>(cnt[c], 1));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t t = 0; t < d; ++t) s += (pts[i][t] - mean[assign[i]][t]) * (pts[i][t] - mean[assign[i]][t]);
  }
  return s;
}

/// Minimum within-cluster SSE over all partitions into exactly k non-empty
/// clusters, by enumerating k^N labelings.
inline double exhaustive_min_sse(const std::vector<std::vector<double>>& pts, std::size_t k) {
  const std::size_t n = pts.size();
  std::vector<std::size_t> assign(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<bool> used(k, false);
    for (auto a : assign) used[a] = true;
    if (std::all_of(used.begin(), used.end(), [](bool b) { return b; })) best = std::min(best, sse_of(pts, assign, k));
    std::size_t i = 0;
    while (i < n && ++assign[i] == k) assign[i++] = 0;
    if (i == n) break;
  }
  return best;
}

inline double brute_cluster_accuracy(const std::vector<std::size_t>& assign, const std::vector<int>& labels) {
  std::size_t correct = 0;
  std::vector<std::size_t> clusters(assign.begin(), assign.end());
  std::sort(clusters.begin(), clusters.end());
  clusters.erase(std::unique(clusters.begin(), clusters.end()), clusters.end());
  for (std::size_t c : clusters) {
    int best_label = 0;
    std::size_t best = 0;
    for (int l = 0; l <= *std::max_element(labels.begin(), labels.end()); ++l) {
      std::size_t n = 0;
      for (std::size_t i = 0; i < labels.size(); ++i) n += assign[i] == c && labels[i] == l;
      if (n > best) best = n, best_label = l;
    }
    for (std::size_t i = 0; i < labels.size(); ++i) correct += assign[i] == c && labels[i] == best_label;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(labels.size());
}

/// All-pairs distances, stable sort by (distance, index), majority vote with
/// smaller-label tie-break.
inline double brute_knn_error(const RowMatrix<float>& train, const std::vector<int>& train_labels,
                              const RowMatrix<float>& test, const std::vector<int>& test_labels, std::size_t k) {
  std::size_t wrong = 0;
  for (std::size_t q = 0; q < test.rows(); ++q) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < train.rows(); ++i) d.emplace_back(naive_sqdist(test.row(q), train.row(i)), i);
    std::sort(d.begin(), d.end());
    std::map<int, std::size_t> votes;
    for (std::size_t t = 0; t < k; ++t) ++votes[train_labels[d[t].second]];
    int best = -1;
    std::size_t bv = 0;
    for (const auto& [l, v] : votes) {
      if (v > bv) bv = v, best = l;
    }
    wrong += best != test_labels[q];
  }
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(test.rows());
}

// ---------------------------------------------------------------------------
// Fixtures

inline void put_be32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<unsigned char>(v >> s));
}

inline std::vector<unsigned char> idx_images(std::uint32_t n, std::uint32_t rows, std::uint32_t cols,
                                             const std::vector<unsigned char>& pixels) {
  std::vector<unsigned char> out;
  put_be32(out, 0x00000803);
  put_be32(out, n);
  put_be32(out, rows);
  put_be32(out, cols);
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

inline std::vector<unsigned char> idx_labels(const std::vector<unsigned char>& labels) {
  std::vector<unsigned char> out;
  put_be32(out, 0x00000801);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

inline std::vector<unsigned char> cifar_record(unsigned char label, const std::vector<unsigned char>& pixels) {
  std::vector<unsigned char> out{label};
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

/// Dataset with `per_class` samples per class; class c lights a disjoint band
/// of `dim / n_classes` pixels with random intensities in [0.5, 1].
inline hebbcl::LabeledDataset band_dataset(int n_classes, std::size_t per_class, std::size_t dim,
                                           std::uint64_t seed) {
  hebbcl::Rng rng(seed);
  hebbcl::LabeledDataset ds;
  ds.features = RowMatrix<float>(0, dim);
  ds.shape = {1, 1, dim};
  const std::size_t band = dim / static_cast<std::size_t>(n_classes);
  for (int c = 0; c < n_classes; ++c) {
    for (std::size_t s = 0; s < per_class; ++s) {
      std::vector<float> x(dim, 0.0f);
      for (std::size_t i = 0; i < band; ++i) x[static_cast<std::size_t>(c) * band + i] = 0.5f + 0.5f * rng.uniform_float();
      ds.features.append_row(x);
      ds.labels.push_back(c);
    }
  }
  return ds;
}

}  // namespace oracle
