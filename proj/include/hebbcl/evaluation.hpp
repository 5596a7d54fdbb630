#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hebbcl/datasets.hpp"
#include "hebbcl/errors.hpp"
#include "hebbcl/matrix.hpp"
#include "hebbcl/network.hpp"
#include "hebbcl/util.hpp"

namespace hebbcl {

/// Compressed sparse rows. k-winners codes have at most k nonzeros per row,
/// which keeps k-means and k-NN over tens of thousands of codes cheap.
class SparseRows {
 public:
  SparseRows() = default;
  explicit SparseRows(std::size_t cols) : cols_(cols) {}

  std::size_t rows() const noexcept { return row_ptr_.size() - 1; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  /// Appends a row given as (column, value) pairs; zeros are dropped.
  void append_row(std::span<const std::uint32_t> cols, std::span<const float> values) {
    if (cols.size() != values.size()) throw InvalidArgument("SparseRows: index/value length mismatch");
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] >= cols_) throw InvalidArgument("SparseRows: column out of range");
      if (values[i] == 0.0f) continue;
      idx_.push_back(cols[i]);
      values_.push_back(values[i]);
    }
    row_ptr_.push_back(values_.size());
  }

  void append_dense_row(std::span<const float> row) {
    if (row.size() != cols_) throw InvalidArgument("SparseRows: dense row length mismatch");
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] == 0.0f) continue;
      idx_.push_back(static_cast<std::uint32_t>(j));
      values_.push_back(row[j]);
    }
    row_ptr_.push_back(values_.size());
  }

  std::span<const std::uint32_t> indices(std::size_t i) const {
    return std::span<const std::uint32_t>(idx_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
  }
  std::span<const float> values(std::size_t i) const {
    return std::span<const float>(values_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
  }

  std::vector<float> dense_row(std::size_t i) const {
    std::vector<float> out(cols_, 0.0f);
    const auto ix = indices(i);
    const auto v = values(i);
    for (std::size_t k = 0; k < ix.size(); ++k) out[ix[k]] = v[k];
    return out;
  }

  RowMatrix<float> to_dense() const {
    RowMatrix<float> out(rows(), cols_);
    for (std::size_t i = 0; i < rows(); ++i) {
      const auto ix = indices(i);
      const auto v = values(i);
      for (std::size_t k = 0; k < ix.size(); ++k) out(i, ix[k]) = v[k];
    }
    return out;
  }

  static SparseRows from_dense(const RowMatrix<float>& m) {
    SparseRows s(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) s.append_dense_row(m.row(i));
    return s;
  }

  double squared_norm(std::size_t i) const {
    double s = 0.0;
    for (float v : values(i)) s += static_cast<double>(v) * v;
    return s;
  }

  double dot_dense(std::size_t i, std::span<const double> dense) const {
    double s = 0.0;
    const auto ix = indices(i);
    const auto v = values(i);
    for (std::size_t k = 0; k < ix.size(); ++k) s += static_cast<double>(v[k]) * dense[ix[k]];
    return s;
  }

 private:
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> idx_;
  std::vector<float> values_;
};

/// Encodes every sample with y = f(Wx). `k == net.size()` gives raw activations.
/// Labels are not read.
inline SparseRows represent_dataset(const Network& net, const RowMatrix<float>& features, std::size_t k) {
  if (features.rows() > 0 && features.cols() != net.input_dim()) {
    throw InvalidArgument("represent_dataset: features have dimension " + std::to_string(features.cols()) +
                          ", network expects " + std::to_string(net.input_dim()));
  }
  if (k == 0 || k > net.size()) throw InvalidArgument("represent_dataset: k out of range");
  SparseRows out(net.size());
  std::vector<float> act(net.size());
  std::vector<std::uint32_t> cols(k);
  std::vector<float> vals(k);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    net.activations_into(features.row(i), act);
    if (k == net.size()) {
      out.append_dense_row(act);
      continue;
    }
    auto top = top_k_indices(act, k);
    std::sort(top.begin(), top.end());
    for (std::size_t t = 0; t < k; ++t) {
      cols[t] = static_cast<std::uint32_t>(top[t]);
      vals[t] = act[top[t]];
    }
    out.append_row(cols, vals);
  }
  return out;
}

inline SparseRows represent_dataset(const Network& net, const LabeledDataset& data, std::size_t k) {
  return represent_dataset(net, data.features, k);
}

// ---------------------------------------------------------------------------
// k-means

struct KMeansOptions {
  std::size_t n_clusters = 10;
  std::uint64_t seed = 0;
  std::size_t max_iters = 300;
  double tol = 1e-4;
  /// Independent k-means++ restarts; the lowest final SSE is kept.
  std::size_t n_init = 10;
};

struct KMeansResult {
  std::vector<std::size_t> assignments;
  RowMatrix<double> centroids;
  /// Within-cluster SSE after each assignment step.
  std::vector<double> sse_history;
  std::size_t iterations = 0;
  std::size_t reseeded_empty = 0;

  double sse() const { return sse_history.empty() ? 0.0 : sse_history.back(); }
};

/// Within-cluster sum of squared distances for a fixed assignment, using the
/// cluster means as centers.
inline double within_cluster_sse(const SparseRows& pts, std::span<const std::size_t> assign, std::size_t n_clusters) {
  RowMatrix<double> sums(n_clusters, pts.cols());
  std::vector<std::size_t> counts(n_clusters);
  std::vector<double> sqnorm(n_clusters);
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    auto s = sums.row(assign[i]);
    const auto ix = pts.indices(i);
    const auto v = pts.values(i);
    for (std::size_t k = 0; k < ix.size(); ++k) s[ix[k]] += v[k];
    ++counts[assign[i]];
    sqnorm[assign[i]] += pts.squared_norm(i);
  }
  double total = 0.0;
  for (std::size_t c = 0; c < n_clusters; ++c) {
    if (counts[c] == 0) continue;
    double s2 = 0.0;
    for (double v : sums.row(c)) s2 += v * v;
    total += sqnorm[c] - s2 / static_cast<double>(counts[c]);
  }
  return std::max(total, 0.0);
}

namespace detail {

struct CentroidCache {
  RowMatrix<double> c;
  std::vector<double> sqnorm;

  void refresh(std::size_t j) {
    double s = 0.0;
    for (double v : c.row(j)) s += v * v;
    sqnorm[j] = s;
  }
};

inline double dist2(const SparseRows& pts, std::size_t i, double pt_norm, const CentroidCache& cc, std::size_t j) {
  return std::max(0.0, pt_norm + cc.sqnorm[j] - 2.0 * pts.dot_dense(i, cc.c.row(j)));
}

}  // namespace detail

/// Lloyd's algorithm from one k-means++ seeding (opt.n_init is ignored). Stops
/// after max_iters or when no centroid moves by tol or more (Euclidean). A
/// cluster that loses all its points is re-seeded at the point farthest from
/// its own centroid.
inline KMeansResult kmeans_single(const SparseRows& pts, const KMeansOptions& opt) {
  const std::size_t n = pts.rows();
  const std::size_t k = opt.n_clusters;
  if (k == 0) throw InvalidArgument("kmeans: n_clusters must be >= 1");
  if (n < k) {
    throw InvalidArgument("kmeans: " + std::to_string(n) + " points < " + std::to_string(k) + " clusters");
  }
  const std::size_t dim = pts.cols();
  std::vector<double> pt_norm(n);
  for (std::size_t i = 0; i < n; ++i) pt_norm[i] = pts.squared_norm(i);

  detail::CentroidCache cc{RowMatrix<double>(k, dim), std::vector<double>(k)};
  auto set_centroid_to_point = [&](std::size_t j, std::size_t i) {
    auto row = cc.c.row(j);
    std::fill(row.begin(), row.end(), 0.0);
    const auto ix = pts.indices(i);
    const auto v = pts.values(i);
    for (std::size_t t = 0; t < ix.size(); ++t) row[ix[t]] = v[t];
    cc.refresh(j);
  };

  // k-means++ seeding
  Rng rng(opt.seed);
  set_centroid_to_point(0, rng.below(n));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = detail::dist2(pts, i, pt_norm[i], cc, 0);
  for (std::size_t j = 1; j < k; ++j) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double r = rng.uniform_double() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > r) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);
    }
    set_centroid_to_point(j, pick);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], detail::dist2(pts, i, pt_norm[i], cc, j));
  }

  KMeansResult res;
  res.assignments.assign(n, 0);
  std::vector<double> best_d(n);
  RowMatrix<double> sums(k, dim);
  std::vector<std::size_t> counts(k);
  for (std::size_t it = 0; it < opt.max_iters; ++it) {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        const double d = detail::dist2(pts, i, pt_norm[i], cc, j);
        if (d < bd) {
          bd = d;
          best = j;
        }
      }
      res.assignments[i] = best;
      best_d[i] = bd;
      sse += bd;
    }
    res.sse_history.push_back(sse);
    res.iterations = it + 1;

    std::fill(sums.data().begin(), sums.data().end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto s = sums.row(res.assignments[i]);
      const auto ix = pts.indices(i);
      const auto v = pts.values(i);
      for (std::size_t t = 0; t < ix.size(); ++t) s[ix[t]] += v[t];
      ++counts[res.assignments[i]];
    }
    double max_shift = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      auto row = cc.c.row(j);
      if (counts[j] == 0) {
        // Point farthest from the centroid it is currently assigned to.
        const auto far = static_cast<std::size_t>(std::max_element(best_d.begin(), best_d.end()) - best_d.begin());
        std::vector<double> before(row.begin(), row.end());
        set_centroid_to_point(j, far);
        best_d[far] = 0.0;
        double shift = 0.0;
        for (std::size_t t = 0; t < dim; ++t) shift += (row[t] - before[t]) * (row[t] - before[t]);
        max_shift = std::max(max_shift, std::sqrt(shift));
        ++res.reseeded_empty;
        continue;
      }
      const auto s = sums.row(j);
      const double inv = 1.0 / static_cast<double>(counts[j]);
      double shift = 0.0;
      for (std::size_t t = 0; t < dim; ++t) {
        const double nv = s[t] * inv;
        shift += (nv - row[t]) * (nv - row[t]);
        row[t] = nv;
      }
      cc.refresh(j);
      max_shift = std::max(max_shift, std::sqrt(shift));
    }
    if (max_shift < opt.tol) break;
  }
  res.centroids = std::move(cc.c);
  return res;
}

/// Best of opt.n_init runs of kmeans_single. Run 0 uses opt.seed, run r > 0
/// uses derive_seed(opt.seed, r).
inline KMeansResult kmeans(const SparseRows& pts, const KMeansOptions& opt) {
  if (opt.n_init == 0) throw InvalidArgument("kmeans: n_init must be >= 1");
  KMeansResult best;
  for (std::size_t r = 0; r < opt.n_init; ++r) {
    KMeansOptions o = opt;
    o.seed = r == 0 ? opt.seed : derive_seed(opt.seed, r);
    auto res = kmeans_single(pts, o);
    if (r == 0 || res.sse() < best.sse()) best = std::move(res);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Scores

/// Each cluster is labeled with its most frequent true label (smaller label on
/// ties); returns the percentage of points whose cluster label is correct.
inline double cluster_accuracy(std::span<const std::size_t> assignments, std::span<const int> labels) {
  if (assignments.size() != labels.size()) {
    throw InvalidArgument("cluster_accuracy: " + std::to_string(assignments.size()) + " assignments vs " +
                          std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) return 0.0;
  std::map<std::size_t, std::map<int, std::size_t>> counts;
  for (std::size_t i = 0; i < labels.size(); ++i) ++counts[assignments[i]][labels[i]];
  std::size_t correct = 0;
  for (const auto& [cluster, by_label] : counts) {
    std::size_t best = 0;
    for (const auto& [label, c] : by_label) best = std::max(best, c);  // ascending labels: first max wins
    correct += best;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(labels.size());
}

/// Percentage of test points misclassified by a majority vote of their
/// `knn_k` nearest training points (Euclidean). Distance ties go to the lower
/// training index, vote ties to the smaller label.
inline double knn_error(const SparseRows& train, std::span<const int> train_labels, const SparseRows& test,
                        std::span<const int> test_labels, std::size_t knn_k = 10) {
  if (train.rows() == 0) throw InvalidArgument("knn_error: empty training set");
  if (train.rows() != train_labels.size() || test.rows() != test_labels.size()) {
    throw InvalidArgument("knn_error: representation/label count mismatch");
  }
  if (knn_k == 0 || knn_k > train.rows()) throw InvalidArgument("knn_error: knn_k out of range");
  if (train.cols() != test.cols()) throw InvalidArgument("knn_error: representation widths differ");
  if (test.rows() == 0) return 0.0;

  const std::size_t n_train = train.rows();
  std::vector<double> train_norm(n_train);
  for (std::size_t i = 0; i < n_train; ++i) train_norm[i] = train.squared_norm(i);

  // Column-major postings of the training set: for each column, the training
  // rows that are nonzero there.
  std::vector<std::size_t> col_ptr(train.cols() + 1, 0);
  for (std::size_t i = 0; i < n_train; ++i) {
    for (auto c : train.indices(i)) ++col_ptr[c + 1];
  }
  std::partial_sum(col_ptr.begin(), col_ptr.end(), col_ptr.begin());
  std::vector<std::uint32_t> post_row(train.nnz());
  std::vector<float> post_val(train.nnz());
  {
    auto fill = col_ptr;
    for (std::size_t i = 0; i < n_train; ++i) {
      const auto ix = train.indices(i);
      const auto v = train.values(i);
      for (std::size_t t = 0; t < ix.size(); ++t) {
        post_row[fill[ix[t]]] = static_cast<std::uint32_t>(i);
        post_val[fill[ix[t]]] = v[t];
        ++fill[ix[t]];
      }
    }
  }

  std::vector<double> dots(n_train);
  std::vector<std::size_t> cand(n_train);
  std::size_t wrong = 0;
  for (std::size_t q = 0; q < test.rows(); ++q) {
    std::fill(dots.begin(), dots.end(), 0.0);
    const auto ix = test.indices(q);
    const auto v = test.values(q);
    for (std::size_t t = 0; t < ix.size(); ++t) {
      for (std::size_t p = col_ptr[ix[t]]; p < col_ptr[ix[t] + 1]; ++p) {
        dots[post_row[p]] += static_cast<double>(v[t]) * post_val[p];
      }
    }
    const double qn = test.squared_norm(q);
    for (std::size_t i = 0; i < n_train; ++i) dots[i] = std::max(0.0, qn + train_norm[i] - 2.0 * dots[i]);
    std::iota(cand.begin(), cand.end(), std::size_t{0});
    auto closer = [&](std::size_t a, std::size_t b) { return dots[a] < dots[b] || (dots[a] == dots[b] && a < b); };
    std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(knn_k - 1), cand.end(), closer);
    std::map<int, std::size_t> votes;
    for (std::size_t t = 0; t < knn_k; ++t) ++votes[train_labels[cand[t]]];
    int best_label = votes.begin()->first;
    std::size_t best_votes = 0;
    for (const auto& [label, c] : votes) {
      if (c > best_votes) {
        best_votes = c;
        best_label = label;
      }
    }
    wrong += best_label != test_labels[q];
  }
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(test.rows());
}

}  // namespace hebbcl
