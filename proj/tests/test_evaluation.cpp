#include <gtest/gtest.h>

#include "hebbcl/hebbcl.hpp"
#include "support/oracles.hpp"

using namespace hebbcl;

namespace {

SparseRows dense_points(const std::vector<std::vector<float>>& pts) {
  SparseRows s(pts.front().size());
  for (const auto& p : pts) s.append_dense_row(p);
  return s;
}

}  // namespace

TEST(SparseRows, DenseRoundTripAndNorms) {
  Rng rng(4);
  auto m = oracle::random_matrix(rng, 5, 7);
  m(2, 3) = 0.0f;
  m(4, 0) = 0.0f;
  const auto s = SparseRows::from_dense(m);
  EXPECT_EQ(s.nnz(), 33u);
  EXPECT_EQ(s.to_dense(), m);
  std::vector<double> dense(7, 0.5);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(s.squared_norm(i), oracle::naive_dot(m.row(i), m.row(i)), 1e-6);
    double d = 0.0;
    for (float v : m.row(i)) d += 0.5 * v;
    EXPECT_NEAR(s.dot_dense(i, dense), d, 1e-6);
  }
  SparseRows bad(3);
  const std::vector<std::uint32_t> cols{5};
  const std::vector<float> vals{1.0f};
  EXPECT_THROW(bad.append_row(cols, vals), InvalidArgument);
}

TEST(Represent, EmptyFullAndSparse) {
  auto net = Network::create(6, 10, 1.0f, 3);
  EXPECT_EQ(represent_dataset(net, RowMatrix<float>(0, 6), 3).rows(), 0u);
  Rng rng(8);
  const auto x = oracle::random_matrix(rng, 4, 6);
  const auto full = represent_dataset(net, x, 10);
  const auto sparse = represent_dataset(net, x, 3);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(full.dense_row(i), net.activations(x.row(i)));
    EXPECT_EQ(sparse.dense_row(i), net.encode(x.row(i), 3));
    EXPECT_LE(sparse.indices(i).size(), 3u);
  }
  EXPECT_THROW(represent_dataset(net, x, 0), InvalidArgument);
  EXPECT_THROW(represent_dataset(net, x, 11), InvalidArgument);
  EXPECT_THROW(represent_dataset(net, RowMatrix<float>(1, 5), 3), InvalidArgument);
}

TEST(KMeans, SeparatesTwoBlobs) {
  Rng rng(1);
  std::vector<std::vector<float>> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({rng.uniform_float(), rng.uniform_float()});
  for (int i = 0; i < 20; ++i) pts.push_back({10 + rng.uniform_float(), 10 + rng.uniform_float()});
  const auto res = kmeans(dense_points(pts), {2, 5, 300, 1e-4});
  for (int i = 1; i < 20; ++i) EXPECT_EQ(res.assignments[static_cast<std::size_t>(i)], res.assignments[0]);
  for (int i = 21; i < 40; ++i) EXPECT_EQ(res.assignments[static_cast<std::size_t>(i)], res.assignments[20]);
  EXPECT_NE(res.assignments[0], res.assignments[20]);
}

TEST(KMeans, OneClusterIsTheMean) {
  const auto res = kmeans(dense_points({{0, 0}, {2, 0}, {4, 6}}), {1, 0, 300, 1e-9});
  EXPECT_NEAR(res.centroids(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(res.centroids(0, 1), 2.0, 1e-12);
}

TEST(KMeans, ErrorsAndDeterminism) {
  const auto pts = dense_points({{0, 0}, {1, 1}});
  EXPECT_THROW(kmeans(pts, {3, 0, 10, 1e-4}), InvalidArgument);
  EXPECT_THROW(kmeans(pts, {0, 0, 10, 1e-4}), InvalidArgument);
  Rng rng(2);
  std::vector<std::vector<float>> many;
  for (int i = 0; i < 60; ++i) many.push_back(oracle::random_vector(rng, 4));
  const auto p = dense_points(many);
  EXPECT_EQ(kmeans(p, {5, 9, 300, 1e-4}).assignments, kmeans(p, {5, 9, 300, 1e-4}).assignments);
}

TEST(KMeans, RestartsNeverWorseThanFirstRun) {
  Rng rng(5);
  std::vector<std::vector<float>> pts;
  for (int i = 0; i < 50; ++i) pts.push_back(oracle::random_vector(rng, 3));
  const auto p = dense_points(pts);
  KMeansOptions one{6, 4, 300, 1e-6, 1};
  KMeansOptions ten = one;
  ten.n_init = 10;
  EXPECT_EQ(kmeans(p, one).assignments, kmeans_single(p, one).assignments);
  EXPECT_LE(kmeans(p, ten).sse(), kmeans(p, one).sse());
  ten.n_init = 0;
  EXPECT_THROW(kmeans(p, ten), InvalidArgument);
}

TEST(KMeans, DuplicatePointsDoNotBreakSeeding) {
  const auto res = kmeans(dense_points({{1, 1}, {1, 1}, {1, 1}, {1, 1}}), {3, 0, 50, 1e-4});
  EXPECT_EQ(res.assignments.size(), 4u);
  EXPECT_NEAR(res.sse(), 0.0, 1e-12);
}

TEST(KMeans, SseHistoryMatchesRecomputation) {
  Rng rng(3);
  std::vector<std::vector<float>> pts;
  for (int i = 0; i < 40; ++i) pts.push_back(oracle::random_vector(rng, 3));
  const auto p = dense_points(pts);
  const auto res = kmeans(p, {4, 1, 300, 1e-6});
  EXPECT_NEAR(res.sse(), within_cluster_sse(p, res.assignments, 4), 1e-6);
}

TEST(ClusterAccuracy, Examples) {
  const std::vector<std::size_t> same{0, 1, 2, 1};
  const std::vector<int> labels{0, 1, 2, 1};
  EXPECT_DOUBLE_EQ(cluster_accuracy(same, labels), 100.0);
  std::vector<std::size_t> one(10, 0);
  std::vector<int> split{0, 0, 0, 0, 0, 0, 1, 1, 1, 1};
  EXPECT_DOUBLE_EQ(cluster_accuracy(one, split), 60.0);
  const std::vector<std::size_t> a{0, 0};
  const std::vector<int> tie{1, 0};
  EXPECT_DOUBLE_EQ(cluster_accuracy(a, tie), 50.0);
  EXPECT_THROW(cluster_accuracy(a, split), InvalidArgument);
}

TEST(ClusterAccuracy, MatchesBruteForce) {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::size_t> assign(50);
    std::vector<int> labels(50);
    for (auto& v : assign) v = rng.below(7);
    for (auto& l : labels) l = static_cast<int>(rng.below(4));
    EXPECT_DOUBLE_EQ(cluster_accuracy(assign, labels), oracle::brute_cluster_accuracy(assign, labels));
  }
}

TEST(Knn, IdenticalPointAndConstantLabels) {
  const auto train = dense_points({{0, 0}, {5, 5}, {9, 1}});
  const std::vector<int> tl{3, 7, 1};
  EXPECT_DOUBLE_EQ(knn_error(train, tl, dense_points({{5, 5}}), std::vector<int>{7}, 1), 0.0);
  const std::vector<int> same{2, 2, 2};
  const std::vector<int> test_labels{2, 1, 2, 0};
  EXPECT_DOUBLE_EQ(knn_error(train, same, dense_points({{1, 1}, {2, 2}, {3, 3}, {4, 4}}), test_labels, 3), 50.0);
}

TEST(Knn, TieBreaks) {
  // Equidistant neighbours: the lower training index wins the k=1 slot.
  const auto train = dense_points({{1, 0}, {-1, 0}});
  EXPECT_DOUBLE_EQ(knn_error(train, std::vector<int>{4, 2}, dense_points({{0, 0}}), std::vector<int>{4}, 1), 0.0);
  // Vote tie with k=2: the smaller label wins.
  EXPECT_DOUBLE_EQ(knn_error(train, std::vector<int>{4, 2}, dense_points({{0, 0}}), std::vector<int>{2}, 2), 0.0);
}

TEST(Knn, Errors) {
  const auto train = dense_points({{1, 0}});
  EXPECT_THROW(knn_error(SparseRows(2), {}, train, std::vector<int>{0}, 1), InvalidArgument);
  EXPECT_THROW(knn_error(train, std::vector<int>{0}, train, std::vector<int>{0}, 2), InvalidArgument);
  EXPECT_THROW(knn_error(train, std::vector<int>{0, 1}, train, std::vector<int>{0}, 1), InvalidArgument);
}

TEST(Knn, MatchesBruteForce) {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    auto tr = oracle::random_matrix(rng, 30, 5);
    auto te = oracle::random_matrix(rng, 10, 5);
    for (float& v : tr.data()) v = rng.below(3) == 0 ? 0.0f : v;
    std::vector<int> tl(30), sl(10);
    for (auto& l : tl) l = static_cast<int>(rng.below(3));
    for (auto& l : sl) l = static_cast<int>(rng.below(3));
    EXPECT_DOUBLE_EQ(knn_error(SparseRows::from_dense(tr), tl, SparseRows::from_dense(te), sl, 3),
                     oracle::brute_knn_error(tr, tl, te, sl, 3));
  }
}

TEST(Report, JsonAndCsv) {
  EvalReport r;
  r.dataset = "mnist";
  r.mode = "unsupervised";
  r.cluster_accuracy_pct = 75.5;
  r.n_clusters = 50;
  r.final_R = 900;
  r.frozen_count = 400;
  const auto j = to_json(r);
  EXPECT_EQ(j["cluster_accuracy_pct"], 75.5);
  EXPECT_FALSE(j.contains("knn_error_pct"));
  EXPECT_EQ(j["config"]["k_winners"], to_key_values(TrainConfig{})[2].second);
  const auto row = csv_row(r);
  const auto header = csv_header();
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
  EXPECT_EQ(row.rfind("H+F+E+K,1,1,1,1,50,", 0), 0u);
}
