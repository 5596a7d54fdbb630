#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "hebbcl/hebbcl.hpp"
#include "support/oracles.hpp"

using namespace hebbcl;

TEST(Network, CreateShapesAndInitRange) {
  const auto net = Network::create(4, 3, 0.01f, 1);
  EXPECT_EQ(net.size(), 3u);
  EXPECT_EQ(net.input_dim(), 4u);
  EXPECT_EQ(net.max_neurons(), 12u);
  EXPECT_EQ(net.frozen_count(), 0u);
  for (float v : net.weights().data()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 0.01f);
  }
  for (std::size_t j = 0; j < 3; ++j) EXPECT_FALSE(net.class_group(j));
}

TEST(Network, CreateRejectsBadArguments) {
  EXPECT_THROW(Network::create(0, 3, 0.01f, 1), InvalidArgument);
  EXPECT_THROW(Network::create(4, 0, 0.01f, 1), InvalidArgument);
  EXPECT_THROW(Network::create(4, 3, 0.0f, 1), InvalidArgument);
  EXPECT_THROW(Network::create(4, 3, 0.01f, 1, 2), InvalidArgument);
}

TEST(Network, SameSeedSameWeights) {
  EXPECT_EQ(Network::create(10, 5, 0.01f, 9), Network::create(10, 5, 0.01f, 9));
  EXPECT_FALSE(Network::create(10, 5, 0.01f, 9) == Network::create(10, 5, 0.01f, 10));
}

TEST(Network, ActivationsMatchNaive) {
  Rng rng(5);
  auto net = Network::from_parts(oracle::random_matrix(rng, 7, 13, -1, 1), std::vector<bool>(7), std::vector<ClassId>(7, -1));
  const auto x = oracle::random_vector(rng, 13);
  const auto a = net.activations(x);
  ASSERT_EQ(a.size(), 7u);
  for (std::size_t j = 0; j < 7; ++j) EXPECT_NEAR(a[j], oracle::naive_dot(net.row(j), x), 1e-5);
  EXPECT_THROW(net.activations(std::vector<float>(12)), InvalidArgument);
}

TEST(Network, ActivationsOfZeroNetAreZero) {
  auto net = Network::from_parts(RowMatrix<float>(3, 2), std::vector<bool>(3), std::vector<ClassId>(3, -1));
  EXPECT_EQ(net.activations(std::vector<float>{1, 2}), (std::vector<float>{0, 0, 0}));
}

TEST(KWinners, KeepsLargestAndBreaksTiesByIndex) {
  const std::vector<float> a{0.1f, 0.9f, 0.5f, 0.9f, 0.2f};
  EXPECT_EQ(k_winners(a, 2), (std::vector<float>{0, 0.9f, 0, 0.9f, 0}));
  EXPECT_EQ(k_winners(a, 1), (std::vector<float>{0, 0.9f, 0, 0, 0}));
  EXPECT_EQ(k_winners(a, 5), a);
  const std::vector<float> flat(4, 1.0f);
  EXPECT_EQ(k_winners(flat, 2), (std::vector<float>{1, 1, 0, 0}));
  EXPECT_EQ(top_k_indices(a, 3), (std::vector<std::size_t>{1, 3, 2}));
}

TEST(KWinners, RejectsBadK) {
  const std::vector<float> a{1, 2, 3};
  EXPECT_THROW(k_winners(a, 0), InvalidArgument);
  EXPECT_THROW(k_winners(a, 4), InvalidArgument);
}

TEST(KWinners, MatchesFullSortOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(40);
    std::vector<float> a(n);
    for (float& v : a) v = static_cast<float>(rng.below(6)) - 2.0f;  // many ties
    const std::size_t k = 1 + rng.below(n);
    EXPECT_EQ(k_winners(a, k), oracle::naive_k_winners(a, k));
  }
}

TEST(Network, EncodeIsTopKOfActivations) {
  Rng rng(2);
  auto net = Network::create(20, 30, 1.0f, 4);
  const auto x = oracle::random_vector(rng, 20);
  const auto y = net.encode(x, 5);
  EXPECT_LE(std::count_if(y.begin(), y.end(), [](float v) { return v != 0.0f; }), 5);
  EXPECT_EQ(y, oracle::naive_k_winners(net.activations(x), 5));
}

TEST(Network, FreezeIsIdempotentAndBounded) {
  auto net = Network::create(3, 2, 0.01f, 1);
  net.freeze(0);
  net.freeze(0);
  EXPECT_EQ(net.frozen_count(), 1u);
  EXPECT_TRUE(net.is_frozen(0));
  EXPECT_THROW(net.freeze(2), InvalidArgument);
  EXPECT_THROW(net.mutable_row(0), InvalidState);
  EXPECT_NO_THROW(net.mutable_row(1));
}

TEST(Network, AddNeuron) {
  auto net = Network::create(3, 2, 0.01f, 1, 4);
  EXPECT_EQ(net.add_neuron(), 2u);
  EXPECT_EQ(net.size(), 3u);
  EXPECT_EQ(net.add_neuron(4), 3u);
  EXPECT_EQ(net.class_group(3), 4);
  EXPECT_FALSE(net.is_frozen(3));
  EXPECT_THROW(net.add_neuron(), CapacityError);
  EXPECT_EQ(net.size(), 4u);
}

TEST(Network, AddNeuronDeterministic) {
  auto a = Network::create(6, 2, 0.01f, 3);
  auto b = Network::create(6, 2, 0.01f, 3);
  a.add_neuron();
  b.add_neuron();
  a.add_neuron(1);
  b.add_neuron(1);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.hash(), b.hash());
}

TEST(Network, HashCoversWeightsFlagsGroups) {
  auto net = Network::create(4, 3, 0.01f, 1);
  const auto h0 = net.hash();
  net.set_class_group(1, 2);
  const auto h1 = net.hash();
  EXPECT_NE(h0, h1);
  net.freeze(2);
  const auto h2 = net.hash();
  EXPECT_NE(h1, h2);
  net.mutable_row(0)[0] += 1.0f;
  EXPECT_NE(h2, net.hash());
  const std::vector<std::size_t> rows{1, 2};
  const auto before = net.rows_hash(rows);
  net.mutable_row(0)[1] += 1.0f;
  EXPECT_EQ(before, net.rows_hash(rows));
}

TEST(Network, FromPartsValidates) {
  EXPECT_THROW(Network::from_parts(RowMatrix<float>(2, 3), std::vector<bool>(1), std::vector<ClassId>(2, -1)),
               InvalidArgument);
  EXPECT_THROW(Network::from_parts(RowMatrix<float>(2, 0), std::vector<bool>(2), std::vector<ClassId>(2, -1)),
               InvalidArgument);
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

Network sample_network() {
  auto net = Network::create(5, 4, 0.5f, 8);
  net.freeze(1);
  net.set_class_group(0, 3);
  net.set_class_group(1, 0);
  net.mutable_row(2)[0] = -0.0f;
  net.mutable_row(2)[1] = std::numeric_limits<float>::denorm_min();
  return net;
}

}  // namespace

TEST(Checkpoint, LayoutIsAsDocumented) {
  const auto net = sample_network();
  const auto bytes = serialize_checkpoint(net);
  ASSERT_EQ(bytes.size(), 16u + 4 * 5 * 4 + 4 + 4 * 4);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "HBCL");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 4);
  EXPECT_EQ(bytes[12], 5);
  const std::size_t flags = 16 + 80;
  EXPECT_EQ(bytes[flags], 0);
  EXPECT_EQ(bytes[flags + 1], 1);
  const std::size_t groups = flags + 4;
  EXPECT_EQ(bytes[groups], 3);
  EXPECT_EQ(bytes[groups + 8], 0xff);  // row 2 untagged: -1
  const float w00 = net.row(0)[0];
  EXPECT_EQ(std::memcmp(&bytes[16], &w00, 4), 0);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto net = sample_network();
  const auto back = deserialize_checkpoint(serialize_checkpoint(net));
  EXPECT_EQ(back, net);
  EXPECT_EQ(back.hash(), net.hash());
  EXPECT_TRUE(std::signbit(back.row(2)[0]));
}

TEST(Checkpoint, LargeRoundTripThroughFile) {
  const auto net = Network::create(784, 500, 1.0f, 77);
  const auto path = (std::filesystem::temp_directory_path() / "hebbcl_ckpt_test.hbcl").string();
  save_checkpoint(net, path);
  const auto back = load_checkpoint(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.hash(), net.hash());
  EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(net));
}

TEST(Checkpoint, CorruptionsReportOffsets) {
  const auto good = serialize_checkpoint(sample_network());
  auto expect_offset = [](std::vector<unsigned char> b, std::uint64_t off) {
    try {
      deserialize_checkpoint(b);
      ADD_FAILURE() << "expected FormatError";
    } catch (const FormatError& e) {
      EXPECT_EQ(e.offset(), off) << e.what();
    }
  };
  auto b = good;
  b[0] = 'X';
  expect_offset(b, 0);
  b = good;
  b[4] = 2;
  expect_offset(b, 4);
  b = good;
  b[8] = b[9] = b[10] = b[11] = 0;
  expect_offset(b, 8);
  b = good;
  b.resize(50);
  expect_offset(b, 50);
  b = good;
  b[16 + 80] = 7;
  expect_offset(b, 16 + 80);
  b = good;
  b[16 + 84] = 0xfe;  // group -2
  b[16 + 85] = b[16 + 86] = b[16 + 87] = 0xff;
  expect_offset(b, 16 + 84);
  b = good;
  b.push_back(0);
  expect_offset(b, good.size());
  expect_offset({}, 0);
}

TEST(Checkpoint, MissingFileThrows) {
  EXPECT_ANY_THROW(load_checkpoint("/nonexistent/dir/net.hbcl"));
}

TEST(Checkpoint, GrowthAfterReloadIsDeterministic) {
  const auto bytes = serialize_checkpoint(sample_network());
  auto a = deserialize_checkpoint(bytes);
  auto b = deserialize_checkpoint(bytes);
  a.add_neuron();
  b.add_neuron();
  EXPECT_EQ(a, b);
}
