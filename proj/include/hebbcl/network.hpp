#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hebbcl/errors.hpp"
#include "hebbcl/matrix.hpp"
#include "hebbcl/util.hpp"

namespace hebbcl {

using ClassId = std::int32_t;
inline constexpr ClassId kNoClass = -1;

/// Indices of the k largest entries of `a`, ordered by descending value.
/// Ties are broken in favour of the lower index.
inline std::vector<std::size_t> top_k_indices(std::span<const float> a, std::size_t k) {
  if (k == 0 || k > a.size()) {
    throw InvalidArgument("k_winners: k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(a.size()) + "]");
  }
  std::vector<std::size_t> idx(a.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto before = [&](std::size_t i, std::size_t j) { return a[i] > a[j] || (a[i] == a[j] && i < j); };
  if (k < a.size()) {
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k - 1), idx.end(), before);
    idx.resize(k);
  }
  std::sort(idx.begin(), idx.end(), before);
  return idx;
}

/// Keeps the k largest entries of `a` in place and zeroes the rest.
inline std::vector<float> k_winners(std::span<const float> a, std::size_t k) {
  std::vector<float> out(a.size(), 0.0f);
  for (std::size_t i : top_k_indices(a, k)) out[i] = a[i];
  return out;
}

/// Single fully connected layer whose rows (neurons) can be frozen and appended.
///
/// Rows are never removed and the input dimension never changes. A frozen row
/// cannot be obtained through `mutable_row`, so no training code can modify it.
class Network {
 public:
  static constexpr std::size_t kDefaultCapFactor = 4;

  /// Uniform [0, init_scale) initialization. `max_neurons == 0` selects 4 * n_neurons.
  static Network create(std::size_t input_dim, std::size_t n_neurons, float init_scale,
                        std::uint64_t seed, std::size_t max_neurons = 0) {
    if (input_dim == 0) throw InvalidArgument("create_network: input_dim must be positive");
    if (n_neurons == 0) throw InvalidArgument("create_network: n_neurons must be positive");
    if (!(init_scale > 0.0f)) throw InvalidArgument("create_network: init_scale must be positive");
    Network net;
    net.weights_ = RowMatrix<float>(0, input_dim);
    net.init_scale_ = init_scale;
    net.max_neurons_ = max_neurons != 0 ? max_neurons : kDefaultCapFactor * n_neurons;
    if (net.max_neurons_ < n_neurons) {
      throw InvalidArgument("create_network: max_neurons below n_neurons");
    }
    net.rng_ = Rng(seed);
    net.weights_.reserve_rows(net.max_neurons_);
    for (std::size_t i = 0; i < n_neurons; ++i) net.append_random_row(kNoClass);
    return net;
  }

  /// Builds a network from explicit parts (checkpoint loading, tests).
  static Network from_parts(RowMatrix<float> weights, std::vector<bool> frozen,
                            std::vector<ClassId> class_group, float init_scale = 0.01f,
                            std::size_t max_neurons = 0, std::uint64_t seed = 0) {
    if (weights.cols() == 0) throw InvalidArgument("network: input_dim must be positive");
    if (frozen.size() != weights.rows() || class_group.size() != weights.rows()) {
      throw InvalidArgument("network: frozen/class_group length must equal row count");
    }
    Network net;
    net.weights_ = std::move(weights);
    net.frozen_ = std::move(frozen);
    net.class_group_ = std::move(class_group);
    net.init_scale_ = init_scale;
    net.max_neurons_ = std::max(max_neurons != 0 ? max_neurons : kDefaultCapFactor * net.size(),
                                net.size());
    net.rng_ = Rng(seed);
    return net;
  }

  std::size_t size() const noexcept { return weights_.rows(); }
  std::size_t input_dim() const noexcept { return weights_.cols(); }
  std::size_t max_neurons() const noexcept { return max_neurons_; }
  float init_scale() const noexcept { return init_scale_; }

  void set_max_neurons(std::size_t cap) { max_neurons_ = std::max(cap, size()); }
  void set_init_scale(float s) {
    if (!(s > 0.0f)) throw InvalidArgument("init_scale must be positive");
    init_scale_ = s;
  }
  void reseed(std::uint64_t seed) { rng_ = Rng(seed); }

  const RowMatrix<float>& weights() const noexcept { return weights_; }
  std::span<const float> row(std::size_t j) const { return weights_.row(checked(j)); }

  /// Writable view of an unfrozen row. Throws InvalidState for frozen rows.
  std::span<float> mutable_row(std::size_t j) {
    if (frozen_[checked(j)]) {
      throw InvalidState("row " + std::to_string(j) + " is frozen");
    }
    return weights_.row(j);
  }

  bool is_frozen(std::size_t j) const { return frozen_[checked(j)]; }
  const std::vector<bool>& frozen_flags() const noexcept { return frozen_; }

  std::size_t frozen_count() const noexcept {
    return static_cast<std::size_t>(std::count(frozen_.begin(), frozen_.end(), true));
  }

  /// Idempotent.
  void freeze(std::size_t j) { frozen_[checked(j)] = true; }

  std::optional<ClassId> class_group(std::size_t j) const {
    const ClassId c = class_group_[checked(j)];
    return c == kNoClass ? std::nullopt : std::optional<ClassId>(c);
  }
  const std::vector<ClassId>& class_groups() const noexcept { return class_group_; }
  void set_class_group(std::size_t j, std::optional<ClassId> c) {
    if (c && *c < 0) throw InvalidArgument("class ids must be non-negative");
    class_group_[checked(j)] = c.value_or(kNoClass);
  }

  /// Appends a randomly initialized, unfrozen row and returns its index.
  /// Throws CapacityError once max_neurons rows exist.
  std::size_t add_neuron(std::optional<ClassId> class_id = std::nullopt) {
    if (size() >= max_neurons_) {
      throw CapacityError("add_neuron: cap of " + std::to_string(max_neurons_) + " neurons reached");
    }
    if (class_id && *class_id < 0) throw InvalidArgument("class ids must be non-negative");
    return append_random_row(class_id.value_or(kNoClass));
  }

  /// a = W x
  std::vector<float> activations(std::span<const float> x) const {
    std::vector<float> a(size());
    activations_into(x, a);
    return a;
  }

  void activations_into(std::span<const float> x, std::span<float> out) const {
    check_input(x);
    if (out.size() != size()) throw InvalidArgument("activations: output length must equal R");
    for (std::size_t j = 0; j < size(); ++j) out[j] = dot(weights_.row(j), x);
  }

  /// y = f(W x), f keeping the k largest activations.
  std::vector<float> encode(std::span<const float> x, std::size_t k) const {
    return k_winners(activations(x), k);
  }

  void check_input(std::span<const float> x) const {
    if (x.size() != input_dim()) {
      throw InvalidArgument("input has length " + std::to_string(x.size()) +
                            ", network expects " + std::to_string(input_dim()));
    }
  }

  std::uint64_t row_hash(std::size_t j) const {
    Fnv1a h;
    h.update(row(j));
    return h.digest();
  }

  /// Hash over the listed rows, in the given order.
  std::uint64_t rows_hash(std::span<const std::size_t> rows) const {
    Fnv1a h;
    for (std::size_t j : rows) h.update(row(j));
    return h.digest();
  }

  /// Hash of the full persistent state (weights, flags, groups, dims).
  std::uint64_t hash() const {
    Fnv1a h;
    const std::uint64_t dims[2] = {size(), input_dim()};
    h.update(dims, sizeof dims);
    h.update(weights_.data());
    for (bool f : frozen_) {
      const unsigned char b = f ? 1 : 0;
      h.update(&b, 1);
    }
    h.update(std::span<const ClassId>(class_group_));
    return h.digest();
  }

  /// Equality of persistent state (ignores cap, init scale and generator).
  friend bool operator==(const Network& a, const Network& b) {
    return a.weights_ == b.weights_ && a.frozen_ == b.frozen_ && a.class_group_ == b.class_group_;
  }

 private:
  Network() = default;

  std::size_t checked(std::size_t j) const {
    if (j >= size()) {
      throw InvalidArgument("row index " + std::to_string(j) + " out of range (R=" +
                            std::to_string(size()) + ")");
    }
    return j;
  }

  std::size_t append_random_row(ClassId c) {
    std::vector<float> values(input_dim());
    for (float& v : values) v = rng_.uniform_float() * init_scale_;
    frozen_.push_back(false);
    class_group_.push_back(c);
    return weights_.append_row(values);
  }

  RowMatrix<float> weights_;
  std::vector<bool> frozen_;
  std::vector<ClassId> class_group_;
  float init_scale_ = 0.01f;
  std::size_t max_neurons_ = 0;
  Rng rng_;
};

}  // namespace hebbcl
