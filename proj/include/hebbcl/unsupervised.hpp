#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "hebbcl/config.hpp"
#include "hebbcl/datasets.hpp"
#include "hebbcl/errors.hpp"
#include "hebbcl/network.hpp"

namespace hebbcl {

/// Training telemetry. Counters only grow; `current_R` and `mean_delta_norm`
/// describe the most recent minibatch.
struct TrainStats {
  std::uint64_t samples_seen = 0;
  std::uint64_t minibatches = 0;
  std::uint64_t neurons_frozen_total = 0;
  std::uint64_t neurons_added_total = 0;
  /// Freeze events that wanted to expand but hit max_neurons.
  std::uint64_t expansions_skipped = 0;
  /// Samples that found no eligible winner (every row frozen).
  std::uint64_t samples_without_winner = 0;
  std::size_t current_R = 0;
  /// Mean of ||x - W_m||_2 over the updates of the last minibatch.
  float mean_delta_norm = 0.0f;

  TrainStats& operator+=(const TrainStats& d) {
    samples_seen += d.samples_seen;
    minibatches += d.minibatches;
    neurons_frozen_total += d.neurons_frozen_total;
    neurons_added_total += d.neurons_added_total;
    expansions_skipped += d.expansions_skipped;
    samples_without_winner += d.samples_without_winner;
    current_R = d.current_R;
    mean_delta_norm = d.mean_delta_norm;
    return *this;
  }
};

struct HebbianStep {
  std::size_t winner = 0;
  bool updated = false;
  /// ||x - W_m||_2 before the update (0 when nothing was updated).
  float delta_norm = 0.0f;
};

/// Index of the most active row among the eligible ones; lowest index wins ties.
/// Throws CapacityError if no row is eligible.
inline std::size_t select_winner(const Network& net, Sample x, bool unfrozen_only) {
  net.check_input(x);
  const auto& frozen = net.frozen_flags();
  std::size_t best = net.size();
  float best_value = -std::numeric_limits<float>::infinity();
  for (std::size_t j = 0; j < net.size(); ++j) {
    if (unfrozen_only && frozen[j]) continue;
    const float a = dot(net.weights().row(j), x);
    if (best == net.size() || a > best_value) {
      best = j;
      best_value = a;
    }
  }
  if (best == net.size()) throw CapacityError("no eligible neuron: every row is frozen");
  return best;
}

/// W_m <- W_m + eps (x - W_m) for the most active neuron m.
inline HebbianStep hebbian_step(Network& net, Sample x, float epsilon, FrozenWinnerPolicy policy) {
  HebbianStep step;
  step.winner = select_winner(net, x, policy == FrozenWinnerPolicy::kExcludeFromArgmax);
  if (net.is_frozen(step.winner)) return step;
  auto w = net.mutable_row(step.winner);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const float d = x[i] - w[i];
    norm2 += static_cast<double>(d) * d;
    w[i] += epsilon * d;
  }
  step.updated = true;
  step.delta_norm = static_cast<float>(std::sqrt(norm2));
  return step;
}

/// Divides each touched row by phi = max |W_ij| over the whole matrix
/// (frozen rows included) and returns phi. No-op when phi is 0.
inline float normalize_updated(Network& net, std::span<const std::size_t> touched) {
  float phi = 0.0f;
  for (float v : net.weights().data()) phi = std::max(phi, std::fabs(v));
  if (phi == 0.0f) return phi;
  for (std::size_t j : touched) {
    for (float& v : net.mutable_row(j)) v /= phi;
  }
  return phi;
}

/// ||w - x||_2^2 / ||x||_1. Infinite when ||x||_1 = 0.
inline float normalized_distance(std::span<const float> w, Sample x) {
  const float l1 = l1_norm(x);
  if (l1 == 0.0f) return std::numeric_limits<float>::infinity();
  return squared_distance(w, x) / l1;
}

struct FreezeScanResult {
  std::vector<std::size_t> frozen;
  std::size_t added = 0;
  std::size_t expansions_skipped = 0;
};

/// Freezes every unfrozen row whose normalized distance to some sample of the
/// batch is below `threshold`, adding one fresh row per freeze when `expand`
/// is set and the cap allows. Only rows existing at entry are scanned.
/// Samples with ||x||_1 = 0 are ignored.
inline FreezeScanResult freeze_scan(Network& net, const FeatureBatch& batch, float threshold, bool expand) {
  if (batch.empty()) throw InvalidArgument("freeze_scan: empty batch");
  std::vector<std::pair<Sample, float>> samples;  // (x, t * ||x||_1)
  for (const auto& x : batch) {
    net.check_input(x);
    const float l1 = l1_norm(x);
    if (l1 > 0.0f) samples.emplace_back(x, threshold * l1);
  }
  FreezeScanResult out;
  const std::size_t rows_at_entry = net.size();
  for (std::size_t j = 0; j < rows_at_entry; ++j) {
    if (net.is_frozen(j)) continue;
    const auto w = net.row(j);
    for (const auto& [x, limit] : samples) {
      // d^2 / ||x||_1 < t  <=>  d^2 < t ||x||_1
      if (squared_distance(w, x) < limit) {
        out.frozen.push_back(j);
        break;
      }
    }
  }
  for (std::size_t j : out.frozen) {
    net.freeze(j);
    if (!expand) continue;
    if (net.size() < net.max_neurons()) {
      net.add_neuron();
      ++out.added;
    } else {
      ++out.expansions_skipped;
    }
  }
  return out;
}

namespace detail {

inline bool has_unfrozen(const Network& net) {
  const auto& f = net.frozen_flags();
  return std::find(f.begin(), f.end(), false) != f.end();
}

}  // namespace detail

/// One minibatch: Hebbian update per sample, normalization of the touched rows,
/// then the freeze scan (with one-for-one expansion).
inline TrainStats train_minibatch(Network& net, const FeatureBatch& batch, const TrainConfig& cfg) {
  if (batch.empty()) throw InvalidArgument("train_minibatch: empty batch");
  TrainStats d;
  d.samples_seen = batch.size();
  d.minibatches = 1;
  if (cfg.ablation.hebbian) {
    std::vector<std::size_t> touched;
    double delta_sum = 0.0;
    std::size_t updates = 0;
    for (const auto& x : batch) {
      if (cfg.frozen_winner_policy == FrozenWinnerPolicy::kExcludeFromArgmax && !detail::has_unfrozen(net)) {
        ++d.samples_without_winner;
        continue;
      }
      const auto step = hebbian_step(net, x, cfg.epsilon, cfg.frozen_winner_policy);
      if (!step.updated) continue;
      touched.push_back(step.winner);
      delta_sum += step.delta_norm;
      ++updates;
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    normalize_updated(net, touched);
    d.mean_delta_norm = updates ? static_cast<float>(delta_sum / static_cast<double>(updates)) : 0.0f;
  } else {
    for (const auto& x : batch) net.check_input(x);
  }
  if (cfg.ablation.freezing) {
    const auto scan = freeze_scan(net, batch, cfg.threshold, cfg.ablation.expansion);
    d.neurons_frozen_total = scan.frozen.size();
    d.neurons_added_total = scan.added;
    d.expansions_skipped = scan.expansions_skipped;
  }
  d.current_R = net.size();
  return d;
}

using MinibatchCallback = std::function<void(std::size_t batch_index, const TrainStats& delta,
                                             const TrainStats& cumulative)>;

/// Single pass over a feature-only stream in presentation order.
inline TrainStats train_stream(Network& net, const FeatureStream& stream, const TrainConfig& cfg,
                               const MinibatchCallback& on_batch = {}) {
  cfg.validate();
  if (stream.num_samples() > 0 && stream.input_dim() != net.input_dim()) {
    throw InvalidArgument("train_stream: stream dimension " + std::to_string(stream.input_dim()) +
                          " != network input_dim " + std::to_string(net.input_dim()));
  }
  TrainStats total;
  total.current_R = net.size();
  for (std::size_t b = 0; b < stream.num_batches(); ++b) {
    const auto delta = train_minibatch(net, stream.batch(b), cfg);
    total += delta;
    if (on_batch) on_batch(b, delta, total);
  }
  return total;
}

/// Fresh network sized by the config (initial_neurons rows, cap from max_neurons).
inline Network make_unsupervised_network(std::size_t input_dim, const TrainConfig& cfg) {
  cfg.validate();
  return Network::create(input_dim, cfg.initial_neurons, cfg.init_scale, derive_seed(cfg.seed, 1),
                         cfg.resolved_max_neurons());
}

}  // namespace hebbcl
