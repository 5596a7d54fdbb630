#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "hebbcl/config.hpp"
#include "hebbcl/datasets.hpp"
#include "hebbcl/errors.hpp"
#include "hebbcl/network.hpp"
#include "hebbcl/unsupervised.hpp"

namespace hebbcl {

/// Classes in presentation order, each with its training examples.
struct ClassSchedule {
  struct Entry {
    ClassId class_id;
    FeatureBatch examples;
  };
  std::vector<Entry> entries;

  void validate() const {
    std::set<ClassId> seen;
    for (const auto& e : entries) {
      if (e.class_id < 0) throw InvalidArgument("schedule: class ids must be non-negative");
      if (!seen.insert(e.class_id).second) {
        throw InvalidArgument("schedule: class " + std::to_string(e.class_id) + " appears twice");
      }
      if (e.examples.empty()) {
        throw InvalidArgument("schedule: class " + std::to_string(e.class_id) + " has no examples");
      }
    }
  }
};

/// Builds a schedule over `class_order` from a labeled dataset. The dataset
/// must outlive the schedule.
inline ClassSchedule make_class_schedule(const LabeledDataset& ds, std::span<const int> class_order) {
  ClassSchedule s;
  for (int c : class_order) {
    ClassSchedule::Entry e{c, {}};
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.labels[i] == c) e.examples.push_back(ds.sample(i));
    }
    s.entries.push_back(std::move(e));
  }
  s.validate();
  return s;
}

/// Trains one class: the untagged rows become the class's group, EPOCHS passes
/// of winner-take-all Hebbian updates among unfrozen rows (one normalization per
/// minibatch), then every row is frozen and `neurons_per_class` fresh rows are
/// appended for the next class.
///
/// With ablation.freezing off nothing is frozen, so all rows stay eligible and
/// later classes can overwrite earlier groups. With ablation.expansion off no
/// rows are appended.
inline TrainStats train_class(Network& net, const FeatureBatch& examples, ClassId class_id,
                              const TrainConfig& cfg) {
  cfg.validate();
  if (examples.empty()) throw InvalidArgument("train_class: no examples");
  if (class_id < 0) throw InvalidArgument("train_class: class id must be non-negative");
  std::vector<std::size_t> group;
  for (std::size_t j = 0; j < net.size(); ++j) {
    if (!net.is_frozen(j) && !net.class_group(j)) group.push_back(j);
  }
  if (group.empty()) throw InvalidState("train_class: no unfrozen, untagged neurons to assign");
  for (std::size_t j : group) net.set_class_group(j, class_id);

  TrainStats stats;
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(class_id)));
  std::vector<std::size_t> touched;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      touched.clear();
      for (std::size_t i = start; i < end; ++i) {
        if (!cfg.ablation.hebbian) continue;
        const auto step = hebbian_step(net, examples[order[i]], cfg.epsilon,
                                       FrozenWinnerPolicy::kExcludeFromArgmax);
        touched.push_back(step.winner);
      }
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
      normalize_updated(net, touched);
      stats.samples_seen += end - start;
      ++stats.minibatches;
    }
  }
  if (cfg.ablation.freezing) {
    for (std::size_t j = 0; j < net.size(); ++j) {
      if (!net.is_frozen(j)) {
        net.freeze(j);
        ++stats.neurons_frozen_total;
      }
    }
  }
  if (cfg.ablation.expansion) {
    for (std::size_t i = 0; i < cfg.neurons_per_class; ++i) {
      if (net.size() >= net.max_neurons()) {
        ++stats.expansions_skipped;
        continue;
      }
      net.add_neuron();
      ++stats.neurons_added_total;
    }
  }
  stats.current_R = net.size();
  return stats;
}

using ClassCallback = std::function<void(std::size_t entry_index, ClassId class_id, const Network& net)>;

/// Trains the schedule class by class. The rows appended after the final class
/// stay untagged and therefore take no part in prediction.
inline TrainStats train_sequence(Network& net, const ClassSchedule& schedule, const TrainConfig& cfg,
                                 const ClassCallback& after_class = {}) {
  schedule.validate();
  std::size_t untagged_unfrozen = 0;
  for (std::size_t j = 0; j < net.size(); ++j) {
    if (!net.is_frozen(j) && !net.class_group(j)) ++untagged_unfrozen;
  }
  if (!schedule.entries.empty() && untagged_unfrozen != cfg.neurons_per_class) {
    throw InvalidState("train_sequence: network must start with exactly neurons_per_class (" +
                       std::to_string(cfg.neurons_per_class) + ") unassigned neurons, has " +
                       std::to_string(untagged_unfrozen));
  }
  TrainStats total;
  total.current_R = net.size();
  for (std::size_t i = 0; i < schedule.entries.size(); ++i) {
    const auto& e = schedule.entries[i];
    total += train_class(net, e.examples, e.class_id, cfg);
    if (after_class) after_class(i, e.class_id, net);
  }
  return total;
}

/// Fresh network with one class worth of neurons. The cap defaults to room for
/// `n_classes` groups plus the trailing expansion.
inline Network make_supervised_network(std::size_t input_dim, std::size_t n_classes, const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t cap = cfg.max_neurons != 0 ? cfg.max_neurons : (n_classes + 1) * cfg.neurons_per_class;
  return Network::create(input_dim, cfg.neurons_per_class, cfg.init_scale, derive_seed(cfg.seed, 2), cap);
}

/// Row indices grouped by class, classes ascending.
inline std::map<ClassId, std::vector<std::size_t>> class_groups(const Network& net) {
  std::map<ClassId, std::vector<std::size_t>> out;
  for (std::size_t j = 0; j < net.size(); ++j) {
    if (const auto c = net.class_group(j)) out[*c].push_back(j);
  }
  return out;
}

/// Per-class sums of activations. With `inference_k > 0` only the k largest
/// activations among tagged rows are summed.
inline std::map<ClassId, double> class_scores(const Network& net, Sample x, std::size_t inference_k = 0) {
  net.check_input(x);
  std::vector<std::size_t> rows;
  std::vector<float> acts;
  for (std::size_t j = 0; j < net.size(); ++j) {
    if (!net.class_group(j)) continue;
    rows.push_back(j);
    acts.push_back(dot(net.row(j), x));
  }
  if (rows.empty()) throw InvalidState("predict: no neuron carries a class tag");
  std::map<ClassId, double> scores;
  for (std::size_t r : rows) scores[*net.class_group(r)] = 0.0;
  if (inference_k == 0 || inference_k >= rows.size()) {
    for (std::size_t i = 0; i < rows.size(); ++i) scores[*net.class_group(rows[i])] += acts[i];
  } else {
    for (std::size_t i : top_k_indices(acts, inference_k)) scores[*net.class_group(rows[i])] += acts[i];
  }
  return scores;
}

/// Class with the highest group score; lowest class id on ties.
inline ClassId predict(const Network& net, Sample x, std::size_t inference_k = 0) {
  const auto scores = class_scores(net, x, inference_k);
  ClassId best = scores.begin()->first;
  double best_score = scores.begin()->second;
  for (const auto& [c, s] : scores) {
    if (s > best_score) {
      best = c;
      best_score = s;
    }
  }
  return best;
}

struct AccuracyReport {
  std::size_t n = 0;
  double overall_pct = 0.0;
  /// One entry per task of the partition (empty without a partition).
  std::vector<double> per_task_pct;
  /// Unweighted mean of per_task_pct.
  double task_mean_pct = 0.0;
};

/// Class-incremental accuracy: no task id is used for prediction. A task
/// partition (e.g. {{0,1},{2,3},...}) only groups the test samples for reporting.
inline AccuracyReport evaluate_accuracy(const Network& net, const LabeledDataset& test,
                                        const std::vector<std::vector<int>>& task_partition = {},
                                        std::size_t inference_k = 0) {
  AccuracyReport rep;
  rep.n = test.size();
  std::vector<std::size_t> task_total(task_partition.size()), task_correct(task_partition.size());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const bool ok = predict(net, test.sample(i), inference_k) == test.labels[i];
    correct += ok;
    for (std::size_t t = 0; t < task_partition.size(); ++t) {
      const auto& cls = task_partition[t];
      if (std::find(cls.begin(), cls.end(), test.labels[i]) != cls.end()) {
        ++task_total[t];
        task_correct[t] += ok;
      }
    }
  }
  rep.overall_pct = test.size() ? 100.0 * static_cast<double>(correct) / static_cast<double>(test.size()) : 0.0;
  double sum = 0.0;
  for (std::size_t t = 0; t < task_partition.size(); ++t) {
    const double pct = task_total[t] ? 100.0 * static_cast<double>(task_correct[t]) / static_cast<double>(task_total[t]) : 0.0;
    rep.per_task_pct.push_back(pct);
    sum += pct;
  }
  if (!task_partition.empty()) rep.task_mean_pct = sum / static_cast<double>(task_partition.size());
  return rep;
}

/// {{0,1},{2,3},...} for `n_classes` classes in natural order.
inline std::vector<std::vector<int>> split_tasks(int n_classes, int classes_per_task = 2) {
  std::vector<std::vector<int>> tasks;
  for (int c = 0; c < n_classes; c += classes_per_task) {
    std::vector<int> t;
    for (int k = c; k < std::min(n_classes, c + classes_per_task); ++k) t.push_back(k);
    tasks.push_back(std::move(t));
  }
  return tasks;
}

}  // namespace hebbcl
