#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hebbcl/config.hpp"
#include "hebbcl/supervised.hpp"
#include "hebbcl/unsupervised.hpp"

namespace hebbcl {

/// Metric bundle written after every evaluation. Unset optionals are omitted
/// from the JSON.
struct EvalReport {
  std::string dataset;
  std::string mode;  // "unsupervised" or "supervised"
  std::optional<double> cluster_accuracy_pct;
  std::optional<double> knn_error_pct;
  std::size_t n_clusters = 0;
  std::size_t knn_k = 10;
  std::string cluster_split = "test";
  std::size_t kmeans_max_iters = 300;
  double kmeans_tol = 1e-4;
  std::size_t kmeans_n_init = 10;
  std::size_t final_R = 0;
  std::size_t frozen_count = 0;
  std::size_t max_neurons = 0;
  std::optional<AccuracyReport> accuracy;
  std::vector<std::string> preprocessing;
  TrainConfig config;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
};

inline nlohmann::ordered_json config_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : to_key_values(cfg)) j[k] = v;
  return j;
}

inline nlohmann::ordered_json to_json(const TrainStats& s) {
  nlohmann::ordered_json j;
  j["samples_seen"] = s.samples_seen;
  j["minibatches"] = s.minibatches;
  j["neurons_frozen_total"] = s.neurons_frozen_total;
  j["neurons_added_total"] = s.neurons_added_total;
  j["expansions_skipped"] = s.expansions_skipped;
  j["samples_without_winner"] = s.samples_without_winner;
  j["current_R"] = s.current_R;
  j["mean_delta_norm"] = s.mean_delta_norm;
  return j;
}

inline nlohmann::ordered_json to_json(const AccuracyReport& a) {
  nlohmann::ordered_json j;
  j["n"] = a.n;
  j["overall_accuracy_pct"] = a.overall_pct;
  j["per_task_accuracy_pct"] = a.per_task_pct;
  j["task_mean_accuracy_pct"] = a.task_mean_pct;
  return j;
}

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["dataset"] = r.dataset;
  j["mode"] = r.mode;
  if (r.cluster_accuracy_pct) {
    j["cluster_accuracy_pct"] = *r.cluster_accuracy_pct;
    j["n_clusters"] = r.n_clusters;
    j["cluster_split"] = r.cluster_split;
    j["kmeans"] = {{"init", "k-means++"}, {"max_iters", r.kmeans_max_iters}, {"tol", r.kmeans_tol}, {"n_init", r.kmeans_n_init}};
  }
  if (r.knn_error_pct) {
    j["knn_error_pct"] = *r.knn_error_pct;
    j["knn_k"] = r.knn_k;
  }
  if (r.accuracy) j["accuracy"] = to_json(*r.accuracy);
  j["final_R"] = r.final_R;
  j["frozen_count"] = r.frozen_count;
  j["max_neurons"] = r.max_neurons;
  j["preprocessing"] = r.preprocessing;
  j["config"] = config_json(r.config);
  j["seed"] = r.seed;
  j["wall_time_s"] = r.wall_time_s;
  return j;
}

inline std::string csv_header() {
  return "variant,hebbian,freezing,expansion,kwta,n_clusters,cluster_accuracy_pct,knn_error_pct,final_R,frozen_count,seed";
}

inline std::string csv_row(const EvalReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? std::to_string(*v) : std::string(); };
  const auto& a = r.config.ablation;
  return a.tag() + "," + (a.hebbian ? "1" : "0") + "," + (a.freezing ? "1" : "0") + "," +
         (a.expansion ? "1" : "0") + "," + (a.kwta ? "1" : "0") + "," + std::to_string(r.n_clusters) + "," +
         opt(r.cluster_accuracy_pct) + "," + opt(r.knn_error_pct) + "," + std::to_string(r.final_R) + "," +
         std::to_string(r.frozen_count) + "," + std::to_string(r.seed);
}

}  // namespace hebbcl
