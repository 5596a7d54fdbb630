#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hebbcl/errors.hpp"

namespace hebbcl {

/// What happens when a frozen neuron has the highest activation.
enum class FrozenWinnerPolicy {
  kSkipUpdate,         ///< frozen rows may win; the sample then updates nothing
  kExcludeFromArgmax,  ///< only unfrozen rows compete
};

inline std::string_view to_string(FrozenWinnerPolicy p) {
  return p == FrozenWinnerPolicy::kSkipUpdate ? "skip_update" : "exclude_from_argmax";
}

/// The four algorithm components that can be switched off for ablations.
struct Ablation {
  bool hebbian = true;
  bool freezing = true;
  bool expansion = true;
  bool kwta = true;

  /// Short tag such as "H+F+E+K" or "H+K".
  std::string tag() const {
    std::string out;
    auto add = [&](bool on, const char* s) {
      if (!on) return;
      if (!out.empty()) out += '+';
      out += s;
    };
    add(hebbian, "H");
    add(freezing, "F");
    add(expansion, "E");
    add(kwta, "K");
    return out.empty() ? "none" : out;
  }

  friend bool operator==(const Ablation&, const Ablation&) = default;
};

struct TrainConfig {
  float epsilon = 0.1f;
  float threshold = 0.35f;
  std::size_t k_winners = 80;
  std::size_t batch_size = 64;
  std::size_t epochs = 3;
  std::size_t neurons_per_class = 64;
  std::size_t initial_neurons = 500;
  std::size_t max_neurons = 0;  // 0 means 4 * initial_neurons
  float init_scale = 0.01f;
  std::uint64_t seed = 0;
  Ablation ablation;
  FrozenWinnerPolicy frozen_winner_policy = FrozenWinnerPolicy::kExcludeFromArgmax;
  /// Supervised scoring: 0 sums raw activations per class group; k > 0 sums only
  /// the k largest activations.
  std::size_t inference_k = 0;

  std::size_t resolved_max_neurons() const {
    return max_neurons != 0 ? max_neurons : 4 * initial_neurons;
  }

  void validate() const {
    if (!(epsilon > 0.0f)) throw ConfigError("epsilon", "must be > 0");
    if (!(threshold >= 0.0f)) throw ConfigError("threshold", "must be >= 0");
    if (!(init_scale > 0.0f)) throw ConfigError("init_scale", "must be > 0");
    if (k_winners == 0) throw ConfigError("k_winners", "must be >= 1");
    if (batch_size == 0) throw ConfigError("batch_size", "must be >= 1");
    if (epochs == 0) throw ConfigError("epochs", "must be >= 1");
    if (neurons_per_class == 0) throw ConfigError("neurons_per_class", "must be >= 1");
    if (initial_neurons == 0) throw ConfigError("initial_neurons", "must be >= 1");
    if (resolved_max_neurons() < initial_neurons) {
      throw ConfigError("max_neurons", "must be >= initial_neurons");
    }
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
  return out;
}

inline float parse_float(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const float out = std::stof(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError(key, "expected a boolean, got '" + v + "'");
}

}  // namespace detail

/// Sets one field by its key-file name. Unknown keys are errors.
inline void apply_setting(TrainConfig& cfg, const std::string& key, const std::string& value) {
  using namespace detail;
  if (key == "epsilon") cfg.epsilon = parse_float(key, value);
  else if (key == "threshold") cfg.threshold = parse_float(key, value);
  else if (key == "k_winners") cfg.k_winners = parse_int<std::size_t>(key, value);
  else if (key == "batch_size") cfg.batch_size = parse_int<std::size_t>(key, value);
  else if (key == "epochs") cfg.epochs = parse_int<std::size_t>(key, value);
  else if (key == "neurons_per_class") cfg.neurons_per_class = parse_int<std::size_t>(key, value);
  else if (key == "initial_neurons") cfg.initial_neurons = parse_int<std::size_t>(key, value);
  else if (key == "max_neurons") cfg.max_neurons = parse_int<std::size_t>(key, value);
  else if (key == "init_scale") cfg.init_scale = parse_float(key, value);
  else if (key == "seed") cfg.seed = parse_int<std::uint64_t>(key, value);
  else if (key == "inference_k") cfg.inference_k = parse_int<std::size_t>(key, value);
  else if (key == "ablation.hebbian") cfg.ablation.hebbian = parse_bool(key, value);
  else if (key == "ablation.freezing") cfg.ablation.freezing = parse_bool(key, value);
  else if (key == "ablation.expansion") cfg.ablation.expansion = parse_bool(key, value);
  else if (key == "ablation.kwta") cfg.ablation.kwta = parse_bool(key, value);
  else if (key == "frozen_winner_policy") {
    if (value == "skip_update") cfg.frozen_winner_policy = FrozenWinnerPolicy::kSkipUpdate;
    else if (value == "exclude_from_argmax") cfg.frozen_winner_policy = FrozenWinnerPolicy::kExcludeFromArgmax;
    else throw ConfigError(key, "expected skip_update or exclude_from_argmax, got '" + value + "'");
  } else {
    throw ConfigError(key, "unknown configuration key");
  }
}

/// Parses `key = value` lines. `#` starts a comment. Returns the pairs in file order.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    }
    out.emplace_back(detail::trim(std::string_view(t).substr(0, eq)),
                     detail::trim(std::string_view(t).substr(eq + 1)));
  }
  return out;
}

inline void apply_key_values(TrainConfig& cfg, std::string_view text) {
  for (const auto& [k, v] : parse_key_values(text)) apply_setting(cfg, k, v);
}

inline void load_config_file(TrainConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  apply_key_values(cfg, ss.str());
}

/// Every resolved field, in the key-file syntax. Feeding this back through
/// apply_key_values reproduces the config exactly.
inline std::vector<std::pair<std::string, std::string>> to_key_values(const TrainConfig& cfg) {
  auto f = [](float v) {
    std::ostringstream os;
    os.precision(9);
    os << v;
    return os.str();
  };
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {
      {"epsilon", f(cfg.epsilon)},
      {"threshold", f(cfg.threshold)},
      {"k_winners", std::to_string(cfg.k_winners)},
      {"batch_size", std::to_string(cfg.batch_size)},
      {"epochs", std::to_string(cfg.epochs)},
      {"neurons_per_class", std::to_string(cfg.neurons_per_class)},
      {"initial_neurons", std::to_string(cfg.initial_neurons)},
      {"max_neurons", std::to_string(cfg.resolved_max_neurons())},
      {"init_scale", f(cfg.init_scale)},
      {"seed", std::to_string(cfg.seed)},
      {"inference_k", std::to_string(cfg.inference_k)},
      {"ablation.hebbian", b(cfg.ablation.hebbian)},
      {"ablation.freezing", b(cfg.ablation.freezing)},
      {"ablation.expansion", b(cfg.ablation.expansion)},
      {"ablation.kwta", b(cfg.ablation.kwta)},
      {"frozen_winner_policy", std::string(to_string(cfg.frozen_winner_policy))},
  };
}

inline std::string to_config_text(const TrainConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : to_key_values(cfg)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace hebbcl
