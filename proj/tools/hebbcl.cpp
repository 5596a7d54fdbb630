// hebbcl command line: training, evaluation, visualization and ablations.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hebbcl/hebbcl.hpp"

namespace fs = std::filesystem;
using namespace hebbcl;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Config-file path plus per-flag overrides. Flags win over file values.
struct ConfigFlags {
  std::string config_file;
  std::optional<float> eps, threshold, init_scale;
  std::optional<std::size_t> k, neurons, batch_size, epochs, neurons_per_class, max_neurons, inference_k;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
  std::string ablate;

  void attach(CLI::App* app, bool supervised) {
    app->add_option("--config", config_file, "key = value config file")->check(CLI::ExistingFile);
    app->add_option("--eps", eps, "learning rate epsilon");
    app->add_option("--init-scale", init_scale, "uniform init upper bound");
    app->add_option("--seed", seed, "root seed");
    app->add_option("--batch-size", batch_size, "minibatch size");
    app->add_option("--max-neurons", max_neurons, "cap on network rows (0 = default)");
    app->add_option("--ablate", ablate,
                    "comma list of no-hebbian, no-freeze, no-expand, no-kwta");
    if (supervised) {
      app->add_option("--epochs", epochs, "epochs per class");
      app->add_option("--neurons-per-class", neurons_per_class, "neurons added per class");
      app->add_option("--inference-k", inference_k, "sum only the k largest activations (0 = all)");
    } else {
      app->add_option("--threshold", threshold, "freeze threshold t");
      app->add_option("--k", k, "k-winners");
      app->add_option("--neurons", neurons, "initial neurons");
      app->add_option("--policy", policy, "frozen winner policy: skip_update | exclude_from_argmax");
    }
  }

  TrainConfig resolve(TrainConfig cfg) const {
    if (!config_file.empty()) load_config_file(cfg, config_file);
    auto num = [](auto v) {
      std::ostringstream os;
      os.precision(9);
      os << v;
      return os.str();
    };
    if (eps) apply_setting(cfg, "epsilon", num(*eps));
    if (threshold) apply_setting(cfg, "threshold", num(*threshold));
    if (init_scale) apply_setting(cfg, "init_scale", num(*init_scale));
    if (k) cfg.k_winners = *k;
    if (neurons) cfg.initial_neurons = *neurons;
    if (batch_size) cfg.batch_size = *batch_size;
    if (epochs) cfg.epochs = *epochs;
    if (neurons_per_class) cfg.neurons_per_class = *neurons_per_class;
    if (max_neurons) cfg.max_neurons = *max_neurons;
    if (inference_k) cfg.inference_k = *inference_k;
    if (seed) cfg.seed = *seed;
    if (policy) apply_setting(cfg, "frozen_winner_policy", *policy);
    apply_ablation(cfg.ablation, ablate);
    cfg.validate();
    return cfg;
  }

  static void apply_ablation(Ablation& a, const std::string& list) {
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      if (item == "no-hebbian") a.hebbian = false;
      else if (item == "no-freeze") a.freezing = false;
      else if (item == "no-expand") a.expansion = false;
      else if (item == "no-kwta") a.kwta = false;
      else throw ConfigError("ablate", "unknown switch '" + item + "'");
    }
  }
};

ImageShape parse_shape(const std::string& s) {
  if (s == "mnist") return {1, 28, 28};
  if (s == "cifar10") return {3, 32, 32};
  if (s == "omniglot") return {1, 105, 105};
  ImageShape shape;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> shape.channels >> c1 >> shape.height >> c2 >> shape.width) || c1 != ',' || c2 != ',') {
    throw UsageError("--shape must be mnist, cifar10, omniglot or C,H,W");
  }
  return shape;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

/// Replaces the test split with a validation split carved from train.
void apply_validation(DatasetPair& data, double fraction) {
  if (fraction <= 0.0) return;
  auto [train, val] = split_holdout(data.train, fraction);
  data.train = std::move(train);
  data.test = std::move(val);
  data.preprocessing.push_back("evaluation on held-out validation split of train (fraction " +
                               std::to_string(fraction) + ")");
}

nlohmann::ordered_json reports_json(const std::vector<EvalReport>& reports) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return arr;
}

struct CommonOptions {
  std::string dataset = "mnist";
  std::string data_root;
  std::string out_dir = "runs";
  double validation = 0.0;
};

int cmd_train_unsupervised(const CommonOptions& common, const ConfigFlags& flags,
                           const UnsupervisedEvalOptions& eval_opt, const std::string& stats_log) {
  const TrainConfig cfg = flags.resolve(default_config(common.dataset, false));
  DatasetPair data = load_named_dataset(common.dataset, resolve_data_root(common.data_root));
  apply_validation(data, common.validation);
  fs::create_directories(common.out_dir);
  write_text(fs::path(common.out_dir) / "config.txt", to_config_text(cfg));

  std::ofstream log;
  if (!stats_log.empty()) {
    log.open(stats_log);
    if (!log) throw std::runtime_error("cannot write '" + stats_log + "'");
  }
  const auto run = run_unsupervised(data, cfg, [&](std::size_t b, const TrainStats&, const TrainStats& total) {
    if (log.is_open()) {
      auto j = to_json(total);
      j["batch"] = b;
      log << j.dump() << '\n';
    }
  });
  const auto ckpt = fs::path(common.out_dir) / "network.hbcl";
  save_checkpoint(run.net, ckpt.string());
  std::cerr << "trained in " << run.train_seconds << " s: R=" << run.net.size()
            << " frozen=" << run.net.frozen_count() << " -> " << ckpt.string() << '\n';

  auto reports = evaluate_unsupervised(run.net, data, cfg, eval_opt);
  auto j = reports_json(reports);
  for (auto& r : j) r["train_stats"] = to_json(run.stats), r["train_seconds"] = run.train_seconds;
  write_text(fs::path(common.out_dir) / "report.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_train_supervised(const CommonOptions& common, const ConfigFlags& flags) {
  const TrainConfig cfg = flags.resolve(default_config(common.dataset, true));
  if (common.dataset == "omniglot") throw UsageError("train-sup supports mnist and cifar10");
  DatasetPair data = load_named_dataset(common.dataset, resolve_data_root(common.data_root));
  apply_validation(data, common.validation);
  fs::create_directories(common.out_dir);
  write_text(fs::path(common.out_dir) / "config.txt", to_config_text(cfg));
  const auto run = run_supervised(data, cfg);
  const auto ckpt = fs::path(common.out_dir) / "network.hbcl";
  save_checkpoint(run.net, ckpt.string());
  std::cerr << "trained in " << run.train_seconds << " s: R=" << run.net.size() << " -> " << ckpt.string() << '\n';
  auto j = to_json(supervised_report(run.net, data, cfg));
  j["train_stats"] = to_json(run.stats);
  j["train_seconds"] = run.train_seconds;
  write_text(fs::path(common.out_dir) / "report.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_eval(const CommonOptions& common, const ConfigFlags& flags, const std::string& checkpoint,
             const UnsupervisedEvalOptions& eval_opt, bool supervised, const std::string& report_path) {
  const TrainConfig cfg = flags.resolve(default_config(common.dataset, supervised));
  const Network net = load_checkpoint(checkpoint);
  DatasetPair data = load_named_dataset(common.dataset, resolve_data_root(common.data_root));
  apply_validation(data, common.validation);
  if (net.input_dim() != data.test.dim()) {
    throw InvalidArgument("checkpoint input_dim " + std::to_string(net.input_dim()) + " does not match dataset '" +
                          common.dataset + "' dimension " + std::to_string(data.test.dim()));
  }
  nlohmann::ordered_json j;
  if (supervised) {
    j = to_json(supervised_report(net, data, cfg));
  } else {
    j = reports_json(evaluate_unsupervised(net, data, cfg, eval_opt));
  }
  if (!report_path.empty()) write_text(report_path, j.dump(2) + "\n");
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_visualize(const std::string& checkpoint, const std::string& out, const std::string& shape_name,
                  std::size_t cols, const std::string& annotate_name, bool png) {
  Annotate annotate = Annotate::kNone;
  if (annotate_name == "frozen") annotate = Annotate::kFrozen;
  else if (annotate_name == "class") annotate = Annotate::kClass;
  else if (annotate_name != "none") throw UsageError("--annotate must be none, frozen or class");
  const Network net = load_checkpoint(checkpoint);
  const Image img = render_grid(net, parse_shape(shape_name), cols, annotate);
  write_ppm(img, out);
  std::cerr << "wrote " << out << " (" << img.width << "x" << img.height << ")\n";
  if (png) {
    const auto png_path = fs::path(out).replace_extension(".png").string();
    write_png(img, png_path);
    std::cerr << "wrote " << png_path << '\n';
  }
  return 0;
}

/// Grid entries look like "HFEK", "HFK", "H" (letters of enabled components);
/// "none" disables everything.
std::vector<Ablation> parse_grid(const std::string& grid) {
  std::vector<Ablation> out;
  std::stringstream ss(grid);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    Ablation a{false, false, false, false};
    if (item == "none") {
      out.push_back(a);
      continue;
    }
    for (char c : item) {
      switch (c) {
        case 'H': a.hebbian = true; break;
        case 'F': a.freezing = true; break;
        case 'E': a.expansion = true; break;
        case 'K': a.kwta = true; break;
        default: throw UsageError("grid entries use letters H, F, E, K; got '" + item + "'");
      }
    }
    out.push_back(a);
  }
  return out;
}

int cmd_ablate(const CommonOptions& common, const ConfigFlags& flags, const std::string& grid,
               UnsupervisedEvalOptions eval_opt, const std::string& csv_path) {
  const TrainConfig base = flags.resolve(default_config(common.dataset, false));
  const auto variants = parse_grid(grid);
  std::ostringstream csv;
  csv << csv_header() << '\n';
  if (!variants.empty()) {
    DatasetPair data = load_named_dataset(common.dataset, resolve_data_root(common.data_root));
    apply_validation(data, common.validation);
    for (const auto& a : variants) {
      TrainConfig cfg = base;
      cfg.ablation = a;
      const auto run = run_unsupervised(data, cfg);
      for (const auto& r : evaluate_unsupervised(run.net, data, cfg, eval_opt)) {
        csv << csv_row(r) << '\n';
        std::cerr << csv_row(r) << '\n';
      }
    }
  }
  if (!csv_path.empty()) write_text(csv_path, csv.str());
  std::cout << csv.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hebbian continual learning: train, evaluate and inspect single-layer networks"};
  app.require_subcommand(1);

  CommonOptions common;
  auto add_common = [&](CLI::App* sub, bool with_dataset = true) {
    if (with_dataset) {
      sub->add_option("--dataset", common.dataset, "mnist | cifar10 | omniglot")
          ->check(CLI::IsMember({"mnist", "cifar10", "omniglot"}));
    }
    sub->add_option("--data-root", common.data_root, "dataset cache (default $HEBBCL_DATA_ROOT or ./data)");
    sub->add_option("--validation", common.validation,
                    "evaluate on this fraction of train held out per class instead of the test split");
  };

  std::vector<std::size_t> clusters;
  bool no_knn = false;
  bool fit_on_train = false;
  std::size_t knn_k = 10;
  auto add_eval = [&](CLI::App* sub) {
    sub->add_option("--clusters", clusters, "k-means cluster counts (repeatable)");
    sub->add_flag("--no-knn", no_knn, "skip the k-NN error");
    sub->add_option("--knn-k", knn_k, "neighbours for the k-NN error");
    sub->add_flag("--fit-on-train", fit_on_train, "fit k-means on train representations, assign test");
  };
  auto eval_options = [&](std::vector<std::size_t> default_clusters) {
    UnsupervisedEvalOptions o;
    o.cluster_counts = clusters.empty() ? std::move(default_clusters) : clusters;
    o.knn = !no_knn;
    o.knn_k = knn_k;
    o.fit_on_train = fit_on_train;
    return o;
  };

  auto* unsup = app.add_subcommand("train-unsup", "unsupervised class-incremental training");
  ConfigFlags unsup_flags;
  std::string stats_log;
  add_common(unsup);
  unsup_flags.attach(unsup, false);
  add_eval(unsup);
  unsup->add_option("--out-dir", common.out_dir, "directory for checkpoint, config echo and report");
  unsup->add_option("--stats-log", stats_log, "JSON lines, one record per minibatch");

  auto* sup = app.add_subcommand("train-sup", "supervised class-incremental training (split protocol)");
  ConfigFlags sup_flags;
  add_common(sup);
  sup_flags.attach(sup, true);
  sup->add_option("--out-dir", common.out_dir, "directory for checkpoint, config echo and report");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  ConfigFlags eval_flags;
  std::string checkpoint, report_path;
  bool eval_supervised = false;
  add_common(eval);
  eval_flags.attach(eval, false);
  add_eval(eval);
  eval->add_option("--checkpoint", checkpoint, "network checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_flag("--supervised", eval_supervised, "report class-incremental accuracy instead");
  eval->add_option("--inference-k", eval_flags.inference_k, "supervised scoring: top-k activations only");
  eval->add_option("--report", report_path, "write the JSON report here");

  auto* vis = app.add_subcommand("visualize", "render weights as an image grid (PPM, optional PNG)");
  std::string vis_out = "weights.ppm", shape_name = "mnist", annotate_name = "none";
  std::size_t cols = 20;
  bool png = false;
  vis->add_option("--checkpoint", checkpoint, "network checkpoint")->required()->check(CLI::ExistingFile);
  vis->add_option("--out", vis_out, "output .ppm path");
  vis->add_option("--shape", shape_name, "mnist | cifar10 | omniglot | C,H,W");
  vis->add_option("--cols", cols, "tiles per grid row")->check(CLI::PositiveNumber);
  vis->add_option("--annotate", annotate_name, "none | frozen | class");
  vis->add_flag("--png", png, "also write a PNG next to the PPM");

  auto* ablate = app.add_subcommand("ablate", "train and evaluate H/F/E/K variants, one CSV row each");
  ConfigFlags ablate_flags;
  std::string grid = "HFEK,HFK,HK,HFE,H", csv_path;
  add_common(ablate);
  ablate_flags.attach(ablate, false);
  add_eval(ablate);
  ablate->add_option("--grid", grid, "comma list of variants by enabled letters (empty for header only)");
  ablate->add_option("--out", csv_path, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*unsup) return cmd_train_unsupervised(common, unsup_flags, eval_options({25, 50}), stats_log);
    if (*sup) return cmd_train_supervised(common, sup_flags);
    if (*eval) return cmd_eval(common, eval_flags, checkpoint, eval_options({25, 50}), eval_supervised, report_path);
    if (*vis) return cmd_visualize(checkpoint, vis_out, shape_name, cols, annotate_name, png);
    if (*ablate) {
      auto opt = eval_options({10});
      return cmd_ablate(common, ablate_flags, grid, opt, csv_path);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const MissingDataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
