#pragma once

// End-to-end pipelines shared by the command line tool and the acceptance
// suite: dataset lookup under a data root, training, and evaluation.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hebbcl/config.hpp"
#include "hebbcl/datasets.hpp"
#include "hebbcl/evaluation.hpp"
#include "hebbcl/network.hpp"
#include "hebbcl/report.hpp"
#include "hebbcl/supervised.hpp"
#include "hebbcl/unsupervised.hpp"

namespace hebbcl {

/// A required dataset is not present under the data root.
class MissingDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kDataRootEnv = "HEBBCL_DATA_ROOT";

/// Explicit path if given, else $HEBBCL_DATA_ROOT, else "./data".
inline std::filesystem::path resolve_data_root(const std::string& explicit_root = {}) {
  if (!explicit_root.empty()) return explicit_root;
  if (const char* env = std::getenv(kDataRootEnv); env && *env) return env;
  return "data";
}

struct DatasetPair {
  std::string name;
  LabeledDataset train;
  LabeledDataset test;
  std::vector<std::string> preprocessing;
};

inline std::string fetch_hint(const std::string& name) {
  if (name == "mnist") {
    return "expected <root>/mnist/{train,t10k}-{images-idx3,labels-idx1}-ubyte (uncompressed); "
           "see tools/fetch_data.sh";
  }
  if (name == "cifar10") {
    return "expected <root>/cifar-10-batches-bin/{data_batch_1..5,test_batch}.bin; see tools/fetch_data.sh";
  }
  return "expected <root>/omniglot/images_background and images_evaluation (unzipped); see tools/fetch_data.sh";
}

inline bool dataset_available(const std::string& name, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (name == "mnist") {
    return fs::exists(root / "mnist" / "train-images-idx3-ubyte") &&
           fs::exists(root / "mnist" / "t10k-images-idx3-ubyte");
  }
  if (name == "cifar10") return fs::exists(root / "cifar-10-batches-bin" / "test_batch.bin");
  if (name == "omniglot") return fs::is_directory(root / "omniglot");
  return false;
}

/// Loads "mnist", "cifar10" or "omniglot". Throws InvalidArgument for other
/// names and MissingDataError when files are absent.
inline DatasetPair load_named_dataset(const std::string& name, const std::filesystem::path& root) {
  if (name != "mnist" && name != "cifar10" && name != "omniglot") {
    throw InvalidArgument("unknown dataset '" + name + "' (expected mnist, cifar10 or omniglot)");
  }
  if (!dataset_available(name, root)) {
    throw MissingDataError("dataset '" + name + "' not found under '" + root.string() + "': " + fetch_hint(name));
  }
  DatasetPair out;
  out.name = name;
  out.preprocessing.push_back("pixels scaled by 1/255, no centering");
  if (name == "mnist") {
    const auto dir = root / "mnist";
    out.train = load_mnist(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
    out.test = load_mnist(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
  } else if (name == "cifar10") {
    std::tie(out.train, out.test) = load_cifar10(root / "cifar-10-batches-bin");
  } else {
    std::tie(out.train, out.test) = load_omniglot(root / "omniglot");
    out.preprocessing.push_back("omniglot: inverted (strokes=1, background=0)");
    out.preprocessing.push_back("omniglot: per character, first 15 samples by filename -> train, last 5 -> test");
  }
  return out;
}

/// Defaults for a dataset and protocol. The unsupervised values were selected
/// on a held-out validation split of the MNIST training set.
inline TrainConfig default_config(const std::string& dataset, bool supervised) {
  TrainConfig cfg;
  if (supervised) {
    cfg.neurons_per_class = dataset == "cifar10" ? 200 : 64;
    cfg.init_scale = 10.0f;
    cfg.epsilon = 0.2f;
    cfg.epochs = 1;
    cfg.inference_k = 1;
  }
  return cfg;
}

struct UnsupervisedEvalOptions {
  std::vector<std::size_t> cluster_counts = {10};
  bool knn = true;
  std::size_t knn_k = 10;
  std::size_t kmeans_max_iters = 300;
  double kmeans_tol = 1e-4;
  std::size_t kmeans_n_init = 10;
  /// Fit k-means on the training representations and assign the test set,
  /// instead of clustering the test representations.
  bool fit_on_train = false;
};

/// Width of the k-winners code used for evaluation (all rows when K is ablated).
inline std::size_t effective_k(const Network& net, const TrainConfig& cfg) {
  return cfg.ablation.kwta ? std::min(cfg.k_winners, net.size()) : net.size();
}

namespace detail {

/// Nearest-centroid assignment of `pts` against fitted centroids.
inline std::vector<std::size_t> assign_to_centroids(const SparseRows& pts, const RowMatrix<double>& centroids) {
  std::vector<double> cnorm(centroids.rows());
  for (std::size_t j = 0; j < centroids.rows(); ++j) {
    for (double v : centroids.row(j)) cnorm[j] += v * v;
  }
  std::vector<std::size_t> out(pts.rows());
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centroids.rows(); ++j) {
      const double d = cnorm[j] - 2.0 * pts.dot_dense(i, centroids.row(j));
      if (d < best) {
        best = d;
        out[i] = j;
      }
    }
  }
  return out;
}

}  // namespace detail

/// One EvalReport per requested cluster count. The k-NN error does not depend
/// on the cluster count and is repeated in each report.
inline std::vector<EvalReport> evaluate_unsupervised(const Network& net, const DatasetPair& data,
                                                     const TrainConfig& cfg, const UnsupervisedEvalOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t k = effective_k(net, cfg);
  const SparseRows test_reps = represent_dataset(net, data.test, k);
  std::optional<SparseRows> train_reps;
  if (opt.knn || opt.fit_on_train) train_reps = represent_dataset(net, data.train, k);
  std::optional<double> knn;
  if (opt.knn) knn = knn_error(*train_reps, data.train.labels, test_reps, data.test.labels, opt.knn_k);

  std::vector<EvalReport> out;
  for (std::size_t nc : opt.cluster_counts) {
    EvalReport r;
    r.dataset = data.name;
    r.mode = "unsupervised";
    r.n_clusters = nc;
    r.knn_k = opt.knn_k;
    r.kmeans_max_iters = opt.kmeans_max_iters;
    r.kmeans_tol = opt.kmeans_tol;
    r.kmeans_n_init = opt.kmeans_n_init;
    r.cluster_split = opt.fit_on_train ? "fit=train,assign=test" : "test";
    KMeansOptions ko{nc, derive_seed(cfg.seed, 3), opt.kmeans_max_iters, opt.kmeans_tol, opt.kmeans_n_init};
    if (opt.fit_on_train) {
      const auto fit = kmeans(*train_reps, ko);
      const auto assign = detail::assign_to_centroids(test_reps, fit.centroids);
      r.cluster_accuracy_pct = cluster_accuracy(assign, data.test.labels);
    } else {
      const auto fit = kmeans(test_reps, ko);
      r.cluster_accuracy_pct = cluster_accuracy(fit.assignments, data.test.labels);
    }
    r.knn_error_pct = knn;
    r.final_R = net.size();
    r.frozen_count = net.frozen_count();
    r.max_neurons = net.max_neurons();
    r.preprocessing = data.preprocessing;
    r.config = cfg;
    r.seed = cfg.seed;
    out.push_back(std::move(r));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (auto& r : out) r.wall_time_s = secs;
  return out;
}

struct UnsupervisedRun {
  Network net;
  TrainStats stats;
  double train_seconds = 0.0;
};

/// Trains on the class-incremental stream of `data.train` (classes in natural
/// order, shuffled within class).
inline UnsupervisedRun run_unsupervised(const DatasetPair& data, const TrainConfig& cfg,
                                        const MinibatchCallback& on_batch = {}) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  UnsupervisedRun run{make_unsupervised_network(data.train.dim(), cfg), {}, 0.0};
  const auto stream = make_feature_stream(data.train, natural_class_order(data.train), cfg.batch_size,
                                          derive_seed(cfg.seed, 4));
  run.stats = train_stream(run.net, stream, cfg, on_batch);
  run.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

struct SupervisedRun {
  Network net;
  TrainStats stats;
  double train_seconds = 0.0;
};

/// Class-incremental supervised training over all classes of `data.train` in
/// natural order.
inline SupervisedRun run_supervised(const DatasetPair& data, const TrainConfig& cfg,
                                    const ClassCallback& after_class = {}) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto order = natural_class_order(data.train);
  SupervisedRun run{make_supervised_network(data.train.dim(), order.size(), cfg), {}, 0.0};
  const auto schedule = make_class_schedule(data.train, order);
  run.stats = train_sequence(run.net, schedule, cfg, after_class);
  run.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

inline EvalReport supervised_report(const Network& net, const DatasetPair& data, const TrainConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  EvalReport r;
  r.dataset = data.name;
  r.mode = "supervised";
  r.accuracy = evaluate_accuracy(net, data.test, split_tasks(data.test.n_classes()), cfg.inference_k);
  r.final_R = net.size();
  r.frozen_count = net.frozen_count();
  r.max_neurons = net.max_neurons();
  r.preprocessing = data.preprocessing;
  r.config = cfg;
  r.seed = cfg.seed;
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace hebbcl
