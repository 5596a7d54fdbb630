#pragma once

#include <png.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hebbcl/errors.hpp"
#include "hebbcl/matrix.hpp"
#include "hebbcl/util.hpp"

namespace hebbcl {

struct ImageShape {
  std::size_t channels = 1;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const noexcept { return channels * height * width; }
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

using Sample = std::span<const float>;
using FeatureBatch = std::vector<Sample>;

/// Flat f32 images in [0,1] with integer labels. Multi-channel images are
/// stored channel-planar (C, H, W).
struct LabeledDataset {
  RowMatrix<float> features;
  std::vector<int> labels;
  ImageShape shape;
  std::vector<std::string> class_names;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }
  Sample sample(std::size_t i) const { return features.row(i); }

  int n_classes() const {
    return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  }

  /// Throws InvalidArgument if any dataset invariant is broken.
  void validate() const {
    if (features.rows() != labels.size()) throw InvalidArgument("dataset: feature/label count mismatch");
    if (features.cols() != shape.size()) throw InvalidArgument("dataset: D != channels*height*width");
    for (float v : features.data()) {
      if (!(v >= 0.0f && v <= 1.0f)) throw InvalidArgument("dataset: feature outside [0,1]");
    }
    for (int l : labels) {
      if (l < 0) throw InvalidArgument("dataset: negative label");
    }
  }
};

/// Copy of the listed samples, in the given order.
inline LabeledDataset subset(const LabeledDataset& ds, std::span<const std::size_t> indices) {
  LabeledDataset out;
  out.shape = ds.shape;
  out.class_names = ds.class_names;
  out.features = RowMatrix<float>(0, ds.dim());
  out.features.reserve_rows(indices.size());
  for (std::size_t i : indices) {
    if (i >= ds.size()) throw InvalidArgument("subset: index out of range");
    out.features.append_row(ds.sample(i));
    out.labels.push_back(ds.labels[i]);
  }
  return out;
}

/// Samples whose label is in `classes`, preserving dataset order.
inline LabeledDataset filter_classes(const LabeledDataset& ds, std::span<const int> classes) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (std::find(classes.begin(), classes.end(), ds.labels[i]) != classes.end()) keep.push_back(i);
  }
  return subset(ds, keep);
}

/// Splits off the last `holdout` samples of each class (in dataset order) as a
/// validation set. Returns (train, validation).
inline std::pair<LabeledDataset, LabeledDataset> split_holdout(const LabeledDataset& ds,
                                                               double holdout_fraction) {
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw InvalidArgument("split_holdout: fraction must be in (0,1)");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);
  std::vector<std::size_t> train, val;
  for (auto& [c, idx] : by_class) {
    const auto n_val = static_cast<std::size_t>(static_cast<double>(idx.size()) * holdout_fraction);
    const auto cut = idx.size() - n_val;
    train.insert(train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cut));
    val.insert(val.end(), idx.begin() + static_cast<std::ptrdiff_t>(cut), idx.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  return {subset(ds, train), subset(ds, val)};
}

// ---------------------------------------------------------------------------
// Binary readers

namespace detail {

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t read_be32(std::span<const unsigned char> b, std::size_t off) {
  if (b.size() < off + 4) throw FormatError("truncated IDX header", b.size());
  return static_cast<std::uint32_t>(b[off]) << 24 | static_cast<std::uint32_t>(b[off + 1]) << 16 |
         static_cast<std::uint32_t>(b[off + 2]) << 8 | static_cast<std::uint32_t>(b[off + 3]);
}

}  // namespace detail

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Parses an IDX image file and an IDX label file already in memory.
inline LabeledDataset parse_mnist(std::span<const unsigned char> images,
                                  std::span<const unsigned char> labels) {
  if (const auto m = detail::read_be32(images, 0); m != kIdxImagesMagic) {
    throw FormatError("IDX images: bad magic " + std::to_string(m) + " (expected 2051)", 0);
  }
  if (const auto m = detail::read_be32(labels, 0); m != kIdxLabelsMagic) {
    throw FormatError("IDX labels: bad magic " + std::to_string(m) + " (expected 2049)", 0);
  }
  const std::size_t n = detail::read_be32(images, 4);
  const std::size_t rows = detail::read_be32(images, 8);
  const std::size_t cols = detail::read_be32(images, 12);
  const std::size_t n_labels = detail::read_be32(labels, 4);
  if (n != n_labels) {
    throw FormatError("IDX labels: count " + std::to_string(n_labels) +
                          " does not match image count " + std::to_string(n), 4);
  }
  if (rows == 0 || cols == 0) throw FormatError("IDX images: zero image dimension", 8);
  const std::size_t d = rows * cols;
  if (images.size() < 16 + n * d) {
    throw FormatError("IDX images: truncated payload, expected " + std::to_string(16 + n * d) +
                          " bytes", images.size());
  }
  if (labels.size() < 8 + n) {
    throw FormatError("IDX labels: truncated payload, expected " + std::to_string(8 + n) + " bytes",
                      labels.size());
  }
  LabeledDataset ds;
  ds.shape = {1, rows, cols};
  ds.features = RowMatrix<float>(n, d);
  auto f = ds.features.data();
  for (std::size_t i = 0; i < n * d; ++i) f[i] = static_cast<float>(images[16 + i]) / 255.0f;
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.labels[i] = labels[8 + i];
  ds.validate();
  return ds;
}

inline LabeledDataset load_mnist(const std::filesystem::path& images_path,
                                 const std::filesystem::path& labels_path) {
  return parse_mnist(detail::read_file(images_path), detail::read_file(labels_path));
}

inline constexpr std::size_t kCifarRecordBytes = 1 + 3072;

/// One CIFAR-10 binary batch: records of 1 label byte + 3072 pixel bytes
/// (1024 red, 1024 green, 1024 blue, each row-major 32x32).
inline LabeledDataset parse_cifar10_batch(std::span<const unsigned char> bytes) {
  if (bytes.empty() || bytes.size() % kCifarRecordBytes != 0) {
    throw FormatError("CIFAR-10 batch: size " + std::to_string(bytes.size()) +
                          " is not a positive multiple of 3073",
                      bytes.size() - bytes.size() % kCifarRecordBytes);
  }
  const std::size_t n = bytes.size() / kCifarRecordBytes;
  LabeledDataset ds;
  ds.shape = {3, 32, 32};
  ds.features = RowMatrix<float>(n, 3072);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* rec = bytes.data() + i * kCifarRecordBytes;
    if (rec[0] > 9) throw FormatError("CIFAR-10 batch: label > 9", i * kCifarRecordBytes);
    ds.labels[i] = rec[0];
    auto row = ds.features.row(i);
    for (std::size_t p = 0; p < 3072; ++p) row[p] = static_cast<float>(rec[1 + p]) / 255.0f;
  }
  ds.class_names = {"airplane", "automobile", "bird", "cat", "deer",
                    "dog", "frog", "horse", "ship", "truck"};
  return ds;
}

inline LabeledDataset load_cifar10_batch(const std::filesystem::path& path) {
  return parse_cifar10_batch(detail::read_file(path));
}

inline void append_dataset(LabeledDataset& into, const LabeledDataset& from) {
  if (into.features.cols() == 0 && into.size() == 0) {
    into = from;
    return;
  }
  if (!(into.shape == from.shape)) throw InvalidArgument("append_dataset: shape mismatch");
  for (std::size_t i = 0; i < from.size(); ++i) into.features.append_row(from.sample(i));
  into.labels.insert(into.labels.end(), from.labels.begin(), from.labels.end());
}

/// data_batch_1..5.bin and test_batch.bin from `batch_dir`. Returns (train, test).
inline std::pair<LabeledDataset, LabeledDataset> load_cifar10(const std::filesystem::path& batch_dir) {
  LabeledDataset train;
  for (int b = 1; b <= 5; ++b) {
    append_dataset(train, load_cifar10_batch(batch_dir / ("data_batch_" + std::to_string(b) + ".bin")));
  }
  LabeledDataset test = load_cifar10_batch(batch_dir / "test_batch.bin");
  train.validate();
  test.validate();
  return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// Omniglot

/// Decodes a PNG to 8-bit grayscale.
inline std::vector<std::uint8_t> read_png_gray(const std::filesystem::path& path, std::size_t& width,
                                               std::size_t& height) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw FormatError("cannot decode PNG '" + path.string() + "': " + image.message, 0);
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw FormatError("cannot decode PNG '" + path.string() + "': " + msg, 0);
  }
  width = image.width;
  height = image.height;
  return pixels;
}

struct OmniglotOptions {
  std::size_t expected_alphabets = 50;
  std::size_t samples_per_character = 20;
  std::size_t train_per_character = 15;
  std::size_t image_size = 105;
};

/// Omniglot as an alphabet-classification problem.
///
/// `root` holds alphabet directories either directly or under
/// images_background/ and images_evaluation/ (the two standard archives, in
/// that order). Labels are alphabet indices in sorted-name order. Within each
/// character the samples are sorted by filename; the first
/// `train_per_character` go to train, the rest to test. Pixels are inverted so
/// that strokes are 1 and background 0.
inline std::pair<LabeledDataset, LabeledDataset> load_omniglot(const std::filesystem::path& root,
                                                               const OmniglotOptions& opt = {}) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw FormatError("Omniglot root '" + root.string() + "' missing", 0);
  auto sorted_dirs = [](const fs::path& p) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(p)) {
      if (e.is_directory()) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  std::vector<fs::path> alphabets;
  const fs::path parts[] = {root / "images_background", root / "images_evaluation"};
  if (fs::is_directory(parts[0]) || fs::is_directory(parts[1])) {
    for (const auto& p : parts) {
      if (!fs::is_directory(p)) continue;
      for (auto& a : sorted_dirs(p)) alphabets.push_back(a);
    }
  } else {
    alphabets = sorted_dirs(root);
  }
  if (alphabets.size() != opt.expected_alphabets) {
    throw FormatError("Omniglot: found " + std::to_string(alphabets.size()) + " alphabets, expected " +
                          std::to_string(opt.expected_alphabets), 0);
  }
  const std::size_t side = opt.image_size;
  LabeledDataset train, test;
  for (auto* ds : {&train, &test}) {
    ds->shape = {1, side, side};
    ds->features = RowMatrix<float>(0, side * side);
  }
  std::vector<float> row(side * side);
  for (std::size_t label = 0; label < alphabets.size(); ++label) {
    train.class_names.push_back(alphabets[label].filename().string());
    for (const auto& character : sorted_dirs(alphabets[label])) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(character)) {
        if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end(),
                [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
      if (files.size() != opt.samples_per_character) {
        throw FormatError("Omniglot: '" + character.string() + "' has " + std::to_string(files.size()) +
                              " samples, expected " + std::to_string(opt.samples_per_character), 0);
      }
      for (std::size_t s = 0; s < files.size(); ++s) {
        std::size_t w = 0, h = 0;
        const auto px = read_png_gray(files[s], w, h);
        if (w != side || h != side) {
          throw FormatError("Omniglot: '" + files[s].string() + "' is " + std::to_string(w) + "x" +
                                std::to_string(h) + ", expected " + std::to_string(side) + "x" +
                                std::to_string(side), 0);
        }
        for (std::size_t p = 0; p < row.size(); ++p) row[p] = 1.0f - static_cast<float>(px[p]) / 255.0f;
        auto& ds = s < opt.train_per_character ? train : test;
        ds.features.append_row(row);
        ds.labels.push_back(static_cast<int>(label));
      }
    }
  }
  test.class_names = train.class_names;
  train.validate();
  test.validate();
  return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// Class-incremental streams

/// A class-incremental presentation order over a dataset: every sample once,
/// all samples of class_order[i] before any of class_order[i+1], shuffled
/// within each class, cut into minibatches that never straddle two classes
/// (the last batch of each class may be partial).
class StreamSpec {
 public:
  StreamSpec(const LabeledDataset& ds, std::vector<int> class_order, std::size_t batch_size,
             std::uint64_t seed)
      : ds_(&ds), class_order_(std::move(class_order)), batch_size_(batch_size), seed_(seed) {
    if (batch_size_ == 0) throw InvalidArgument("make_stream: batch_size must be positive");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);
    std::set<int> seen;
    for (int c : class_order_) {
      if (!by_class.contains(c)) {
        throw InvalidArgument("make_stream: class " + std::to_string(c) + " not present in dataset");
      }
      if (!seen.insert(c).second) throw InvalidArgument("make_stream: class " + std::to_string(c) + " repeated");
    }
    if (seen.size() != by_class.size()) {
      throw InvalidArgument("make_stream: class order must be a permutation of the dataset's classes");
    }
    Rng rng(seed);
    for (int c : class_order_) {
      auto idx = by_class[c];
      rng.shuffle(idx.begin(), idx.end());
      for (std::size_t s = 0; s < idx.size(); s += batch_size_) {
        batch_begin_.push_back(order_.size() + s);
      }
      order_.insert(order_.end(), idx.begin(), idx.end());
    }
    batch_begin_.push_back(order_.size());
  }

  const LabeledDataset& dataset() const noexcept { return *ds_; }
  const std::vector<int>& class_order() const noexcept { return class_order_; }
  std::size_t batch_size() const noexcept { return batch_size_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::size_t num_batches() const noexcept { return batch_begin_.size() - 1; }
  std::size_t num_samples() const noexcept { return order_.size(); }

  /// Dataset indices of batch b.
  std::span<const std::size_t> batch_indices(std::size_t b) const {
    if (b >= num_batches()) throw InvalidArgument("stream: batch index out of range");
    return std::span<const std::size_t>(order_).subspan(batch_begin_[b], batch_begin_[b + 1] - batch_begin_[b]);
  }

 private:
  const LabeledDataset* ds_;
  std::vector<int> class_order_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> batch_begin_;
};

/// Stream view exposing feature vectors only. This is the only stream type the
/// unsupervised trainer accepts.
class FeatureStream {
 public:
  explicit FeatureStream(StreamSpec spec) : spec_(std::move(spec)) {}

  std::size_t num_batches() const noexcept { return spec_.num_batches(); }
  std::size_t num_samples() const noexcept { return spec_.num_samples(); }
  std::size_t input_dim() const noexcept { return spec_.dataset().dim(); }

  FeatureBatch batch(std::size_t b) const {
    FeatureBatch out;
    for (std::size_t i : spec_.batch_indices(b)) out.push_back(spec_.dataset().sample(i));
    return out;
  }

 private:
  StreamSpec spec_;
};

struct LabeledBatch {
  FeatureBatch features;
  std::vector<int> labels;
};

class LabeledStream {
 public:
  explicit LabeledStream(StreamSpec spec) : spec_(std::move(spec)) {}

  std::size_t num_batches() const noexcept { return spec_.num_batches(); }
  std::size_t num_samples() const noexcept { return spec_.num_samples(); }
  const StreamSpec& spec() const noexcept { return spec_; }

  LabeledBatch batch(std::size_t b) const {
    LabeledBatch out;
    for (std::size_t i : spec_.batch_indices(b)) {
      out.features.push_back(spec_.dataset().sample(i));
      out.labels.push_back(spec_.dataset().labels[i]);
    }
    return out;
  }

  /// Drops the labels.
  FeatureStream features() const { return FeatureStream(spec_); }

 private:
  StreamSpec spec_;
};

inline FeatureStream make_feature_stream(const LabeledDataset& ds, std::vector<int> class_order,
                                         std::size_t batch_size, std::uint64_t seed) {
  return FeatureStream(StreamSpec(ds, std::move(class_order), batch_size, seed));
}

inline LabeledStream make_labeled_stream(const LabeledDataset& ds, std::vector<int> class_order,
                                         std::size_t batch_size, std::uint64_t seed) {
  return LabeledStream(StreamSpec(ds, std::move(class_order), batch_size, seed));
}

/// 0, 1, ..., n_classes-1.
inline std::vector<int> natural_class_order(const LabeledDataset& ds) {
  std::set<int> present(ds.labels.begin(), ds.labels.end());
  return {present.begin(), present.end()};
}

}  // namespace hebbcl
