#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace feddaf {

/// Read-only view of a batch: row-major features plus one label per row.
struct BatchView {
  std::span<const double> features;
  std::span<const int> labels;
  std::size_t cols = 0;

  std::size_t rows() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t i) const { return features.subspan(i * cols, cols); }
};

/// Feature matrix (row-major) with integer class labels in [0, num_classes).
class LabeledDataset {
 public:
  LabeledDataset() = default;
  /// Validates shapes, label range and finiteness; throws on violation.
  LabeledDataset(std::vector<double> features, std::vector<int> labels, std::size_t cols,
                 int num_classes);

  std::size_t rows() const noexcept { return labels_.size(); }
  std::size_t cols() const noexcept { return cols_; }
  int num_classes() const noexcept { return num_classes_; }
  bool empty() const noexcept { return labels_.empty(); }

  std::span<const double> features() const noexcept { return features_; }
  std::span<const int> labels() const noexcept { return labels_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features_).subspan(i * cols_, cols_);
  }
  int label(std::size_t i) const { return labels_[i]; }

  BatchView view() const noexcept { return {features_, labels_, cols_}; }

  /// Rows at the given indices, in the given order.
  LabeledDataset select(std::span<const std::size_t> indices) const;

  /// FNV-1a over shape, feature bytes and labels.
  std::uint64_t fingerprint() const noexcept;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

 private:
  std::vector<double> features_;
  std::vector<int> labels_;
  std::size_t cols_ = 0;
  int num_classes_ = 0;
};

/// Owned batch assembled from dataset rows, reused across mini-batches.
class BatchBuffer {
 public:
  void gather(const LabeledDataset& data, std::span<const std::size_t> indices);
  BatchView view() const noexcept { return {features_, labels_, cols_}; }

 private:
  std::vector<double> features_;
  std::vector<int> labels_;
  std::size_t cols_ = 0;
};

/// CSV with header f0,...,f{D-1},label. Reals are written with 17 significant
/// digits so that a round trip is exact.
void write_dataset_csv(const LabeledDataset& data, const std::filesystem::path& path);
/// num_classes <= 0 infers max(label) + 1.
LabeledDataset read_dataset_csv(const std::filesystem::path& path, int num_classes = 0);

std::uint64_t fnv1a(std::span<const std::byte> bytes,
                    std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

}  // namespace feddaf
