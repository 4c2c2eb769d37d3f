#include "feddaf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "feddaf/error.hpp"

namespace feddaf {

LabeledDataset::LabeledDataset(std::vector<double> features, std::vector<int> labels,
                               std::size_t cols, int num_classes)
    : features_(std::move(features)), labels_(std::move(labels)), cols_(cols),
      num_classes_(num_classes) {
  if (cols_ == 0) throw DimensionError("dataset must have at least one feature column");
  if (num_classes_ < 1) throw DimensionError("dataset must have at least one class");
  if (features_.size() != labels_.size() * cols_) {
    throw DimensionError("feature matrix has " + std::to_string(features_.size()) +
                         " entries, expected " + std::to_string(labels_.size()) + " x " +
                         std::to_string(cols_));
  }
  for (int y : labels_) {
    if (y < 0 || y >= num_classes_) {
      throw DimensionError("label " + std::to_string(y) + " outside [0, " +
                           std::to_string(num_classes_) + ")");
    }
  }
  if (!std::all_of(features_.begin(), features_.end(), [](double v) { return std::isfinite(v); })) {
    throw DimensionError("dataset features must be finite");
  }
}

LabeledDataset LabeledDataset::select(std::span<const std::size_t> indices) const {
  std::vector<double> f;
  std::vector<int> l;
  f.reserve(indices.size() * cols_);
  l.reserve(indices.size());
  for (auto i : indices) {
    if (i >= rows()) throw DimensionError("row index out of range");
    auto r = row(i);
    f.insert(f.end(), r.begin(), r.end());
    l.push_back(labels_[i]);
  }
  LabeledDataset out;
  out.features_ = std::move(f);
  out.labels_ = std::move(l);
  out.cols_ = cols_;
  out.num_classes_ = num_classes_;
  return out;
}

std::uint64_t fnv1a(std::span<const std::byte> bytes, std::uint64_t h) noexcept {
  for (auto b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t LabeledDataset::fingerprint() const noexcept {
  const std::uint64_t shape[3] = {rows(), cols_, static_cast<std::uint64_t>(num_classes_)};
  std::uint64_t h = fnv1a(std::as_bytes(std::span(shape)));
  h = fnv1a(std::as_bytes(std::span(features_)), h);
  return fnv1a(std::as_bytes(std::span(labels_)), h);
}

void BatchBuffer::gather(const LabeledDataset& data, std::span<const std::size_t> indices) {
  cols_ = data.cols();
  features_.resize(indices.size() * cols_);
  labels_.resize(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    auto r = data.row(indices[k]);
    std::copy(r.begin(), r.end(), features_.begin() + static_cast<std::ptrdiff_t>(k * cols_));
    labels_[k] = data.label(indices[k]);
  }
}

void write_dataset_csv(const LabeledDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t c = 0; c < data.cols(); ++c) out << 'f' << c << ',';
  out << "label\n";
  char buf[32];
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (double v : data.row(i)) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << buf << ',';
    }
    out << data.label(i) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

LabeledDataset read_dataset_csv(const std::filesystem::path& path, int num_classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": missing header");
  const auto cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  if (cols == 0 || line.substr(line.rfind(',') + 1) != "label") {
    throw IoError(path.string() + ": header must be f0,...,fD,label");
  }
  std::vector<double> features;
  std::vector<int> labels;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t field = 0;
    while (std::getline(ss, cell, ',')) {
      if (field < cols) {
        double v = 0.0;
        auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc{} || p != cell.data() + cell.size()) {
          throw IoError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
        }
        features.push_back(v);
      } else {
        int y = 0;
        auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), y);
        if (ec != std::errc{} || p != cell.data() + cell.size()) {
          throw IoError(path.string() + ":" + std::to_string(lineno) + ": bad label '" + cell + "'");
        }
        labels.push_back(y);
      }
      ++field;
    }
    if (field != cols + 1) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(cols + 1) + " fields");
    }
  }
  if (num_classes <= 0) {
    num_classes = labels.empty() ? 1 : *std::max_element(labels.begin(), labels.end()) + 1;
  }
  return LabeledDataset(std::move(features), std::move(labels), cols, num_classes);
}

}  // namespace feddaf
