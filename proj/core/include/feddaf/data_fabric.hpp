#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "feddaf/config.hpp"
#include "feddaf/dataset.hpp"
#include "feddaf/model.hpp"

namespace feddaf {

/// Source client datasets plus the shifted, scarce target client.
struct FdaTask {
  std::vector<LabeledDataset> source_datasets;
  LabeledDataset target_train;
  LabeledDataset target_test;
  ModelSpec spec;

  std::size_t num_sources() const noexcept { return source_datasets.size(); }
  /// Hash over every dataset and the model shape.
  std::uint64_t fingerprint() const noexcept;
};

/// Isotropic Gaussian clusters, one per class. Class means sit at pairwise
/// distance class_separation (exactly when num_classes <= input_dim, in
/// expectation otherwise). Labels cycle 0,1,..., so classes are balanced up to
/// the remainder.
LabeledDataset make_blobs(std::size_t num_samples, int num_classes, std::size_t input_dim,
                          double class_separation, double within_std, std::uint64_t seed);

/// Per-class Dirichlet(concentration) split across K clients with
/// largest-remainder rounding. Rows keep their input order within a client.
/// Redraws up to 100 times if some client would be empty.
std::vector<LabeledDataset> dirichlet_partition(const LabeledDataset& data, std::size_t clients,
                                                double concentration, std::uint64_t seed);

/// Same split as dirichlet_partition, returned as row indices per client.
std::vector<std::vector<std::size_t>> dirichlet_partition_indices(const LabeledDataset& data,
                                                                  std::size_t clients,
                                                                  double concentration,
                                                                  std::uint64_t seed);

/// features + sigma * z with z ~ N(0, 1) per entry. The z draws depend only on
/// the seed, so different sigmas scale the same noise realisation.
LabeledDataset add_gaussian_noise(const LabeledDataset& data, double sigma, std::uint64_t seed);

/// Uniform subset without replacement of size max(1, round(fraction * n)),
/// in shuffled order. Smaller fractions under one seed give prefixes of
/// larger ones.
LabeledDataset scarcity_subsample(const LabeledDataset& data, double fraction, std::uint64_t seed);

/// Random disjoint (train, test) split; train gets round(train_fraction * n) rows.
std::pair<LabeledDataset, LabeledDataset> split_train_test(const LabeledDataset& data,
                                                           double train_fraction,
                                                           std::uint64_t seed);

/// The controlled-shift recipe: blob pool -> source/target pools -> Dirichlet
/// source clients; noisy target pool -> train/test -> scarce train subset.
/// The pool, partition, noise draws and split depend only on config.seed, so
/// tasks that differ in sigma or scarcity share everything else.
FdaTask build_fda_task(const FederationConfig& config);

/// Writes source_<k>.csv, target_train.csv and target_test.csv into dir.
void export_task_csv(const FdaTask& task, const std::filesystem::path& dir);

}  // namespace feddaf
