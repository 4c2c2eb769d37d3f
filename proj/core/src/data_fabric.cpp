#include "feddaf/data_fabric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "feddaf/error.hpp"
#include "feddaf/seeding.hpp"

namespace feddaf {

namespace {

constexpr int kMaxPartitionRetries = 100;

std::size_t rounded_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

// Orthonormal rows via Gram-Schmidt on Gaussian draws; requires count <= dim.
std::vector<double> orthonormal_rows(std::size_t count, std::size_t dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> rows(count * dim);
  for (std::size_t r = 0; r < count; ++r) {
    double* v = rows.data() + r * dim;
    for (;;) {
      for (std::size_t i = 0; i < dim; ++i) v[i] = normal(rng);
      for (std::size_t p = 0; p < r; ++p) {
        const double* u = rows.data() + p * dim;
        const double dot = std::inner_product(v, v + dim, u, 0.0);
        for (std::size_t i = 0; i < dim; ++i) v[i] -= dot * u[i];
      }
      const double norm = std::sqrt(std::inner_product(v, v + dim, v, 0.0));
      if (norm > 1e-6) {
        for (std::size_t i = 0; i < dim; ++i) v[i] /= norm;
        break;
      }
    }
  }
  return rows;
}

}  // namespace

std::uint64_t FdaTask::fingerprint() const noexcept {
  const std::uint64_t shape[4] = {spec.input_dim, static_cast<std::uint64_t>(spec.num_classes),
                                  spec.hidden_dims.size(), source_datasets.size()};
  std::uint64_t h = fnv1a(std::as_bytes(std::span(shape)));
  h = fnv1a(std::as_bytes(std::span(spec.hidden_dims)), h);
  auto fold = [&h](const LabeledDataset& d) {
    const std::uint64_t f = d.fingerprint();
    h = fnv1a(std::as_bytes(std::span(&f, 1)), h);
  };
  for (const auto& d : source_datasets) fold(d);
  fold(target_train);
  fold(target_test);
  return h;
}

LabeledDataset make_blobs(std::size_t num_samples, int num_classes, std::size_t input_dim,
                          double class_separation, double within_std, std::uint64_t seed) {
  if (num_classes < 1) throw ConfigError("make_blobs: num_classes must be >= 1");
  if (input_dim < 1) throw ConfigError("make_blobs: input_dim must be >= 1");
  const auto classes = static_cast<std::size_t>(num_classes);
  if (num_samples < classes) throw ConfigError("make_blobs: need at least one sample per class");
  if (!(class_separation > 0.0)) throw ConfigError("make_blobs: class_separation must be > 0");
  if (!(within_std >= 0.0)) throw ConfigError("make_blobs: within_std must be >= 0");

  Rng mean_rng(derive_seed(seed, {1}));
  std::vector<double> means;
  if (classes <= input_dim) {
    // Scaled orthonormal vectors: |m_a - m_b| = class_separation exactly.
    means = orthonormal_rows(classes, input_dim, mean_rng);
    const double scale = class_separation / std::sqrt(2.0);
    for (auto& v : means) v *= scale;
  } else {
    std::normal_distribution<double> normal(
        0.0, class_separation / std::sqrt(2.0 * static_cast<double>(input_dim)));
    means.resize(classes * input_dim);
    for (auto& v : means) v = normal(mean_rng);
  }

  Rng sample_rng(derive_seed(seed, {2}));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> features(num_samples * input_dim);
  std::vector<int> labels(num_samples);
  for (std::size_t r = 0; r < num_samples; ++r) {
    const auto c = r % classes;
    labels[r] = static_cast<int>(c);
    for (std::size_t i = 0; i < input_dim; ++i) {
      const double z = normal(sample_rng);
      features[r * input_dim + i] = means[c * input_dim + i] + within_std * z;
    }
  }
  return LabeledDataset(std::move(features), std::move(labels), input_dim, num_classes);
}

std::vector<std::vector<std::size_t>> dirichlet_partition_indices(const LabeledDataset& data,
                                                                  std::size_t clients,
                                                                  double concentration,
                                                                  std::uint64_t seed) {
  if (clients < 1) throw ConfigError("dirichlet_partition: K must be >= 1");
  if (data.empty()) throw EmptyDatasetError("dirichlet_partition: dataset is empty");
  if (!(concentration > 0.0) || !std::isfinite(concentration)) {
    throw ConfigError("dirichlet_partition: concentration must be finite and > 0");
  }
  if (data.rows() < clients) {
    throw PartitionInfeasibleError("dirichlet_partition: " + std::to_string(data.rows()) +
                                   " rows cannot fill " + std::to_string(clients) + " clients");
  }

  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(data.num_classes()));
  for (std::size_t r = 0; r < data.rows(); ++r) {
    by_class[static_cast<std::size_t>(data.label(r))].push_back(r);
  }

  Rng rng(seed);
  std::gamma_distribution<double> gamma(concentration, 1.0);
  std::vector<double> share(clients);
  std::vector<std::size_t> counts(clients);
  std::vector<std::size_t> by_remainder(clients);

  for (int attempt = 0; attempt < kMaxPartitionRetries; ++attempt) {
    std::vector<std::vector<std::size_t>> parts(clients);
    for (auto members : by_class) {
      if (members.empty()) continue;
      double total = 0.0;
      for (auto& s : share) total += (s = gamma(rng));
      if (!(total > 0.0)) {
        std::fill(share.begin(), share.end(), 1.0);
        total = static_cast<double>(clients);
      }

      // Largest-remainder rounding; ties go to the lower client index.
      const auto n = members.size();
      std::size_t assigned = 0;
      std::vector<double> remainder(clients);
      for (std::size_t k = 0; k < clients; ++k) {
        const double exact = share[k] / total * static_cast<double>(n);
        counts[k] = static_cast<std::size_t>(std::floor(exact));
        remainder[k] = exact - static_cast<double>(counts[k]);
        assigned += counts[k];
      }
      std::iota(by_remainder.begin(), by_remainder.end(), std::size_t{0});
      std::stable_sort(by_remainder.begin(), by_remainder.end(),
                       [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
      for (std::size_t j = 0; assigned < n; ++j, ++assigned) ++counts[by_remainder[j % clients]];

      std::shuffle(members.begin(), members.end(), rng);
      std::size_t cursor = 0;
      for (std::size_t k = 0; k < clients; ++k) {
        parts[k].insert(parts[k].end(), members.begin() + static_cast<std::ptrdiff_t>(cursor),
                        members.begin() + static_cast<std::ptrdiff_t>(cursor + counts[k]));
        cursor += counts[k];
      }
    }
    const bool all_filled =
        std::none_of(parts.begin(), parts.end(), [](const auto& p) { return p.empty(); });
    if (all_filled) {
      for (auto& p : parts) std::sort(p.begin(), p.end());
      return parts;
    }
  }
  throw PartitionInfeasibleError("dirichlet_partition: some client stayed empty after " +
                                 std::to_string(kMaxPartitionRetries) + " draws");
}

std::vector<LabeledDataset> dirichlet_partition(const LabeledDataset& data, std::size_t clients,
                                                double concentration, std::uint64_t seed) {
  const auto parts = dirichlet_partition_indices(data, clients, concentration, seed);
  std::vector<LabeledDataset> out;
  out.reserve(parts.size());
  for (const auto& p : parts) out.push_back(data.select(p));
  return out;
}

LabeledDataset add_gaussian_noise(const LabeledDataset& data, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("add_gaussian_noise: sigma must be finite and >= 0");
  }
  if (sigma == 0.0) return data;
  std::vector<double> features(data.features().begin(), data.features().end());
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : features) v += sigma * normal(rng);
  return LabeledDataset(std::move(features), std::vector<int>(data.labels().begin(), data.labels().end()),
                        data.cols(), data.num_classes());
}

LabeledDataset scarcity_subsample(const LabeledDataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("scarcity_subsample: fraction must lie in (0, 1]");
  }
  if (data.empty()) throw EmptyDatasetError("scarcity_subsample: dataset is empty");
  const auto keep = std::max<std::size_t>(1, rounded_count(fraction, data.rows()));
  auto order = shuffled_indices(data.rows(), seed);
  order.resize(keep);
  return data.select(order);
}

std::pair<LabeledDataset, LabeledDataset> split_train_test(const LabeledDataset& data,
                                                           double train_fraction,
                                                           std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("split_train_test: train_fraction must lie in (0, 1)");
  }
  const auto n_train = rounded_count(train_fraction, data.rows());
  if (n_train == 0 || n_train >= data.rows()) {
    throw EmptyDatasetError("split_train_test: " + std::to_string(data.rows()) +
                            " rows give an empty side at fraction " + format_real(train_fraction));
  }
  const auto order = shuffled_indices(data.rows(), seed);
  const std::span all(order);
  return {data.select(all.first(n_train)), data.select(all.subspan(n_train))};
}

FdaTask build_fda_task(const FederationConfig& config) {
  config.validate();
  const auto s = config.seed;
  const auto total = config.source_pool + config.target_pool;
  const auto pool = make_blobs(total, config.num_classes, config.input_dim, config.class_separation,
                               config.within_std, derive_seed(s, {tag(Stream::kPool)}));

  const auto order = shuffled_indices(total, derive_seed(s, {tag(Stream::kPoolSplit)}));
  const std::span all(order);
  const auto source_pool = pool.select(all.first(config.source_pool));
  const auto target_pool = pool.select(all.subspan(config.source_pool));

  FdaTask task;
  task.spec = config.model_spec();
  task.source_datasets = dirichlet_partition(source_pool, config.clients, config.concentration,
                                             derive_seed(s, {tag(Stream::kPartition)}));
  const auto shifted =
      add_gaussian_noise(target_pool, config.sigma, derive_seed(s, {tag(Stream::kNoise)}));
  auto [train, test] = split_train_test(shifted, config.target_train_fraction,
                                        derive_seed(s, {tag(Stream::kTargetSplit)}));
  task.target_train =
      scarcity_subsample(train, config.scarcity, derive_seed(s, {tag(Stream::kScarcity)}));
  task.target_test = std::move(test);
  return task;
}

void export_task_csv(const FdaTask& task, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (std::size_t k = 0; k < task.source_datasets.size(); ++k) {
    write_dataset_csv(task.source_datasets[k], dir / ("source_" + std::to_string(k) + ".csv"));
  }
  write_dataset_csv(task.target_train, dir / "target_train.csv");
  write_dataset_csv(task.target_test, dir / "target_test.csv");
}

}  // namespace feddaf
