#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "feddaf/model.hpp"

namespace feddaf {

/// Every knob of one simulated federation: protocol hyperparameters plus the
/// synthetic task that it runs on.
struct FederationConfig {
  // Protocol.
  std::size_t clients = 10;
  std::size_t rounds = 50;
  double eta_source = 0.01;
  /// Defaults to eta_source / 10 when unset.
  std::optional<double> eta_target;
  double mu = 5.0;
  std::size_t source_batch = 64;
  std::size_t target_batch = 16;
  std::size_t local_epochs = 1;
  std::uint64_t seed = 50;

  // Synthetic task.
  std::size_t source_pool = 5000;
  std::size_t target_pool = 1000;
  int num_classes = 10;
  std::size_t input_dim = 16;
  std::vector<std::size_t> hidden_dims{32};
  Activation activation = Activation::kRelu;
  double concentration = 1.0;
  double sigma = 0.3;
  double scarcity = 0.05;
  double class_separation = 6.0;
  double within_std = 1.0;
  double target_train_fraction = 0.2;

  double target_lr() const noexcept { return eta_target.value_or(eta_source / 10.0); }
  ModelSpec model_spec() const;

  /// Throws ConfigError naming the offending key.
  void validate() const;

  friend bool operator==(const FederationConfig&, const FederationConfig&) = default;
};

/// One `key = value` line of a config or plan file.
struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Splits text into key/value pairs. `#` starts a comment; blank lines are
/// skipped; duplicate keys are an error.
std::vector<KeyValue> parse_key_values(std::string_view text, std::string_view origin = "<input>");

/// Sets one FederationConfig field from its textual value. Returns false for
/// keys that are not config keys; throws ConfigError for malformed values.
bool apply_config_key(FederationConfig& config, const KeyValue& kv);

/// Parses a file holding only FederationConfig keys. Unknown keys throw.
FederationConfig parse_config(std::string_view text, std::string_view origin = "<input>");

/// Canonical key/value rendering (round-trips through parse_config).
std::map<std::string, std::string> config_to_map(const FederationConfig& config);
std::string format_config(const FederationConfig& config);

/// Reads a whole file; IoError names the path when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

// Typed value parsers shared with the plan reader.
double parse_real(const KeyValue& kv);
std::uint64_t parse_unsigned(const KeyValue& kv);
std::vector<double> parse_real_list(const KeyValue& kv);
std::vector<std::uint64_t> parse_unsigned_list(const KeyValue& kv);
std::vector<std::string> parse_word_list(const KeyValue& kv);

/// Shortest decimal text that reads back to the same double.
std::string format_real(double v);

}  // namespace feddaf
