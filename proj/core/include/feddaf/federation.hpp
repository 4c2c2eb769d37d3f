#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "feddaf/aggregation.hpp"
#include "feddaf/config.hpp"
#include "feddaf/data_fabric.hpp"
#include "feddaf/model.hpp"

namespace feddaf {

enum class Method { kFedDaf, kFedAvg, kFedAvgFt, kTargetOnly };

inline constexpr Method kAllMethods[] = {Method::kFedDaf, Method::kFedAvg, Method::kFedAvgFt,
                                         Method::kTargetOnly};

std::string_view to_string(Method m) noexcept;
/// Accepts feddaf, fedavg, fedavg_ft, target_only.
Method parse_method(std::string_view name);

struct RoundRecord {
  std::size_t round = 0;  ///< 1-based
  double test_accuracy = 0.0;
  /// Present for FedDAF rounds >= 2.
  std::optional<SimilarityReport> similarity;
  /// Final-epoch mean loss of each source client, in client order.
  std::vector<double> client_losses;
  /// Final-epoch mean loss of the target client when it trained this round.
  std::optional<double> target_loss;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct RunResult {
  std::vector<RoundRecord> history;
  double best_accuracy = 0.0;
  /// Round of the first occurrence of best_accuracy.
  std::size_t rounds_to_best = 0;
  /// The model evaluated in the last round.
  ParamVector final_model;
};

enum class Party { kSource, kTarget };

/// One read of a client's private dataset by the simulator.
struct DataAccess {
  Party party;
  std::size_t client;  ///< source index; 0 for the target
  const LabeledDataset* dataset;
  std::string_view purpose;  ///< "train", "gradient_field" or "evaluate"
  std::size_t round;
};

struct RunHooks {
  /// May be called from several threads at once when source_threads > 1.
  std::function<void(const DataAccess&)> on_data_access;
  std::function<void(const RoundRecord&)> on_round;
  std::size_t source_threads = 1;
};

/// FedDAF: each round the target blends the broadcast global source model with
/// its previous model by gradient-field similarity, evaluates the blend, then
/// trains it; sources train from the broadcast model and the server averages them.
RunResult run_feddaf(const FederationConfig& config, const FdaTask& task, const ParamVector& init,
                     const RunHooks& hooks = {});
RunResult run_fedavg(const FederationConfig& config, const FdaTask& task, const ParamVector& init,
                     const RunHooks& hooks = {});
/// FedAvg whose broadcast model is fine-tuned on target_train before evaluation.
/// The fine-tuned copy never reaches the server.
RunResult run_fedavg_ft(const FederationConfig& config, const FdaTask& task,
                        const ParamVector& init, const RunHooks& hooks = {});
RunResult run_target_only(const FederationConfig& config, const FdaTask& task,
                          const ParamVector& init, const RunHooks& hooks = {});

RunResult run_method(Method method, const FederationConfig& config, const FdaTask& task,
                     const ParamVector& init, const RunHooks& hooks = {});

/// init_params(spec, seed) with the stream reserved for starting models.
ParamVector initial_model(const FederationConfig& config, const FdaTask& task);

// Overloads that derive the starting model from config.seed.
RunResult run_feddaf(const FederationConfig& config, const FdaTask& task);
RunResult run_fedavg(const FederationConfig& config, const FdaTask& task);
RunResult run_fedavg_ft(const FederationConfig& config, const FdaTask& task);
RunResult run_target_only(const FederationConfig& config, const FdaTask& task);

}  // namespace feddaf
