#include "feddaf/federation.hpp"

#include <algorithm>
#include <string>

#include "feddaf/error.hpp"
#include "feddaf/parallel.hpp"
#include "feddaf/seeding.hpp"

namespace feddaf {

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::kFedDaf: return "feddaf";
    case Method::kFedAvg: return "fedavg";
    case Method::kFedAvgFt: return "fedavg_ft";
    case Method::kTargetOnly: return "target_only";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (auto m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) +
                    "' (expected feddaf, fedavg, fedavg_ft or target_only)");
}

ParamVector initial_model(const FederationConfig& config, const FdaTask& task) {
  return init_params(task.spec, derive_seed(config.seed, {tag(Stream::kInit)}));
}

namespace {

// State shared by every runner: validated inputs and the per-party data hooks.
class Session {
 public:
  Session(const FederationConfig& config, const FdaTask& task, const ParamVector& init,
          const RunHooks& hooks)
      : config_(config), task_(task), hooks_(hooks) {
    config.validate();
    if (task.source_datasets.size() != config.clients) {
      throw ConfigError("task has " + std::to_string(task.source_datasets.size()) +
                        " source clients, config expects " + std::to_string(config.clients));
    }
    if (task.target_train.empty() || task.target_test.empty()) {
      throw EmptyDatasetError("task needs nonempty target train and test sets");
    }
    if (init.size() != param_count(task.spec)) {
      throw DimensionError("initial model length does not match the task's model spec");
    }
    guard(init, 0, "initial model");
  }

  const ModelSpec& spec() const { return task_.spec; }
  const FederationConfig& config() const { return config_; }

  const LabeledDataset& target_data(std::string_view purpose, std::size_t round) const {
    const auto& d = purpose == "evaluate" ? task_.target_test : task_.target_train;
    notify({Party::kTarget, 0, &d, purpose, round});
    return d;
  }

  double evaluate_target(const ParamVector& model, std::size_t round) const {
    return evaluate(spec(), model, target_data("evaluate", round));
  }

  LocalTrainResult train_target(const ParamVector& start, std::size_t round) const {
    auto r = train_local_tracked(spec(), start, target_data("train", round), config_.local_epochs,
                                 config_.target_lr(), config_.target_batch,
                                 derive_seed(config_.seed, {tag(Stream::kTargetTrain), round}));
    guard(r.params, round, "target model");
    return r;
  }

  /// Every source client trains from the same broadcast model; the server
  /// returns their unweighted mean. Losses land in record.client_losses.
  ParamVector source_round(const ParamVector& broadcast, std::size_t round,
                           RoundRecord& record) const {
    const auto k_clients = task_.source_datasets.size();
    std::vector<ParamVector> locals(k_clients);
    std::vector<double> losses(k_clients);
    parallel_for(k_clients, hooks_.source_threads, [&](std::size_t k) {
      const auto& data = task_.source_datasets[k];
      notify({Party::kSource, k, &data, "train", round});
      auto r = train_local_tracked(
          spec(), broadcast, data, config_.local_epochs, config_.eta_source, config_.source_batch,
          derive_seed(config_.seed, {tag(Stream::kSourceTrain), round, k}));
      guard(r.params, round, "source client " + std::to_string(k));
      locals[k] = std::move(r.params);
      losses[k] = r.last_epoch_loss;
    });
    record.client_losses = std::move(losses);
    auto global = average_models(locals);
    guard(global, round, "global source model");
    return global;
  }

  void finish_round(RunResult& result, RoundRecord record) const {
    if (hooks_.on_round) hooks_.on_round(record);
    result.history.push_back(std::move(record));
  }

  static void guard(const ParamVector& p, std::size_t round, const std::string& what) {
    if (!p.all_finite()) {
      throw NumericalError("non-finite parameters in " + what + " at round " +
                           std::to_string(round) + "; lower the learning rate");
    }
  }

 private:
  void notify(const DataAccess& access) const {
    if (hooks_.on_data_access) hooks_.on_data_access(access);
  }

  const FederationConfig& config_;
  const FdaTask& task_;
  const RunHooks& hooks_;
};

void summarize(RunResult& result) {
  result.best_accuracy = 0.0;
  result.rounds_to_best = 0;
  for (const auto& r : result.history) {
    if (result.rounds_to_best == 0 || r.test_accuracy > result.best_accuracy) {
      result.best_accuracy = r.test_accuracy;
      result.rounds_to_best = r.round;
    }
  }
}

}  // namespace

RunResult run_feddaf(const FederationConfig& config, const FdaTask& task, const ParamVector& init,
                     const RunHooks& hooks) {
  const Session session(config, task, init, hooks);
  RunResult result;
  ParamVector global = init;  // w_{n-1}^S
  ParamVector target;         // w_{n-1}^T
  for (std::size_t n = 1; n <= config.rounds; ++n) {
    RoundRecord record;
    record.round = n;

    ParamVector adapted;
    if (n == 1) {
      adapted = init;
    } else {
      auto agg = target_aggregate(session.spec(), global, target,
                                  session.target_data("gradient_field", n), config.mu,
                                  config.target_batch,
                                  derive_seed(config.seed, {tag(Stream::kGradientField), n}));
      Session::guard(agg.adapted, n, "adapted target model");
      adapted = std::move(agg.adapted);
      record.similarity = agg.report;
    }
    record.test_accuracy = session.evaluate_target(adapted, n);

    auto trained = session.train_target(adapted, n);
    record.target_loss = trained.last_epoch_loss;
    target = std::move(trained.params);

    global = session.source_round(global, n, record);
    result.final_model = std::move(adapted);
    session.finish_round(result, std::move(record));
  }
  summarize(result);
  return result;
}

RunResult run_fedavg(const FederationConfig& config, const FdaTask& task, const ParamVector& init,
                     const RunHooks& hooks) {
  const Session session(config, task, init, hooks);
  RunResult result;
  ParamVector global = init;
  for (std::size_t n = 1; n <= config.rounds; ++n) {
    RoundRecord record;
    record.round = n;
    // The target holds the broadcast model during round n.
    record.test_accuracy = session.evaluate_target(global, n);
    result.final_model = global;
    global = session.source_round(global, n, record);
    session.finish_round(result, std::move(record));
  }
  summarize(result);
  return result;
}

RunResult run_fedavg_ft(const FederationConfig& config, const FdaTask& task,
                        const ParamVector& init, const RunHooks& hooks) {
  const Session session(config, task, init, hooks);
  RunResult result;
  ParamVector global = init;
  for (std::size_t n = 1; n <= config.rounds; ++n) {
    RoundRecord record;
    record.round = n;
    auto tuned = session.train_target(global, n);
    record.target_loss = tuned.last_epoch_loss;
    record.test_accuracy = session.evaluate_target(tuned.params, n);
    result.final_model = std::move(tuned.params);
    global = session.source_round(global, n, record);
    session.finish_round(result, std::move(record));
  }
  summarize(result);
  return result;
}

RunResult run_target_only(const FederationConfig& config, const FdaTask& task,
                          const ParamVector& init, const RunHooks& hooks) {
  const Session session(config, task, init, hooks);
  RunResult result;
  ParamVector model = init;
  for (std::size_t n = 1; n <= config.rounds; ++n) {
    RoundRecord record;
    record.round = n;
    auto trained = session.train_target(model, n);
    record.target_loss = trained.last_epoch_loss;
    model = std::move(trained.params);
    record.test_accuracy = session.evaluate_target(model, n);
    result.final_model = model;
    session.finish_round(result, std::move(record));
  }
  summarize(result);
  return result;
}

RunResult run_method(Method method, const FederationConfig& config, const FdaTask& task,
                     const ParamVector& init, const RunHooks& hooks) {
  switch (method) {
    case Method::kFedDaf: return run_feddaf(config, task, init, hooks);
    case Method::kFedAvg: return run_fedavg(config, task, init, hooks);
    case Method::kFedAvgFt: return run_fedavg_ft(config, task, init, hooks);
    case Method::kTargetOnly: return run_target_only(config, task, init, hooks);
  }
  throw ConfigError("unknown method");
}

RunResult run_feddaf(const FederationConfig& config, const FdaTask& task) {
  return run_feddaf(config, task, initial_model(config, task));
}
RunResult run_fedavg(const FederationConfig& config, const FdaTask& task) {
  return run_fedavg(config, task, initial_model(config, task));
}
RunResult run_fedavg_ft(const FederationConfig& config, const FdaTask& task) {
  return run_fedavg_ft(config, task, initial_model(config, task));
}
RunResult run_target_only(const FederationConfig& config, const FdaTask& task) {
  return run_target_only(config, task, initial_model(config, task));
}

}  // namespace feddaf
