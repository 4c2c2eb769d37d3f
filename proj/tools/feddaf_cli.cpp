// feddaf: run federated domain adaptation experiments on synthetic shifted tasks.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "feddaf/data_fabric.hpp"
#include "feddaf/experiment.hpp"
#include "feddaf/federation.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
};

feddaf::ExperimentPlan plan_from(const CommonOptions& o) {
  feddaf::ExperimentPlan plan;
  if (!o.config_path.empty()) {
    plan = feddaf::load_plan(o.config_path);
  } else {
    plan.fill_defaults();
  }
  if (o.seed) {
    plan.base.seed = *o.seed;
    plan.seeds = {*o.seed};
  }
  plan.validate();
  return plan;
}

void report_progress(const feddaf::RunLog& log) {
  std::fprintf(stderr, "%-12s scarcity=%-5g sigma=%-4g mu=%-4g seed=%-6llu best=%s (%.1fs)\n",
               log.row.method.c_str(), log.row.scarcity, log.row.sigma, log.row.mu,
               static_cast<unsigned long long>(log.row.seed),
               log.error ? ("error: " + *log.error).c_str()
                         : std::to_string(log.row.best_accuracy).c_str(),
               log.row.wall_time_seconds);
}

int run_grid(const feddaf::ExperimentPlan& plan, const CommonOptions& o) {
  feddaf::PlanOptions options;
  options.threads = o.threads;
  options.on_run = report_progress;
  const auto outcome = feddaf::run_plan(plan, options);
  feddaf::emit_results(outcome, o.out_dir);
  std::cout << feddaf::format_summary(feddaf::summarize(outcome.rows));
  std::cout << "wrote " << outcome.rows.size() << " rows to " << o.out_dir << "\n";
  for (const auto& r : outcome.runs) {
    if (r.error) return 3;
  }
  return 0;
}

int run_demo(const CommonOptions& o) {
  const auto plan = plan_from(o);
  const auto& config = plan.base;
  const auto task = feddaf::build_fda_task(config);
  std::printf("FedDAF demo: K=%zu N=%zu eta_S=%g eta_T=%g mu=%g sigma=%g scarcity=%g seed=%llu\n",
              config.clients, config.rounds, config.eta_source, config.target_lr(), config.mu,
              config.sigma, config.scarcity, static_cast<unsigned long long>(config.seed));
  std::printf("target train rows=%zu test rows=%zu\n", task.target_train.rows(),
              task.target_test.rows());
  std::printf("%5s %9s %9s %9s %9s\n", "round", "accuracy", "cosine", "theta", "alpha");
  feddaf::RunHooks hooks;
  hooks.source_threads = o.threads;
  hooks.on_round = [](const feddaf::RoundRecord& r) {
    if (r.similarity) {
      std::printf("%5zu %9.4f %9.4f %9.4f %9.6f\n", r.round, r.test_accuracy, r.similarity->cosine,
                  r.similarity->theta, r.similarity->alpha);
    } else {
      std::printf("%5zu %9.4f %9s %9s %9s\n", r.round, r.test_accuracy, "-", "-", "-");
    }
  };
  const auto result =
      feddaf::run_feddaf(config, task, feddaf::initial_model(config, task), hooks);
  std::printf("best accuracy %.4f at round %zu\n", result.best_accuracy, result.rounds_to_best);
  return 0;
}

int run_export(const CommonOptions& o) {
  const auto plan = plan_from(o);
  const auto task = feddaf::build_fda_task(plan.base);
  feddaf::export_task_csv(task, o.out_dir);
  std::printf("wrote %zu source files and target_train/target_test to %s (fingerprint %016llx)\n",
              task.num_sources(), o.out_dir.c_str(),
              static_cast<unsigned long long>(task.fingerprint()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated domain adaptation simulator (FedDAF and baselines)"};
  app.require_subcommand(1);

  CommonOptions opts;
  auto add_common = [&](CLI::App* cmd, bool needs_config, bool needs_out) {
    auto* c = cmd->add_option("--config", opts.config_path, "Plan or config file (key = value)");
    if (needs_config) c->required();
    auto* out = cmd->add_option("--out", opts.out_dir, "Output directory");
    if (needs_out) out->required();
    cmd->add_option("--seed", opts.seed, "Override the seed list with a single seed");
    cmd->add_option("--threads", opts.threads, "Worker threads")
        ->check(CLI::PositiveNumber);
  };

  auto* run = app.add_subcommand("run", "Execute a plan file");
  add_common(run, true, true);
  auto* sweep = app.add_subcommand("sweep-mu", "FedDAF over mu in {-10,-5,-1,0,1,5,10}");
  add_common(sweep, false, true);
  auto* demo = app.add_subcommand("demo", "Single FedDAF run with per-round output");
  add_common(demo, false, false);
  auto* exp = app.add_subcommand("export-task", "Write a generated task to CSV files");
  add_common(exp, false, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_grid(plan_from(opts), opts);
    if (*sweep) {
      std::optional<feddaf::ExperimentPlan> base;
      if (!opts.config_path.empty()) base = plan_from(opts);
      auto plan = feddaf::mu_sweep_plan(base);
      if (opts.seed) {
        plan.base.seed = *opts.seed;
        plan.seeds = {*opts.seed};
      }
      return run_grid(plan, opts);
    }
    if (*demo) return run_demo(opts);
    if (*exp) return run_export(opts);
  } catch (const std::exception& e) {
    std::cerr << "feddaf: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
