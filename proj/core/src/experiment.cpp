#include "feddaf/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "feddaf/data_fabric.hpp"
#include "feddaf/error.hpp"
#include "feddaf/parallel.hpp"

namespace feddaf {

namespace {

std::size_t method_rank(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kAllMethods); ++i) {
    if (to_string(kAllMethods[i]) == name) return i;
  }
  return std::size(kAllMethods);
}

auto row_key(const ResultRow& r) {
  return std::make_tuple(method_rank(r.method), r.method, r.scarcity, r.sigma, r.mu, r.seed);
}

std::string g6(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void ExperimentPlan::fill_defaults() {
  if (scarcity_levels.empty()) scarcity_levels = {base.scarcity};
  if (noise_levels.empty()) noise_levels = {base.sigma};
  if (mu_values.empty()) mu_values = {base.mu};
  if (seeds.empty()) seeds = {base.seed};
}

void ExperimentPlan::validate() const {
  if (methods.empty()) throw ConfigError("plan: methods must not be empty");
  if (scarcity_levels.empty() || noise_levels.empty() || mu_values.empty() || seeds.empty()) {
    throw ConfigError("plan: scarcity_levels, noise_levels, mu_values and seeds must not be empty");
  }
  for (double s : scarcity_levels) {
    if (!(s > 0.0 && s <= 1.0)) throw ConfigError("plan: scarcity level " + format_real(s) + " outside (0, 1]");
  }
  for (double s : noise_levels) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("plan: noise level " + format_real(s) + " must be >= 0");
  }
  for (double m : mu_values) {
    if (!std::isfinite(m)) throw ConfigError("plan: mu values must be finite");
  }
  base.validate();
}

ExperimentPlan parse_plan(std::string_view text, std::string_view origin) {
  ExperimentPlan plan;
  for (const auto& kv : parse_key_values(text, origin)) {
    if (kv.key == "methods") {
      plan.methods.clear();
      for (const auto& name : parse_word_list(kv)) plan.methods.push_back(parse_method(name));
    } else if (kv.key == "scarcity_levels") {
      plan.scarcity_levels = parse_real_list(kv);
    } else if (kv.key == "noise_levels") {
      plan.noise_levels = parse_real_list(kv);
    } else if (kv.key == "mu_values") {
      plan.mu_values = parse_real_list(kv);
    } else if (kv.key == "seeds") {
      plan.seeds = parse_unsigned_list(kv);
    } else if (!apply_config_key(plan.base, kv)) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(kv.line) + ": unknown key '" +
                        kv.key + "'");
    }
  }
  plan.fill_defaults();
  plan.validate();
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  return parse_plan(read_text_file(path), path.string());
}

ExperimentPlan mu_sweep_plan(std::optional<ExperimentPlan> base) {
  ExperimentPlan plan;
  if (base) {
    plan = std::move(*base);
  } else {
    plan.base.scarcity = 0.05;
    plan.scarcity_levels = {0.05};
    plan.noise_levels = {0.3, 0.6, 0.9};
  }
  plan.methods = {Method::kFedDaf};
  plan.mu_values.assign(std::begin(kMuSweepGrid), std::end(kMuSweepGrid));
  plan.fill_defaults();
  plan.validate();
  return plan;
}

PlanOutcome run_plan(const ExperimentPlan& plan, const PlanOptions& options) {
  plan.validate();

  struct Cell {
    FederationConfig config;
  };
  std::vector<Cell> cells;
  for (double scarcity : plan.scarcity_levels) {
    for (double sigma : plan.noise_levels) {
      for (double mu : plan.mu_values) {
        for (auto seed : plan.seeds) {
          FederationConfig c = plan.base;
          c.scarcity = scarcity;
          c.sigma = sigma;
          c.mu = mu;
          c.seed = seed;
          cells.push_back({c});
        }
      }
    }
  }

  std::vector<std::vector<RunLog>> per_cell(cells.size());
  std::mutex report_mutex;
  parallel_for(cells.size(), options.threads, [&](std::size_t i) {
    const auto& config = cells[i].config;
    auto make_log = [&](Method m) {
      RunLog log;
      log.config = config;
      log.row.method = std::string(to_string(m));
      log.row.scarcity = config.scarcity;
      log.row.sigma = config.sigma;
      log.row.mu = config.mu;
      log.row.seed = config.seed;
      return log;
    };

    std::optional<FdaTask> task;
    std::optional<ParamVector> init;
    std::string setup_error;
    try {
      task = build_fda_task(config);
      init = initial_model(config, *task);
    } catch (const std::exception& e) {
      setup_error = e.what();
    }

    for (auto m : plan.methods) {
      RunLog log = make_log(m);
      const auto start = std::chrono::steady_clock::now();
      if (task) {
        log.task_fingerprint = task->fingerprint();
        try {
          auto result = run_method(m, config, *task, *init);
          log.row.best_accuracy = result.best_accuracy;
          log.row.rounds_to_best = result.rounds_to_best;
          log.history = std::move(result.history);
        } catch (const std::exception& e) {
          log.error = e.what();
        }
      } else {
        log.error = setup_error;
      }
      if (log.error) {
        log.row.best_accuracy = std::nan("");
        log.row.rounds_to_best = 0;
      }
      log.row.wall_time_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (options.on_run) {
        std::lock_guard lock(report_mutex);
        options.on_run(log);
      }
      per_cell[i].push_back(std::move(log));
    }
  });

  PlanOutcome outcome;
  for (auto& logs : per_cell) {
    for (auto& log : logs) outcome.runs.push_back(std::move(log));
  }
  std::stable_sort(outcome.runs.begin(), outcome.runs.end(),
                   [](const RunLog& a, const RunLog& b) { return row_key(a.row) < row_key(b.row); });
  outcome.rows.reserve(outcome.runs.size());
  for (const auto& r : outcome.runs) outcome.rows.push_back(r.row);
  return outcome;
}

std::string format_results_csv(const std::vector<ResultRow>& rows) {
  std::string out(kResultsHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += r.method + ',' + g6(r.scarcity) + ',' + g6(r.sigma) + ',' + g6(r.mu) + ',' +
           std::to_string(r.seed) + ',' + g6(r.best_accuracy) + ',' +
           std::to_string(r.rounds_to_best) + ',' + g6(r.wall_time_seconds) + '\n';
  }
  return out;
}

std::vector<ResultRow> parse_results_csv(std::string_view text) {
  std::vector<ResultRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw IoError("results CSV: header must be '" + std::string(kResultsHeader) + "'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) {
      throw IoError("results CSV line " + std::to_string(line_no) + ": expected 8 fields");
    }
    auto real = [&](const std::string& s) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || p != s.data() + s.size()) {
        throw IoError("results CSV line " + std::to_string(line_no) + ": bad number '" + s + "'");
      }
      return v;
    };
    auto integer = [&](const std::string& s) {
      std::uint64_t v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || p != s.data() + s.size()) {
        throw IoError("results CSV line " + std::to_string(line_no) + ": bad integer '" + s + "'");
      }
      return v;
    };
    rows.push_back({f[0], real(f[1]), real(f[2]), real(f[3]), integer(f[4]), real(f[5]),
                    static_cast<std::size_t>(integer(f[6])), real(f[7])});
  }
  return rows;
}

std::string format_history_json(const std::vector<RunLog>& runs, bool include_wall_time) {
  using nlohmann::json;
  json doc = json::array();
  for (const auto& run : runs) {
    json rounds = json::array();
    for (const auto& r : run.history) {
      json rec = {{"round", r.round}, {"accuracy", r.test_accuracy}, {"client_losses", r.client_losses}};
      rec["target_loss"] = r.target_loss ? json(*r.target_loss) : json(nullptr);
      if (r.similarity) {
        rec["similarity"] = {{"round", r.round},
                             {"cosine", r.similarity->cosine},
                             {"theta", r.similarity->theta},
                             {"alpha", r.similarity->alpha},
                             {"mu", r.similarity->mu},
                             {"degenerate", r.similarity->degenerate}};
        rec["alpha"] = r.similarity->alpha;
        rec["theta"] = r.similarity->theta;
      } else {
        rec["similarity"] = nullptr;
        rec["alpha"] = nullptr;
        rec["theta"] = nullptr;
      }
      rounds.push_back(std::move(rec));
    }
    json entry = {{"method", run.row.method},
                  {"scarcity", run.row.scarcity},
                  {"sigma", run.row.sigma},
                  {"mu", run.row.mu},
                  {"seed", run.row.seed},
                  {"config", config_to_map(run.config)},
                  {"task_fingerprint", hex64(run.task_fingerprint)},
                  {"rounds_to_best", run.row.rounds_to_best},
                  {"rounds", std::move(rounds)}};
    entry["best_accuracy"] = run.error ? json(nullptr) : json(run.row.best_accuracy);
    entry["error"] = run.error ? json(*run.error) : json(nullptr);
    if (include_wall_time) entry["wall_time_seconds"] = run.row.wall_time_seconds;
    doc.push_back(std::move(entry));
  }
  return doc.dump(1) + '\n';
}

std::vector<SummaryCell> summarize(const std::vector<ResultRow>& rows) {
  using Key = std::tuple<std::size_t, std::string, double, double, double>;
  std::map<Key, std::vector<double>> groups;
  for (const auto& r : rows) {
    if (std::isnan(r.best_accuracy)) continue;
    groups[{method_rank(r.method), r.method, r.scarcity, r.sigma, r.mu}].push_back(r.best_accuracy);
  }
  std::vector<SummaryCell> out;
  for (const auto& [key, values] : groups) {
    SummaryCell c;
    c.method = std::get<1>(key);
    c.scarcity = std::get<2>(key);
    c.sigma = std::get<3>(key);
    c.mu = std::get<4>(key);
    c.count = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    c.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - c.mean) * (v - c.mean);
      c.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::string format_summary(const std::vector<SummaryCell>& cells) {
  std::set<double> scarcities, sigmas, mus;
  std::vector<std::string> methods;
  for (const auto& c : cells) {
    scarcities.insert(c.scarcity);
    sigmas.insert(c.sigma);
    mus.insert(c.mu);
    if (std::find(methods.begin(), methods.end(), c.method) == methods.end()) methods.push_back(c.method);
  }
  auto find = [&](const std::string& m, double s, double n, double mu) -> const SummaryCell* {
    for (const auto& c : cells) {
      if (c.method == m && c.scarcity == s && c.sigma == n && c.mu == mu) return &c;
    }
    return nullptr;
  };
  auto cell_text = [](const SummaryCell* c) {
    if (!c) return std::string("-");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", 100.0 * c->mean, 100.0 * c->stddev);
    return std::string(buf);
  };

  std::ostringstream out;
  out << "# Best target test accuracy (%), mean ± std over seeds\n";
  for (double mu : mus) {
    out << "\n## mu = " << g6(mu) << "\n\n| Method |";
    for (double s : scarcities) {
      for (double n : sigmas) out << " Scarcity " << g6(s) << " / Noise " << g6(n) << " |";
    }
    out << "\n|---|";
    for (std::size_t i = 0; i < scarcities.size() * sigmas.size(); ++i) out << "---|";
    out << '\n';
    for (const auto& m : methods) {
      out << "| " << m << " |";
      for (double s : scarcities) {
        for (double n : sigmas) out << ' ' << cell_text(find(m, s, n, mu)) << " |";
      }
      out << '\n';
    }
  }

  if (mus.size() > 1) {
    for (const auto& m : methods) {
      for (double s : scarcities) {
        out << "\n## Effect of mu: " << m << ", scarcity " << g6(s) << "\n\n| mu |";
        for (double n : sigmas) out << " Noise " << g6(n) << " |";
        out << "\n|---|";
        for (std::size_t i = 0; i < sigmas.size(); ++i) out << "---|";
        out << '\n';
        for (double mu : mus) {
          out << "| " << g6(mu) << " |";
          for (double n : sigmas) out << ' ' << cell_text(find(m, s, n, mu)) << " |";
          out << '\n';
        }
      }
    }
  }
  return out.str();
}

void emit_results(const PlanOutcome& outcome, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  write_file(dir / "results.csv", format_results_csv(outcome.rows));
  write_file(dir / "history.json", format_history_json(outcome.runs));
  write_file(dir / "summary.md", format_summary(summarize(outcome.rows)));
}

}  // namespace feddaf
