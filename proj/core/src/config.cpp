#include "feddaf/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "feddaf/error.hpp"

namespace feddaf {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const KeyValue& kv, std::string_view expected) {
  throw ConfigError("line " + std::to_string(kv.line) + ": key '" + kv.key + "' expects " +
                    std::string(expected) + ", got '" + kv.value + "'");
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double real_from(std::string_view text, const KeyValue& kv) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || p != text.data() + text.size() || !std::isfinite(v)) {
    bad_value(kv, "a finite real number");
  }
  return v;
}

std::uint64_t unsigned_from(std::string_view text, const KeyValue& kv) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || p != text.data() + text.size()) {
    bad_value(kv, "a non-negative integer");
  }
  return v;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

std::string format_real(double v) {
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

double parse_real(const KeyValue& kv) { return real_from(trim(kv.value), kv); }
std::uint64_t parse_unsigned(const KeyValue& kv) { return unsigned_from(trim(kv.value), kv); }

std::vector<double> parse_real_list(const KeyValue& kv) {
  std::vector<double> out;
  for (auto item : split_list(kv.value)) out.push_back(real_from(item, kv));
  return out;
}

std::vector<std::uint64_t> parse_unsigned_list(const KeyValue& kv) {
  std::vector<std::uint64_t> out;
  for (auto item : split_list(kv.value)) out.push_back(unsigned_from(item, kv));
  return out;
}

std::vector<std::string> parse_word_list(const KeyValue& kv) {
  std::vector<std::string> out;
  for (auto item : split_list(kv.value)) {
    if (item.empty()) bad_value(kv, "a comma-separated list of names");
    out.emplace_back(item);
  }
  return out;
}

ModelSpec FederationConfig::model_spec() const {
  return ModelSpec{input_dim, hidden_dims, num_classes, activation};
}

void FederationConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(clients >= 1, "clients must be >= 1");
  require(rounds >= 1, "rounds must be >= 1");
  require(std::isfinite(eta_source) && eta_source >= 0.0, "eta_source must be finite and >= 0");
  require(std::isfinite(target_lr()) && target_lr() >= 0.0, "eta_target must be finite and >= 0");
  require(std::isfinite(mu), "mu must be finite");
  require(source_batch >= 1, "source_batch must be >= 1");
  require(target_batch >= 1, "target_batch must be >= 1");
  require(local_epochs >= 1, "local_epochs must be >= 1");
  require(source_pool >= clients, "source_pool must hold at least one row per client");
  require(target_pool >= 2, "target_pool must be >= 2");
  require(concentration > 0.0 && std::isfinite(concentration), "concentration must be > 0");
  require(sigma >= 0.0 && std::isfinite(sigma), "sigma must be >= 0");
  require(scarcity > 0.0 && scarcity <= 1.0, "scarcity must lie in (0, 1]");
  require(class_separation > 0.0 && std::isfinite(class_separation), "class_separation must be > 0");
  require(within_std >= 0.0 && std::isfinite(within_std), "within_std must be >= 0");
  require(target_train_fraction > 0.0 && target_train_fraction < 1.0,
          "target_train_fraction must lie in (0, 1)");
  require(source_pool + target_pool >= static_cast<std::size_t>(std::max(num_classes, 1)),
          "pools must hold at least one row per class");
  model_spec().validate();
}

std::vector<KeyValue> parse_key_values(std::string_view text, std::string_view origin) {
  std::vector<KeyValue> out;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    KeyValue kv{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), line_no};
    if (kv.key.empty()) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": empty key");
    }
    if (!seen.insert(kv.key).second) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": duplicate key '" +
                        kv.key + "'");
    }
    out.push_back(std::move(kv));
  }
  return out;
}

bool apply_config_key(FederationConfig& c, const KeyValue& kv) {
  const auto& k = kv.key;
  auto size = [&] { return static_cast<std::size_t>(parse_unsigned(kv)); };
  if (k == "clients") c.clients = size();
  else if (k == "rounds") c.rounds = size();
  else if (k == "eta_source") c.eta_source = parse_real(kv);
  else if (k == "eta_target") c.eta_target = parse_real(kv);
  else if (k == "mu") c.mu = parse_real(kv);
  else if (k == "source_batch") c.source_batch = size();
  else if (k == "target_batch") c.target_batch = size();
  else if (k == "local_epochs") c.local_epochs = size();
  else if (k == "seed") c.seed = parse_unsigned(kv);
  else if (k == "source_pool") c.source_pool = size();
  else if (k == "target_pool") c.target_pool = size();
  else if (k == "num_classes") c.num_classes = static_cast<int>(parse_unsigned(kv));
  else if (k == "input_dim") c.input_dim = size();
  else if (k == "hidden_dims") {
    c.hidden_dims.clear();
    for (auto v : parse_unsigned_list(kv)) c.hidden_dims.push_back(static_cast<std::size_t>(v));
  } else if (k == "activation") c.activation = parse_activation(trim(kv.value));
  else if (k == "concentration") c.concentration = parse_real(kv);
  else if (k == "sigma") c.sigma = parse_real(kv);
  else if (k == "scarcity") c.scarcity = parse_real(kv);
  else if (k == "class_separation") c.class_separation = parse_real(kv);
  else if (k == "within_std") c.within_std = parse_real(kv);
  else if (k == "target_train_fraction") c.target_train_fraction = parse_real(kv);
  else return false;
  return true;
}

FederationConfig parse_config(std::string_view text, std::string_view origin) {
  FederationConfig config;
  for (const auto& kv : parse_key_values(text, origin)) {
    if (!apply_config_key(config, kv)) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(kv.line) + ": unknown key '" +
                        kv.key + "'");
    }
  }
  config.validate();
  return config;
}

std::map<std::string, std::string> config_to_map(const FederationConfig& c) {
  std::map<std::string, std::string> m;
  m["clients"] = std::to_string(c.clients);
  m["rounds"] = std::to_string(c.rounds);
  m["eta_source"] = format_real(c.eta_source);
  m["eta_target"] = format_real(c.target_lr());
  m["mu"] = format_real(c.mu);
  m["source_batch"] = std::to_string(c.source_batch);
  m["target_batch"] = std::to_string(c.target_batch);
  m["local_epochs"] = std::to_string(c.local_epochs);
  m["seed"] = std::to_string(c.seed);
  m["source_pool"] = std::to_string(c.source_pool);
  m["target_pool"] = std::to_string(c.target_pool);
  m["num_classes"] = std::to_string(c.num_classes);
  m["input_dim"] = std::to_string(c.input_dim);
  m["hidden_dims"] = join(c.hidden_dims);
  m["activation"] = std::string(to_string(c.activation));
  m["concentration"] = format_real(c.concentration);
  m["sigma"] = format_real(c.sigma);
  m["scarcity"] = format_real(c.scarcity);
  m["class_separation"] = format_real(c.class_separation);
  m["within_std"] = format_real(c.within_std);
  m["target_train_fraction"] = format_real(c.target_train_fraction);
  return m;
}

std::string format_config(const FederationConfig& config) {
  std::ostringstream out;
  for (const auto& [k, v] : config_to_map(config)) out << k << " = " << v << '\n';
  return out.str();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace feddaf
