#pragma once

// Experiment configuration: a flat `section.key = value` text format.
// Lines starting with '#' are comments. Unknown keys are rejected.

#include "morl/agent.hpp"
#include "morl/core.hpp"
#include "morl/momdp.hpp"
#include "morl/reduction.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace morl {

enum class EnvKind { Traffic, Tabular };

/// Reducer ablation switches, parsed from a comma list such as "+bias,-dropout".
struct AblationFlags {
  bool bias = false;
  bool no_row_stochastic = false;
  bool no_positivity = false;
  bool no_dropout = false;

  static AblationFlags parse(const std::string& text) {
    AblationFlags f;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      item = item.substr(b, item.find_last_not_of(" \t") - b + 1);
      if (item == "+bias") f.bias = true;
      else if (item == "-rowst") f.no_row_stochastic = true;
      else if (item == "-positivity") f.no_positivity = true;
      else if (item == "-dropout") f.no_dropout = true;
      else throw UsageError("unknown ablation flag '" + item + "' (expected +bias, -rowst, -positivity, -dropout)");
    }
    return f;
  }

  std::string str() const {
    std::string out;
    auto add = [&](bool on, const char* name) {
      if (!on) return;
      if (!out.empty()) out += ',';
      out += name;
    };
    add(bias, "+bias");
    add(no_row_stochastic, "-rowst");
    add(no_positivity, "-positivity");
    add(no_dropout, "-dropout");
    return out;
  }

  bool any() const { return bias || no_row_stochastic || no_positivity || no_dropout; }
};

struct ExperimentConfig {
  // env
  EnvKind env_kind = EnvKind::Traffic;
  TrafficConfig traffic;
  std::string tabular_layout = "three_point";  // or "random"
  int tabular_states = 3;
  int tabular_actions = 2;
  Index tabular_objectives = 3;
  std::uint64_t tabular_seed = 1;
  double tabular_gamma = 0.9;
  int tabular_horizon = 0;  // 0: truncation horizon of tabular_gamma

  // reducer
  std::string reducer = "ours";
  AblationFlags ablation;
  Index m = 4;
  std::optional<double> reducer_lr;
  std::optional<int> reducer_interval;
  double reducer_dropout = 0.75;
  std::vector<Index> reducer_hidden{32, 32};
  double npca_beta = 5e4;
  int reducer_batch = 32;

  // agent
  AgentConfig agent;
  int agent_update_interval = 1;

  // training / evaluation
  long total_steps = 50000;
  int eval_divisions = 4;
  std::optional<int> n_eval;
  int eum_divisions = 5;
  std::vector<double> reference{-1e4};
  std::uint64_t eval_seed = 1000003;

  // run
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7};
  std::string out_dir = "runs";

  Index reward_dim() const {
    return env_kind == EnvKind::Traffic ? Index{TrafficConfig::kLanes}
                                        : (tabular_layout == "three_point" ? Index{2} : tabular_objectives);
  }

  /// Preference dimension seen by the agent.
  Index policy_dim() const { return reducer == "none" ? reward_dim() : m; }

  Vector reference_point() const {
    const Index k = reward_dim();
    if (reference.size() == 1) return Vector::Constant(k, reference[0]);
    require(static_cast<Index>(reference.size()) == k, "eval.reference has ", reference.size(),
            " entries, reward dimension is ", k);
    return from_std(reference);
  }

  int rollouts_per_preference() const {
    if (n_eval) return *n_eval;
    return env_kind == EnvKind::Traffic ? 3 : 1;
  }

  void validate() const {
    static const std::vector<std::string> reducers{"none", "ours", "ipca", "npca", "ae"};
    require(std::find(reducers.begin(), reducers.end(), reducer) != reducers.end(), "unknown reducer '", reducer,
            "' (expected none, ours, ipca, npca, ae)");
    require(!ablation.any() || reducer == "ours", "ablation flags apply only to reducer 'ours'");
    require(env_kind == EnvKind::Traffic || tabular_layout == "three_point" || tabular_layout == "random",
            "unknown env.layout '", tabular_layout, "'");
    if (reducer != "none") require(m >= 1 && m < reward_dim(), "reducer.m must be in [1, K) with K=", reward_dim());
    require(policy_dim() >= 2, "the agent needs a preference dimension >= 2");
    require(total_steps > 0, "train.total_steps must be positive");
    require(eval_divisions >= 1 && eum_divisions >= 1, "evaluation divisions must be >= 1");
    require(rollouts_per_preference() >= 1, "eval.n_eval must be >= 1");
    require(agent_update_interval >= 1 && reducer_batch >= 1, "update interval and batch sizes must be >= 1");
    require(agent.gamma >= 0.0 && agent.gamma < 1.0, "agent.gamma must lie in [0, 1)");
    require(!seeds.empty(), "run.seeds is empty");
    (void)reference_point();
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size() && std::isfinite(x)) return x;
  } catch (const std::exception&) {
  }
  throw UsageError("config key '" + key + "': expected a number, got '" + v + "'");
}

inline long parse_long(const std::string& key, const std::string& v) {
  long x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw UsageError("config key '" + key + "': expected an integer, got '" + v + "'");
  return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw UsageError("config key '" + key + "': expected true/false, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

/// "A..B" (inclusive) or a comma list.
inline std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  std::vector<std::uint64_t> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const long a = detail::parse_long("seeds", detail::trim(text.substr(0, dots)));
    const long b = detail::parse_long("seeds", detail::trim(text.substr(dots + 2)));
    require(a >= 0 && b >= a, "seed range '", text, "' must satisfy 0 <= A <= B");
    for (long s = a; s <= b; ++s) out.push_back(static_cast<std::uint64_t>(s));
    return out;
  }
  for (const auto& item : detail::split_list(text)) {
    const long s = detail::parse_long("seeds", item);
    require(s >= 0, "seeds must be nonnegative");
    out.push_back(static_cast<std::uint64_t>(s));
  }
  require(!out.empty(), "empty seed list");
  return out;
}

/// Applies one `key = value` assignment. Throws UsageError on unknown keys.
inline void apply_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  auto num = [&] { return parse_double(key, value); };
  auto integer = [&] { return parse_long(key, value); };
  auto widths = [&] {
    std::vector<Index> w;
    for (const auto& item : split_list(value)) {
      const long x = parse_long(key, item);
      require(x > 0, "config key '", key, "': widths must be positive");
      w.push_back(x);
    }
    return w;
  };
  auto reals = [&] {
    std::vector<double> r;
    for (const auto& item : split_list(value)) r.push_back(parse_double(key, item));
    require(!r.empty(), "config key '", key, "' is empty");
    return r;
  };

  if (key == "env.kind") {
    if (value == "traffic") c.env_kind = EnvKind::Traffic;
    else if (value == "tabular") c.env_kind = EnvKind::Tabular;
    else throw UsageError("env.kind must be traffic or tabular, got '" + value + "'");
  } else if (key == "env.arrival_rates") {
    const auto r = reals();
    require(r.size() == TrafficConfig::kLanes, "env.arrival_rates needs 16 entries");
    std::copy(r.begin(), r.end(), c.traffic.arrival_rates.begin());
  } else if (key == "env.service_rate") c.traffic.service_rate = static_cast<int>(integer());
  else if (key == "env.yellow_loss") c.traffic.yellow_loss = static_cast<int>(integer());
  else if (key == "env.step_seconds") c.traffic.step_seconds = num();
  else if (key == "env.reward_scale") c.traffic.reward_scale = num();
  else if (key == "env.observation_scale") c.traffic.observation_scale = num();
  else if (key == "env.demand_spread") c.traffic.demand_spread = num();
  else if (key == "env.episode_length") c.traffic.episode_length = static_cast<int>(integer());
  else if (key == "env.layout") c.tabular_layout = value;
  else if (key == "env.states") c.tabular_states = static_cast<int>(integer());
  else if (key == "env.actions") c.tabular_actions = static_cast<int>(integer());
  else if (key == "env.objectives") c.tabular_objectives = integer();
  else if (key == "env.seed") c.tabular_seed = static_cast<std::uint64_t>(integer());
  else if (key == "env.gamma") c.tabular_gamma = num();
  else if (key == "env.horizon") c.tabular_horizon = static_cast<int>(integer());
  else if (key == "reducer.name") c.reducer = value;
  else if (key == "reducer.ablation") c.ablation = AblationFlags::parse(value);
  else if (key == "reducer.m") c.m = integer();
  else if (key == "reducer.lr") c.reducer_lr = num();
  else if (key == "reducer.update_interval") c.reducer_interval = static_cast<int>(integer());
  else if (key == "reducer.dropout") c.reducer_dropout = num();
  else if (key == "reducer.hidden") c.reducer_hidden = widths();
  else if (key == "reducer.beta") c.npca_beta = num();
  else if (key == "reducer.batch_size") c.reducer_batch = static_cast<int>(integer());
  else if (key == "agent.hidden") c.agent.hidden = widths();
  else if (key == "agent.lr") c.agent.learning_rate = num();
  else if (key == "agent.gamma") c.agent.gamma = num();
  else if (key == "agent.batch_size") c.agent.batch_size = static_cast<int>(integer());
  else if (key == "agent.target_sync") c.agent.target_sync = static_cast<int>(integer());
  else if (key == "agent.learning_starts") c.agent.learning_starts = static_cast<int>(integer());
  else if (key == "agent.epsilon_start") c.agent.epsilon_start = num();
  else if (key == "agent.epsilon_end") c.agent.epsilon_end = num();
  else if (key == "agent.epsilon_fraction") c.agent.epsilon_fraction = num();
  else if (key == "agent.lambda_fraction") c.agent.lambda_fraction = num();
  else if (key == "agent.envelope_samples") c.agent.envelope_samples = static_cast<int>(integer());
  else if (key == "agent.buffer_size") c.agent.buffer_size = static_cast<std::size_t>(integer());
  else if (key == "agent.update_interval") c.agent_update_interval = static_cast<int>(integer());
  else if (key == "train.total_steps") c.total_steps = integer();
  else if (key == "eval.divisions") c.eval_divisions = static_cast<int>(integer());
  else if (key == "eval.n_eval") c.n_eval = static_cast<int>(integer());
  else if (key == "eval.eum_divisions") c.eum_divisions = static_cast<int>(integer());
  else if (key == "eval.reference") c.reference = reals();
  else if (key == "eval.seed") c.eval_seed = static_cast<std::uint64_t>(integer());
  else if (key == "run.seeds") c.seeds = parse_seed_range(value);
  else if (key == "run.out") c.out_dir = value;
  else throw UsageError("unknown config key '" + key + "'");
}

inline ExperimentConfig parse_config(std::istream& is, const std::string& origin = "<config>") {
  ExperimentConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw UsageError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    try {
      apply_config_value(c, key, value);
    } catch (const UsageError& e) {
      throw UsageError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  return parse_config(in, path);
}

/// Canonical JSON view of every field; keys are sorted so the dump is stable.
inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["env.kind"] = c.env_kind == EnvKind::Traffic ? "traffic" : "tabular";
  if (c.env_kind == EnvKind::Traffic) {
    j["env.arrival_rates"] = std::vector<double>(c.traffic.arrival_rates.begin(), c.traffic.arrival_rates.end());
    j["env.service_rate"] = c.traffic.service_rate;
    j["env.yellow_loss"] = c.traffic.yellow_loss;
    j["env.step_seconds"] = c.traffic.step_seconds;
    j["env.reward_scale"] = c.traffic.reward_scale;
    j["env.observation_scale"] = c.traffic.observation_scale;
    j["env.demand_spread"] = c.traffic.demand_spread;
    j["env.episode_length"] = c.traffic.episode_length;
  } else {
    j["env.layout"] = c.tabular_layout;
    j["env.states"] = c.tabular_states;
    j["env.actions"] = c.tabular_actions;
    j["env.objectives"] = c.tabular_objectives;
    j["env.seed"] = c.tabular_seed;
    j["env.gamma"] = c.tabular_gamma;
    j["env.horizon"] = c.tabular_horizon;
  }
  j["reducer.name"] = c.reducer;
  j["reducer.ablation"] = c.ablation.str();
  j["reducer.m"] = c.policy_dim();
  j["reducer.lr"] = c.reducer_lr ? nlohmann::json(*c.reducer_lr) : nlohmann::json();
  j["reducer.update_interval"] = c.reducer_interval ? nlohmann::json(*c.reducer_interval) : nlohmann::json();
  j["reducer.dropout"] = c.reducer_dropout;
  j["reducer.hidden"] = c.reducer_hidden;
  j["reducer.beta"] = c.npca_beta;
  j["reducer.batch_size"] = c.reducer_batch;
  j["agent.hidden"] = c.agent.hidden;
  j["agent.lr"] = c.agent.learning_rate;
  j["agent.gamma"] = c.agent.gamma;
  j["agent.batch_size"] = c.agent.batch_size;
  j["agent.target_sync"] = c.agent.target_sync;
  j["agent.learning_starts"] = c.agent.learning_starts;
  j["agent.epsilon_start"] = c.agent.epsilon_start;
  j["agent.epsilon_end"] = c.agent.epsilon_end;
  j["agent.epsilon_fraction"] = c.agent.epsilon_fraction;
  j["agent.lambda_fraction"] = c.agent.lambda_fraction;
  j["agent.envelope_samples"] = c.agent.envelope_samples;
  j["agent.buffer_size"] = c.agent.buffer_size;
  j["agent.update_interval"] = c.agent_update_interval;
  j["train.total_steps"] = c.total_steps;
  j["eval.divisions"] = c.eval_divisions;
  j["eval.n_eval"] = c.rollouts_per_preference();
  j["eval.eum_divisions"] = c.eum_divisions;
  j["eval.reference"] = c.reference;
  j["eval.seed"] = c.eval_seed;
  return j;
}

/// FNV-1a over the canonical dump, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
  const std::string text = to_json(c).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace morl
