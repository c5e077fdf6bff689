#pragma once

// Experiment pipeline: train -> evaluate -> score -> aggregate -> emit.

#include "morl/agent.hpp"
#include "morl/config.hpp"
#include "morl/core.hpp"
#include "morl/metrics.hpp"
#include "morl/momdp.hpp"
#include "morl/reduction.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace morl {

inline constexpr const char* kVersion = "morl-lab 0.3.0";
inline constexpr int kReportSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Builders

/// Start state 0 branches to three absorbing states; staying with action 0
/// pays (1,0), (0.7,0.7) or (0,1), other actions pay half of that.
inline TabularMomdp make_three_point_momdp(double gamma = 0.9) {
  const std::array<Vector, 3> payoff{Vector{{1.0, 0.0}}, Vector{{0.7, 0.7}}, Vector{{0.0, 1.0}}};
  TabularMomdp m;
  m.num_states = 4;
  m.num_actions = 3;
  m.num_objectives = 2;
  m.gamma = gamma;
  m.initial_distribution = Vector::Unit(4, 0);
  for (int s = 0; s < 4; ++s) {
    for (int a = 0; a < 3; ++a) {
      if (s == 0) {
        m.transitions.push_back(Vector::Unit(4, a + 1));
        m.rewards.push_back(Vector::Zero(2));
      } else {
        m.transitions.push_back(Vector::Unit(4, s));
        m.rewards.push_back(payoff[static_cast<std::size_t>(s - 1)] * (a == 0 ? 1.0 : 0.5));
      }
    }
  }
  m.validate();
  return m;
}

inline TabularMomdp make_tabular_model(const ExperimentConfig& c) {
  if (c.tabular_layout == "three_point") return make_three_point_momdp(c.tabular_gamma);
  return make_random_tabular_momdp(c.tabular_seed, c.tabular_states, c.tabular_actions, c.tabular_objectives,
                                   c.tabular_gamma);
}

inline std::unique_ptr<Environment> make_environment(const ExperimentConfig& c, std::uint64_t seed) {
  if (c.env_kind == EnvKind::Traffic) return std::make_unique<TrafficQueueEnv>(c.traffic, seed);
  return std::make_unique<TabularEnv>(make_tabular_model(c), seed, c.tabular_horizon);
}

inline std::unique_ptr<Reducer> make_reducer(const ExperimentConfig& c, Rng& init_rng) {
  const Index k = c.reward_dim();
  if (c.reducer == "none") return std::make_unique<IdentityReducer>(k);
  if (c.reducer == "ours") {
    LearnedAffineConfig rc;
    rc.source_dim = k;
    rc.target_dim = c.m;
    rc.use_bias = c.ablation.bias;
    rc.row_stochastic = !c.ablation.no_row_stochastic;
    rc.positive = !c.ablation.no_positivity;
    rc.dropout = c.ablation.no_dropout ? 0.0 : c.reducer_dropout;
    rc.hidden = c.reducer_hidden;
    if (c.reducer_lr) rc.learning_rate = *c.reducer_lr;
    if (c.reducer_interval) rc.update_interval = *c.reducer_interval;
    return std::make_unique<LearnedAffineReducer>(rc, init_rng);
  }
  if (c.reducer == "ipca") return std::make_unique<IncrementalPcaReducer>(k, c.m, c.reducer_interval.value_or(20));
  if (c.reducer == "npca") {
    NpcaConfig nc;
    nc.source_dim = k;
    nc.target_dim = c.m;
    nc.beta = c.npca_beta;
    if (c.reducer_lr) nc.learning_rate = *c.reducer_lr;
    if (c.reducer_interval) nc.update_interval = *c.reducer_interval;
    return std::make_unique<NonnegativePcaReducer>(nc);
  }
  if (c.reducer == "ae") {
    AutoencoderConfig ac;
    ac.source_dim = k;
    ac.target_dim = c.m;
    ac.hidden = c.reducer_hidden;
    if (c.reducer_lr) ac.learning_rate = *c.reducer_lr;
    if (c.reducer_interval) ac.update_interval = *c.reducer_interval;
    return std::make_unique<AutoencoderReducer>(ac, init_rng);
  }
  throw UsageError("unknown reducer '" + c.reducer + "'");
}

/// Independent random streams of one run.
enum class Stream : std::uint64_t { Env = 11, AgentInit, Acting, Replay, ReducerInit, Reducer, Preference };

inline Rng stream_rng(std::uint64_t seed, Stream s) { return make_rng(seed, static_cast<std::uint64_t>(s)); }

// ---------------------------------------------------------------------------
// Training

struct ReducerLogRow {
  long step = 0;
  double loss = 0.0;
  bool applied = false;
};

/// Realized-A constraint telemetry, one row per reducer update.
struct ConstraintRow {
  long step = 0;
  double max_row_sum_error = 0.0;
  double min_entry = 0.0;
};

struct EpisodeLogRow {
  long episode = 0;
  long end_step = 0;
  Vector preference;
  Vector original_return;
  double epsilon = 0.0;    // at the episode's last step
  double lambda = 0.0;     // at the episode's last step
  double mean_loss = 0.0;  // over agent updates inside the episode, 0 when there were none
  long updates = 0;
};

struct TrainingLogs {
  std::vector<EpisodeLogRow> episodes;
  std::vector<ReducerLogRow> reducer;
  std::vector<ConstraintRow> constraints;
  std::vector<std::string> warnings;
};

struct TrainedRun {
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::unique_ptr<EnvelopeQAgent> agent;
  std::unique_ptr<Reducer> reducer;
  TrainingLogs logs;
};

inline ConstraintRow constraint_row(long step, const Matrix& a) {
  ConstraintRow row;
  row.step = step;
  row.max_row_sum_error = (a.rowwise().sum().array() - 1.0).abs().maxCoeff();
  row.min_entry = a.minCoeff();
  return row;
}

/// Reduced rewards for an agent update.
inline Matrix reduce_rewards(const Reducer& reducer, const Matrix& rewards) { return reducer.transform(rewards); }

inline TrainedRun run_training(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  TrainedRun run;
  run.config = config;
  run.seed = seed;

  auto env = make_environment(config, seed);
  Rng reducer_init = stream_rng(seed, Stream::ReducerInit);
  run.reducer = make_reducer(config, reducer_init);
  const Index k = env->reward_dim();
  const Index d = run.reducer->target_dim();
  require(d == config.policy_dim(), "reducer output dimension mismatch");

  Rng agent_init = stream_rng(seed, Stream::AgentInit);
  run.agent = std::make_unique<EnvelopeQAgent>(env->observation_dim(), env->num_actions(), d, config.agent, agent_init);
  ReplayBuffer buffer(config.agent.buffer_size, env->observation_dim(), k);

  Rng acting = stream_rng(seed, Stream::Acting);
  Rng replay = stream_rng(seed, Stream::Replay);
  Rng reducer_rng = stream_rng(seed, Stream::Reducer);
  Rng pref_rng = stream_rng(seed, Stream::Preference);

  const auto* affine = dynamic_cast<const LearnedAffineReducer*>(run.reducer.get());
  if (affine) run.logs.constraints.push_back(constraint_row(0, affine->matrix()));

  const long total = config.total_steps;
  const auto& ac = config.agent;
  const int envelope_n = ac.envelope_samples > 0 ? ac.envelope_samples : ac.batch_size;

  Vector obs;
  Vector omega;
  Trajectory episode;
  bool need_reset = true;
  long episode_index = 0;
  double loss_sum = 0.0;
  long loss_count = 0;

  for (long t = 0; t < total; ++t) {
    if (need_reset) {
      obs = env->reset();
      omega = sample_preference(d, pref_rng).weights();
      episode.clear();
      loss_sum = 0.0;
      loss_count = 0;
      need_reset = false;
    }
    const double epsilon = linear_schedule(ac.epsilon_start, ac.epsilon_end, ac.epsilon_fraction, t, total);
    const int action = run.agent->act(obs, omega, epsilon, acting);
    const int state = env->state_id();
    StepResult sr = env->step(action);
    buffer.push(obs, action, sr.reward, sr.observation, sr.terminal);
    run.reducer->observe(sr.reward);
    episode.push_back({state, action, sr.reward, env->state_id(), sr.done});
    obs = std::move(sr.observation);

    const long step = t + 1;
    const double lambda = linear_schedule(0.0, 1.0, ac.lambda_fraction, step, total);

    if (run.reducer->name() != "none" && step >= ac.learning_starts && step % run.reducer->update_interval() == 0) {
      const ReplayBatch rb = buffer.sample(static_cast<std::size_t>(config.reducer_batch), reducer_rng);
      const UpdateResult ur = run.reducer->update(rb.rewards, reducer_rng);
      run.logs.reducer.push_back({step, ur.loss, ur.applied});
      if (!ur.applied && !ur.error.empty() && run.logs.warnings.size() < 100)
        run.logs.warnings.push_back("step " + std::to_string(step) + ": " + ur.error);
      if (affine) run.logs.constraints.push_back(constraint_row(step, affine->matrix()));
    }

    if (step >= ac.learning_starts && step % config.agent_update_interval == 0) {
      const ReplayBatch rb = buffer.sample(static_cast<std::size_t>(ac.batch_size), replay);
      EnvelopeBatch eb;
      eb.observations = rb.observations;
      eb.actions = rb.actions;
      eb.rewards = reduce_rewards(*run.reducer, rb.rewards);
      eb.next_observations = rb.next_observations;
      eb.terminal = rb.terminal;
      eb.preferences.resize(d, ac.batch_size);
      for (int i = 0; i < ac.batch_size; ++i) eb.preferences.col(i) = sample_preference(d, replay).weights();
      if (envelope_n == ac.batch_size) {
        eb.envelope_preferences = eb.preferences;
      } else {
        eb.envelope_preferences.resize(d, envelope_n);
        for (int j = 0; j < envelope_n; ++j) eb.envelope_preferences.col(j) = sample_preference(d, replay).weights();
      }
      const UpdateResult ur = run.agent->update(eb, lambda);
      if (ur.applied) {
        loss_sum += ur.loss;
        ++loss_count;
      } else if (run.logs.warnings.size() < 100) {
        run.logs.warnings.push_back("step " + std::to_string(step) + ": agent update skipped: " + ur.error);
      }
    }

    if (step % ac.target_sync == 0) run.agent->sync_target();

    if (sr.done) {
      run.logs.episodes.push_back({episode_index++, step, omega, discounted_return(episode, ac.gamma, k), epsilon,
                                   lambda, loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0,
                                   loss_count});
      need_reset = true;
    }
  }
  return run;
}

// ---------------------------------------------------------------------------
// Evaluation and scoring

struct EvaluatedPoint {
  Vector preference;  // policy-space preference (m-dim, or K-dim for none)
  Vector value;       // ORIGINAL K-dim discounted return
};

/// Greedy rollouts on the equidistant lattice. Every preference sees the same
/// n_eval environment seeds.
inline std::vector<EvaluatedPoint> evaluate(const EnvelopeQAgent& agent, const ExperimentConfig& config) {
  const Index d = agent.pref_dim();
  const int n_eval = config.rollouts_per_preference();
  std::vector<EvaluatedPoint> out;
  for (const Vector& w : equidistant_simplex_points(static_cast<int>(d), config.eval_divisions)) {
    Vector mean;
    for (int i = 0; i < n_eval; ++i) {
      auto env = make_environment(config, config.eval_seed + static_cast<std::uint64_t>(i));
      const Trajectory traj = rollout(*env, [&](const Vector& obs) { return agent.greedy_action(obs, w); });
      const Vector g = discounted_return(traj, config.agent.gamma, env->reward_dim());
      mean = (i == 0) ? g : Vector(mean + g);
    }
    mean /= static_cast<double>(n_eval);
    require(mean.size() == config.reward_dim(), "scored returns must live in the original reward space");
    out.push_back({w, mean});
  }
  return out;
}

struct ScoreResult {
  ParetoSet front;
  double hypervolume = 0.0;
  double sparsity = 0.0;
  double eum = 0.0;
};

inline ScoreResult score(const std::vector<EvaluatedPoint>& points, const Vector& ref,
                         const std::vector<Vector>& eum_preferences) {
  require(!points.empty(), "nothing to score");
  std::vector<Vector> values;
  std::vector<std::optional<Vector>> tags;
  for (const auto& p : points) {
    values.push_back(p.value);
    tags.push_back(p.preference);
  }
  ScoreResult r{pareto_filter(values, tags)};
  r.hypervolume = hypervolume(r.front, ref);
  r.sparsity = sparsity(r.front);
  r.eum = eum(r.front, eum_preferences);
  return r;
}

inline ScoreResult score(const std::vector<EvaluatedPoint>& points, const ExperimentConfig& config) {
  return score(points, config.reference_point(),
               equidistant_simplex_points(static_cast<int>(config.reward_dim()), config.eum_divisions));
}

// ---------------------------------------------------------------------------
// Reports

struct SeedReport {
  std::string method;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<EvaluatedPoint> evaluated;
  ScoreResult score;
};

/// Method label: reducer name plus ablation flags.
inline std::string method_label(const ExperimentConfig& c) {
  return c.ablation.any() ? c.reducer + "[" + c.ablation.str() + "]" : c.reducer;
}

inline SeedReport make_seed_report(const ExperimentConfig& config, std::uint64_t seed,
                                   std::vector<EvaluatedPoint> evaluated) {
  SeedReport r{method_label(config), seed, config_hash(config), std::move(evaluated), {}};
  r.score = score(r.evaluated, config);
  return r;
}

inline nlohmann::json to_json(const SeedReport& r) {
  nlohmann::json evaluated = nlohmann::json::array();
  for (const auto& p : r.evaluated)
    evaluated.push_back({{"preference", to_std(p.preference)}, {"value", to_std(p.value)}});
  nlohmann::json front = nlohmann::json::array();
  for (std::size_t i = 0; i < r.score.front.size(); ++i) {
    const auto& tag = r.score.front.provenance()[i];
    front.push_back({{"value", to_std(r.score.front.points()[i])},
                     {"preference", tag ? nlohmann::json(to_std(*tag)) : nlohmann::json()}});
  }
  return {{"schema_version", kReportSchemaVersion},
          {"version", kVersion},
          {"method", r.method},
          {"seed", r.seed},
          {"config_hash", r.config_hash},
          {"evaluated", std::move(evaluated)},
          {"front", std::move(front)},
          {"hypervolume", r.score.hypervolume},
          {"sparsity", r.score.sparsity},
          {"eum", r.score.eum}};
}

inline SeedReport seed_report_from_json(const nlohmann::json& j, const ExperimentConfig& config) {
  if (j.at("schema_version").get<int>() != kReportSchemaVersion) throw IoError("unsupported report schema version");
  std::vector<EvaluatedPoint> evaluated;
  for (const auto& e : j.at("evaluated"))
    evaluated.push_back({from_std(e.at("preference").get<std::vector<double>>()),
                         from_std(e.at("value").get<std::vector<double>>())});
  SeedReport r = make_seed_report(config, j.at("seed").get<std::uint64_t>(), std::move(evaluated));
  r.method = j.at("method").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  return r;
}

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;
};

struct AggregateSummary {
  std::string method;
  std::vector<std::uint64_t> seeds;
  std::uint64_t dropped_max_seed = 0;
  std::uint64_t dropped_min_seed = 0;
  MetricSummary hypervolume;
  MetricSummary sparsity;
  MetricSummary eum;
  std::vector<SeedReport> reports;
};

/// Mean and sample standard deviation (0 for a single value).
inline MetricSummary mean_std(const std::vector<double>& xs) {
  require(!xs.empty(), "mean of an empty set");
  MetricSummary s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

/// Indices dropped by the trimmed mean: the first seed with the maximum
/// hypervolume, then the first remaining seed with the minimum.
inline std::pair<std::size_t, std::size_t> trimmed_indices(const std::vector<double>& hv) {
  require(hv.size() >= 3, "aggregation needs at least 3 seeds, got ", hv.size());
  std::size_t hi = 0;
  for (std::size_t i = 1; i < hv.size(); ++i)
    if (hv[i] > hv[hi]) hi = i;
  std::size_t lo = hi == 0 ? 1 : 0;
  for (std::size_t i = 0; i < hv.size(); ++i)
    if (i != hi && hv[i] < hv[lo]) lo = i;
  return {hi, lo};
}

inline AggregateSummary aggregate_seeds(std::vector<SeedReport> reports) {
  require(reports.size() >= 3, "aggregation needs at least 3 seed reports, got ", reports.size());
  AggregateSummary s;
  s.method = reports.front().method;
  std::vector<double> hv;
  for (const auto& r : reports) {
    require(r.method == s.method, "cannot aggregate reports of different methods (", s.method, ", ", r.method, ")");
    hv.push_back(r.score.hypervolume);
    s.seeds.push_back(r.seed);
  }
  const auto [hi, lo] = trimmed_indices(hv);
  s.dropped_max_seed = reports[hi].seed;
  s.dropped_min_seed = reports[lo].seed;
  std::vector<double> kept_hv, kept_sp, kept_eum;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (i == hi || i == lo) continue;
    kept_hv.push_back(reports[i].score.hypervolume);
    kept_sp.push_back(reports[i].score.sparsity);
    kept_eum.push_back(reports[i].score.eum);
  }
  s.hypervolume = mean_std(kept_hv);
  s.sparsity = mean_std(kept_sp);
  s.eum = mean_std(kept_eum);
  s.reports = std::move(reports);
  return s;
}

inline nlohmann::json to_json(const MetricSummary& m) { return {{"mean", m.mean}, {"std", m.std}}; }

inline nlohmann::json to_json(const AggregateSummary& s) {
  nlohmann::json per_seed = nlohmann::json::array();
  for (const auto& r : s.reports)
    per_seed.push_back({{"seed", r.seed},
                        {"hypervolume", r.score.hypervolume},
                        {"sparsity", r.score.sparsity},
                        {"eum", r.score.eum},
                        {"front_size", r.score.front.size()}});
  return {{"schema_version", kReportSchemaVersion},
          {"version", kVersion},
          {"method", s.method},
          {"config_hash", s.reports.empty() ? std::string() : s.reports.front().config_hash},
          {"seeds", s.seeds},
          {"dropped", {{"max_hypervolume_seed", s.dropped_max_seed}, {"min_hypervolume_seed", s.dropped_min_seed}}},
          {"trimmed", {{"hypervolume", to_json(s.hypervolume)},
                       {"sparsity", to_json(s.sparsity)},
                       {"eum", to_json(s.eum)}}},
          {"per_seed", std::move(per_seed)}};
}

// ---------------------------------------------------------------------------
// File output

namespace fs = std::filesystem;

inline void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

/// Evaluated points as CSV: w_1..w_d, x_1..x_K.
inline std::string evaluated_csv(const std::vector<EvaluatedPoint>& points) {
  std::ostringstream os;
  os << std::setprecision(17);
  if (points.empty()) return {};
  const Index d = points.front().preference.size(), k = points.front().value.size();
  for (Index i = 0; i < d; ++i) os << (i ? "," : "") << "w_" << i + 1;
  for (Index i = 0; i < k; ++i) os << ",x_" << i + 1;
  os << "\n";
  for (const auto& p : points) {
    for (Index i = 0; i < d; ++i) os << (i ? "," : "") << p.preference[i];
    for (Index i = 0; i < k; ++i) os << "," << p.value[i];
    os << "\n";
  }
  return os.str();
}

inline std::vector<EvaluatedPoint> read_evaluated_csv(const std::string& text, Index d) {
  std::istringstream is(text);
  std::vector<EvaluatedPoint> out;
  for (const Vector& row : read_points_csv(is)) {
    require(row.size() > d, "evaluated CSV row too short");
    out.push_back({row.head(d), row.tail(row.size() - d)});
  }
  return out;
}

inline std::string front_csv(const ParetoSet& front) {
  std::ostringstream os;
  write_points_csv(os, front.points());
  return os.str();
}

inline void write_training_logs(const fs::path& dir, const TrainingLogs& logs) {
  std::ostringstream ep, red, con;
  ep << std::setprecision(17) << "episode,end_step,epsilon,lambda,mean_loss,updates,preference,return\n";
  for (const auto& e : logs.episodes) {
    ep << e.episode << ',' << e.end_step << ',' << e.epsilon << ',' << e.lambda << ',' << e.mean_loss << ','
       << e.updates << ',';
    for (Index i = 0; i < e.preference.size(); ++i) ep << (i ? " " : "") << e.preference[i];
    ep << ',';
    for (Index i = 0; i < e.original_return.size(); ++i) ep << (i ? " " : "") << e.original_return[i];
    ep << "\n";
  }
  red << std::setprecision(17) << "step,loss,applied\n";
  for (const auto& r : logs.reducer) red << r.step << ',' << r.loss << ',' << (r.applied ? 1 : 0) << "\n";
  write_text(dir / "episodes.csv", ep.str());
  write_text(dir / "reducer_loss.csv", red.str());
  if (!logs.constraints.empty()) {
    con << std::setprecision(17) << "step,max_row_sum_error,min_entry\n";
    for (const auto& c : logs.constraints) con << c.step << ',' << c.max_row_sum_error << ',' << c.min_entry << "\n";
    write_text(dir / "constraints.csv", con.str());
  }
}

inline nlohmann::json checkpoint(const TrainedRun& run) {
  return {{"version", kVersion},
          {"seed", run.seed},
          {"config_hash", config_hash(run.config)},
          {"agent", run.agent->checkpoint()},
          {"reducer", run.reducer->checkpoint()}};
}

/// Rebuilds agent and reducer from a checkpoint written by `checkpoint`.
inline TrainedRun restore_run(const ExperimentConfig& config, const nlohmann::json& state) {
  config.validate();
  if (state.at("config_hash").get<std::string>() != config_hash(config))
    throw UsageError("checkpoint was produced by a different config");
  TrainedRun run;
  run.config = config;
  run.seed = state.at("seed").get<std::uint64_t>();
  auto env = make_environment(config, run.seed);
  Rng dummy = make_rng(0);
  run.reducer = make_reducer(config, dummy);
  if (config.reducer != "none") run.reducer->restore(state.at("reducer"));
  run.agent = std::make_unique<EnvelopeQAgent>(env->observation_dim(), env->num_actions(), config.policy_dim(),
                                               config.agent, dummy);
  run.agent->restore(state.at("agent"));
  return run;
}

inline fs::path seed_dir(const fs::path& out, std::uint64_t seed) { return out / ("seed_" + std::to_string(seed)); }

/// <out>/<method>, with ablation flags spelled into the directory name.
inline fs::path method_dir(const ExperimentConfig& c) {
  std::string name = c.reducer;
  if (c.ablation.any()) name += '_';
  for (char ch : c.ablation.str()) name += (ch == ',' ? '_' : ch);
  return fs::path(c.out_dir) / name;
}

/// Writes the summary JSON, per-seed reports and front CSVs, and the plot CSV.
inline void emit_report(const AggregateSummary& summary, const fs::path& out) {
  write_text(out / "summary.json", json_text(to_json(summary)));
  for (const auto& r : summary.reports) {
    write_text(seed_dir(out, r.seed) / "report.json", json_text(to_json(r)));
    write_text(seed_dir(out, r.seed) / "front.csv", front_csv(r.score.front));
  }
  std::ostringstream plot;
  plot << std::setprecision(17) << "method,metric,mean,std\n";
  plot << summary.method << ",hypervolume," << summary.hypervolume.mean << ',' << summary.hypervolume.std << "\n";
  plot << summary.method << ",sparsity," << summary.sparsity.mean << ',' << summary.sparsity.std << "\n";
  plot << summary.method << ",eum," << summary.eum.mean << ',' << summary.eum.std << "\n";
  write_text(out / "plot.csv", plot.str());
}

/// Multi-method comparison table in the plot CSV layout.
inline std::string comparison_csv(const std::vector<AggregateSummary>& summaries) {
  std::ostringstream plot;
  plot << std::setprecision(17) << "method,metric,mean,std\n";
  for (const auto& s : summaries) {
    plot << s.method << ",hypervolume," << s.hypervolume.mean << ',' << s.hypervolume.std << "\n";
    plot << s.method << ",sparsity," << s.sparsity.mean << ',' << s.sparsity.std << "\n";
    plot << s.method << ",eum," << s.eum.mean << ',' << s.eum.std << "\n";
  }
  return plot.str();
}

/// train + evaluate + score for one seed.
inline SeedReport run_seed(const ExperimentConfig& config, std::uint64_t seed, TrainingLogs* logs = nullptr) {
  TrainedRun run = run_training(config, seed);
  if (logs) *logs = run.logs;
  return make_seed_report(config, seed, evaluate(*run.agent, config));
}

}  // namespace morl
