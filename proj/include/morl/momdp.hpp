#pragma once

// Multi-objective MDP contract plus the two shipped environment families:
// small tabular MOMDPs (enumerable for oracles) and a 16-lane queueing
// intersection standing in for a traffic-signal simulator.

#include "morl/core.hpp"

#include <array>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace morl {

struct StepResult {
  Vector observation;
  Vector reward;
  bool done = false;      // episode over (time limit or absorbing end)
  bool terminal = false;  // true termination; bootstrapping must stop
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual Index reward_dim() const = 0;
  virtual Index observation_dim() const = 0;
  virtual int num_actions() const = 0;
  virtual int episode_length() const = 0;
  virtual bool stochastic() const = 0;

  virtual void reseed(std::uint64_t seed) = 0;
  virtual Vector reset() = 0;
  virtual StepResult step(int action) = 0;

  /// Compact integer label of the current state, used in trajectory exports.
  virtual int state_id() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;
};

struct TrajectoryStep {
  int state = 0;
  int action = 0;
  Vector reward;
  int next_state = 0;
  bool done = false;
};

using Trajectory = std::vector<TrajectoryStep>;

/// Componentwise sum of gamma^t r_t. An empty trajectory yields the zero vector of `dim`.
inline Vector discounted_return(const Trajectory& trajectory, double gamma, Index dim) {
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  Vector total = Vector::Zero(dim);
  double discount = 1.0;
  for (const auto& step : trajectory) {
    require(step.reward.size() == dim, "mixed reward dimensions in trajectory: expected ", dim, ", got ",
            step.reward.size());
    total += discount * step.reward;
    discount *= gamma;
  }
  return total;
}

/// Smallest horizon T with gamma^T < threshold; used to truncate infinite-horizon returns.
inline int truncation_horizon(double gamma, double threshold = 1e-8) {
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  if (gamma == 0.0) return 1;
  return static_cast<int>(std::ceil(std::log(threshold) / std::log(gamma))) + 1;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
  const Index dim = trajectory.empty() ? 0 : trajectory.front().reward.size();
  os << "step,state_id,action";
  for (Index k = 0; k < dim; ++k) os << ",r_" << (k + 1);
  os << '\n';
  os.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    const auto& s = trajectory[t];
    os << t << ',' << s.state << ',' << s.action;
    for (Index k = 0; k < s.reward.size(); ++k) os << ',' << s.reward[k];
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Tabular MOMDP

struct TabularMomdp {
  int num_states = 0;
  int num_actions = 0;
  Index num_objectives = 0;
  double gamma = 0.9;
  /// transitions[s * num_actions + a] is a distribution over next states.
  std::vector<Vector> transitions;
  /// rewards[s * num_actions + a] is the K-dim reward of taking a in s.
  std::vector<Vector> rewards;
  Vector initial_distribution;

  std::size_t index(int s, int a) const { return static_cast<std::size_t>(s) * num_actions + a; }
  const Vector& transition(int s, int a) const { return transitions[index(s, a)]; }
  const Vector& reward(int s, int a) const { return rewards[index(s, a)]; }

  void validate() const {
    require(num_states > 0 && num_actions > 0, "tabular MOMDP needs states and actions");
    require(num_objectives >= 2, "tabular MOMDP needs K >= 2 objectives, got ", num_objectives);
    require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
    const auto pairs = static_cast<std::size_t>(num_states) * num_actions;
    require(transitions.size() == pairs && rewards.size() == pairs, "table sizes do not match S*A");
    for (std::size_t i = 0; i < pairs; ++i) {
      require(transitions[i].size() == num_states, "transition row has wrong length");
      require((transitions[i].array() >= 0.0).all() && std::abs(transitions[i].sum() - 1.0) <= 1e-9,
              "transition row ", i, " is not a distribution");
      require(rewards[i].size() == num_objectives && rewards[i].allFinite(), "reward entry ", i, " is invalid");
    }
    require(initial_distribution.size() == num_states &&
                std::abs(initial_distribution.sum() - 1.0) <= 1e-9 && (initial_distribution.array() >= 0.0).all(),
            "initial distribution is not a distribution");
  }
};

/// Samples an index from a discrete distribution (inverse CDF, deterministic given rng).
inline int sample_categorical(const Vector& probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (Index i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  for (Index i = probs.size() - 1; i >= 0; --i)
    if (probs[i] > 0.0) return static_cast<int>(i);
  return 0;
}

/// Random MOMDP for oracle tests: rewards uniform in [0,1]^K, flat-Dirichlet
/// transition rows, start state 0. Keep S <= 6 and A <= 3 for enumeration.
inline TabularMomdp make_random_tabular_momdp(std::uint64_t seed, int num_states, int num_actions, Index k,
                                              double gamma) {
  require(k >= 2, "random MOMDP needs K >= 2, got ", k);
  require(num_states > 0 && num_actions > 0, "random MOMDP needs states and actions");
  Rng rng = make_rng(seed, 0x7461626cULL);
  TabularMomdp m;
  m.num_states = num_states;
  m.num_actions = num_actions;
  m.num_objectives = k;
  m.gamma = gamma;
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      m.transitions.push_back(sample_dirichlet(num_states, 1.0, rng));
      Vector r(k);
      for (Index j = 0; j < k; ++j) r[j] = uniform01(rng);
      m.rewards.push_back(std::move(r));
    }
  }
  m.initial_distribution = Vector::Zero(num_states);
  m.initial_distribution[0] = 1.0;
  m.validate();
  return m;
}

struct PolicyValues {
  Matrix per_state;  // S x K, discounted value of each state
  Vector initial;    // K, expectation under the initial distribution
};

/// Exact vector values of a deterministic stationary policy: solves
/// (I - gamma P_pi) V = R_pi with LU (partial pivoting), one column per objective.
inline PolicyValues evaluate_policy(const TabularMomdp& model, const std::vector<int>& policy) {
  require(static_cast<int>(policy.size()) == model.num_states, "policy must assign an action to every state");
  const int s_count = model.num_states;
  Matrix system = Matrix::Identity(s_count, s_count);
  Matrix rhs(s_count, model.num_objectives);
  for (int s = 0; s < s_count; ++s) {
    const int a = policy[static_cast<std::size_t>(s)];
    require(a >= 0 && a < model.num_actions, "policy action out of range at state ", s);
    system.row(s) -= model.gamma * model.transition(s, a).transpose();
    rhs.row(s) = model.reward(s, a).transpose();
  }
  PolicyValues out;
  out.per_state = system.partialPivLu().solve(rhs);
  out.initial = out.per_state.transpose() * model.initial_distribution;
  return out;
}

/// Episodic view of a TabularMomdp with one-hot observations and a time limit.
class TabularEnv final : public Environment {
 public:
  TabularEnv(TabularMomdp model, std::uint64_t seed, int horizon = 0)
      : model_(std::move(model)), rng_(make_rng(seed, 1)), seed_(seed) {
    model_.validate();
    horizon_ = horizon > 0 ? horizon : truncation_horizon(model_.gamma);
  }

  const TabularMomdp& model() const { return model_; }

  Index reward_dim() const override { return model_.num_objectives; }
  Index observation_dim() const override { return model_.num_states; }
  int num_actions() const override { return model_.num_actions; }
  int episode_length() const override { return horizon_; }
  bool stochastic() const override {
    for (const auto& row : model_.transitions)
      if ((row.array() > 0.0).count() > 1) return true;
    return (model_.initial_distribution.array() > 0.0).count() > 1;
  }

  void reseed(std::uint64_t seed) override {
    seed_ = seed;
    rng_ = make_rng(seed, 1);
  }

  Vector reset() override {
    state_ = sample_categorical(model_.initial_distribution, rng_);
    steps_ = 0;
    done_ = false;
    return observation();
  }

  StepResult step(int action) override {
    require(!done_, "step called on a finished episode");
    require(action >= 0 && action < model_.num_actions, "action ", action, " out of range");
    StepResult out;
    out.reward = model_.reward(state_, action);
    state_ = sample_categorical(model_.transition(state_, action), rng_);
    ++steps_;
    done_ = steps_ >= horizon_;
    out.done = done_;
    out.observation = observation();
    return out;
  }

  int state_id() const override { return state_; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<TabularEnv>(*this); }

 private:
  Vector observation() const {
    Vector o = Vector::Zero(model_.num_states);
    o[state_] = 1.0;
    return o;
  }

  TabularMomdp model_;
  Rng rng_;
  std::uint64_t seed_;
  int horizon_ = 0;
  int state_ = 0;
  int steps_ = 0;
  bool done_ = true;
};

// ---------------------------------------------------------------------------
// Traffic queue intersection

/// Lane k = 4 * approach + movement, approaches N, S, E, W and movements
/// (right, straight, straight, left). Phase 0 serves N/S straight, phase 1 N/S
/// right+left, phase 2 E/W straight, phase 3 E/W right+left.
struct TrafficConfig {
  static constexpr int kLanes = 16;
  static constexpr int kPhases = 4;

  std::array<double, kLanes> arrival_rates{0.20, 0.45, 0.45, 0.25,   // N
                                           0.15, 0.40, 0.40, 0.20,   // S
                                           0.15, 0.35, 0.35, 0.15,   // E
                                           0.10, 0.30, 0.30, 0.20};  // W
  int service_rate = 4;            // vehicles leaving a served lane per step
  int yellow_loss = 1;             // capacity lost on a phase change
  double step_seconds = 20.0;      // simulated time per decision
  double reward_scale = 1.0 / 60;  // waiting seconds -> vehicle-minutes
  double observation_scale = 0.1;  // applied to accumulators in the observation
  double demand_spread = 0.25;     // per-episode demand multiplier in [1-s, 1+s]
  int episode_length = 200;
};

inline const std::array<int, TrafficConfig::kLanes>& lane_phase_map() {
  static const std::array<int, TrafficConfig::kLanes> map{1, 0, 0, 1, 1, 0, 0, 1, 3, 2, 2, 3, 3, 2, 2, 3};
  return map;
}

class TrafficQueueEnv final : public Environment {
 public:
  static constexpr int kLanes = TrafficConfig::kLanes;
  static constexpr int kPhases = TrafficConfig::kPhases;

  explicit TrafficQueueEnv(TrafficConfig config = {}, std::uint64_t seed = 0)
      : config_(config), rng_(make_rng(seed, 2)) {
    require(config_.service_rate >= 0 && config_.yellow_loss >= 0, "service parameters must be nonnegative");
    require(config_.episode_length > 0, "episode length must be positive");
    for (double r : config_.arrival_rates) require(r >= 0.0 && std::isfinite(r), "arrival rates must be >= 0");
  }

  const TrafficConfig& config() const { return config_; }

  Index reward_dim() const override { return kLanes; }
  Index observation_dim() const override { return kPhases + kLanes; }
  int num_actions() const override { return kPhases; }
  int episode_length() const override { return config_.episode_length; }
  bool stochastic() const override { return true; }

  void reseed(std::uint64_t seed) override { rng_ = make_rng(seed, 2); }

  Vector reset() override {
    for (auto& q : queues_) q.clear();
    phase_ = 0;
    steps_ = 0;
    done_ = false;
    const double s = config_.demand_spread;
    demand_ = 1.0 - s + 2.0 * s * uniform01(rng_);
    // Shifts demand between the N/S and E/W corridors for this episode.
    tilt_ = (uniform01(rng_) - 0.5) * s;
    return observation();
  }

  StepResult step(int action) override {
    require(!done_, "step called on a finished episode");
    require(action >= 0 && action < kPhases, "phase ", action, " out of range");
    const auto& phase_of = lane_phase_map();
    const int capacity = std::max(0, config_.service_rate - (action != phase_ ? config_.yellow_loss : 0));
    phase_ = action;
    ++steps_;
    for (int k = 0; k < kLanes; ++k) {
      if (phase_of[k] == action)
        for (int n = 0; n < capacity && !queues_[k].empty(); ++n) queues_[k].pop_front();
    }
    for (int k = 0; k < kLanes; ++k) {
      const double corridor = (k < 8) ? (1.0 + tilt_) : (1.0 - tilt_);
      const double rate = config_.arrival_rates[k] * demand_ * corridor;
      if (rate > 0.0) {
        const int arrivals = std::poisson_distribution<int>(rate)(rng_);
        for (int n = 0; n < arrivals; ++n) queues_[k].push_back(steps_);
      }
    }
    StepResult out;
    out.reward = -accumulators();
    out.observation = observation();
    done_ = steps_ >= config_.episode_length;
    out.done = done_;
    return out;
  }

  /// Waiting accumulator per lane: total waiting time of queued vehicles,
  /// expressed in reward units (vehicle-minutes by default).
  Vector accumulators() const {
    Vector w(kLanes);
    for (int k = 0; k < kLanes; ++k) {
      double total = 0.0;
      for (int arrived : queues_[k]) total += static_cast<double>(steps_ - arrived);
      w[k] = total * config_.step_seconds * config_.reward_scale;
    }
    return w;
  }

  int phase() const { return phase_; }
  int state_id() const override { return phase_; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<TrafficQueueEnv>(*this); }

 private:
  Vector observation() const {
    Vector o = Vector::Zero(kPhases + kLanes);
    o[phase_] = 1.0;
    o.tail(kLanes) = accumulators() * config_.observation_scale;
    return o;
  }

  TrafficConfig config_;
  Rng rng_;
  std::array<std::deque<int>, kLanes> queues_{};
  int phase_ = 0;
  int steps_ = 0;
  bool done_ = true;
  double demand_ = 1.0;
  double tilt_ = 0.0;
};

/// Rolls out one episode with a state-feedback policy and records it.
inline Trajectory rollout(Environment& env, const std::function<int(const Vector&)>& policy) {
  Trajectory traj;
  Vector obs = env.reset();
  for (;;) {
    TrajectoryStep step;
    step.state = env.state_id();
    step.action = policy(obs);
    StepResult r = env.step(step.action);
    step.reward = std::move(r.reward);
    step.next_state = env.state_id();
    step.done = r.done;
    obs = std::move(r.observation);
    traj.push_back(std::move(step));
    if (traj.back().done) break;
  }
  return traj;
}

}  // namespace morl
