#pragma once

// Preference-conditioned multi-objective Q-learning with the envelope
// bootstrap, plus a tabular scalarized solver used on the oracle side.

#include "morl/core.hpp"
#include "morl/momdp.hpp"
#include "morl/nn.hpp"
#include "morl/reduction.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace morl {

/// Flat Dirichlet draw on the (d-1)-simplex.
inline Preference sample_preference(Index d, Rng& rng) {
  require(d >= 2, "preferences need d >= 2, got ", d);
  return Preference(sample_dirichlet(d, 1.0, rng));
}

/// Linear schedule from `start` to `end` over the first `fraction` of `total` steps.
inline double linear_schedule(double start, double end, double fraction, long step, long total) {
  const double horizon = fraction * static_cast<double>(total);
  if (horizon <= 0.0) return end;
  const double progress = std::min(1.0, static_cast<double>(step) / horizon);
  return start + progress * (end - start);
}

// ---------------------------------------------------------------------------

struct ReplayBatch {
  Matrix observations;       // obs_dim x B
  std::vector<int> actions;  // B
  Matrix rewards;            // K x B, original rewards
  Matrix next_observations;  // obs_dim x B
  std::vector<bool> terminal;
};

/// Ring buffer of transitions. Rewards are stored in the ORIGINAL K-dim space;
/// reducers are applied when a batch is sampled.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, Index observation_dim, Index reward_dim)
      : capacity_(capacity), observation_dim_(observation_dim), reward_dim_(reward_dim) {
    require(capacity > 0, "replay capacity must be positive");
    observations_ = Matrix::Zero(observation_dim, static_cast<Index>(capacity));
    next_observations_ = Matrix::Zero(observation_dim, static_cast<Index>(capacity));
    rewards_ = Matrix::Zero(reward_dim, static_cast<Index>(capacity));
    actions_.assign(capacity, 0);
    terminal_.assign(capacity, false);
  }

  Index reward_dim() const { return reward_dim_; }
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  void push(const Vector& obs, int action, const Vector& reward, const Vector& next_obs, bool terminal) {
    require(reward.size() == reward_dim_, "replay stores original ", reward_dim_, "-dim rewards, got ", reward.size());
    require(obs.size() == observation_dim_ && next_obs.size() == observation_dim_, "observation dimension mismatch");
    const auto col = static_cast<Index>(head_);
    observations_.col(col) = obs;
    next_observations_.col(col) = next_obs;
    rewards_.col(col) = reward;
    actions_[head_] = action;
    terminal_[head_] = terminal;
    head_ = (head_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
  }

  /// Uniform sample with replacement.
  ReplayBatch sample(std::size_t batch_size, Rng& rng) const {
    require(size_ > 0, "sampling from an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
    const auto b = static_cast<Index>(batch_size);
    ReplayBatch out{Matrix(observation_dim_, b), std::vector<int>(batch_size), Matrix(reward_dim_, b),
                    Matrix(observation_dim_, b), std::vector<bool>(batch_size)};
    for (Index i = 0; i < b; ++i) {
      const std::size_t idx = pick(rng);
      out.observations.col(i) = observations_.col(static_cast<Index>(idx));
      out.next_observations.col(i) = next_observations_.col(static_cast<Index>(idx));
      out.rewards.col(i) = rewards_.col(static_cast<Index>(idx));
      out.actions[static_cast<std::size_t>(i)] = actions_[idx];
      out.terminal[static_cast<std::size_t>(i)] = terminal_[idx];
    }
    return out;
  }

 private:
  std::size_t capacity_;
  Index observation_dim_;
  Index reward_dim_;
  Matrix observations_;
  Matrix next_observations_;
  Matrix rewards_;
  std::vector<int> actions_;
  std::vector<bool> terminal_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

// ---------------------------------------------------------------------------

struct AgentConfig {
  std::vector<Index> hidden{256, 256};
  double learning_rate = 3e-4;
  double gamma = 0.99;
  int batch_size = 32;
  int target_sync = 500;
  int learning_starts = 200;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_fraction = 0.1;
  double lambda_fraction = 0.75;
  /// Size of the preference set the envelope maximizes over; 0 uses the batch size.
  int envelope_samples = 0;
  std::size_t buffer_size = 52000;
};

/// Batch fed to the envelope update with rewards already reduced to d dims.
struct EnvelopeBatch {
  Matrix observations;       // obs_dim x B
  std::vector<int> actions;  // B
  Matrix rewards;            // d x B
  Matrix next_observations;  // obs_dim x B
  std::vector<bool> terminal;
  Matrix preferences;           // d x B, one omega per transition
  Matrix envelope_preferences;  // d x N, omega' set for the envelope max
};

/// Q_theta(s, a, omega) in R^d for every action, from a single MLP over
/// [observation; omega] with |A| * d outputs (action-major blocks).
class EnvelopeQAgent {
 public:
  struct Gradient {
    double loss = 0.0;
    double main_loss = 0.0;
    double aux_loss = 0.0;
    nn::MlpGradients network;
  };

  EnvelopeQAgent(Index observation_dim, int num_actions, Index pref_dim, AgentConfig config, Rng& init_rng)
      : config_(std::move(config)), observation_dim_(observation_dim), num_actions_(num_actions), pref_dim_(pref_dim) {
    require(observation_dim > 0 && num_actions > 0 && pref_dim > 0, "invalid agent dimensions");
    std::vector<Index> widths{observation_dim + pref_dim};
    widths.insert(widths.end(), config_.hidden.begin(), config_.hidden.end());
    widths.push_back(static_cast<Index>(num_actions) * pref_dim);
    online_ = nn::Mlp::kaiming(widths, 0.0, init_rng);
    target_ = online_;
    adam_ = nn::Adam({config_.learning_rate}, nn::block_sizes(online_));
  }

  const AgentConfig& config() const { return config_; }
  Index observation_dim() const { return observation_dim_; }
  Index pref_dim() const { return pref_dim_; }
  int num_actions() const { return num_actions_; }
  nn::Mlp& online() { return online_; }
  const nn::Mlp& online() const { return online_; }
  const nn::Mlp& target() const { return target_; }
  std::size_t updates() const { return adam_.steps(); }

  void sync_target() { target_ = online_; }

  /// d x |A| matrix; column a is Q(s, a, omega).
  Matrix q_values(const Vector& obs, const Vector& omega) const {
    require(obs.size() == observation_dim_ && omega.size() == pref_dim_, "q_values input shape mismatch");
    Vector input(observation_dim_ + pref_dim_);
    input << obs, omega;
    const Vector out = online_.forward(input);
    return Eigen::Map<const Matrix>(out.data(), pref_dim_, num_actions_);
  }

  /// argmax_a omega^T Q(s, a, omega), lowest index on ties.
  int greedy_action(const Vector& obs, const Vector& omega) const {
    const Vector scores = q_values(obs, omega).transpose() * omega;
    int best = 0;
    for (int a = 1; a < num_actions_; ++a)
      if (scores[a] > scores[best]) best = a;
    return best;
  }

  /// Epsilon-greedy: uniform action with probability epsilon, else greedy.
  int act(const Vector& obs, const Vector& omega, double epsilon, Rng& rng) const {
    if (epsilon > 0.0 && uniform01(rng) < epsilon)
      return std::uniform_int_distribution<int>(0, num_actions_ - 1)(rng);
    return greedy_action(obs, omega);
  }

  /// Envelope targets y_i = r_i + gamma * Q_tgt(s'_i, a*, w*) where (a*, w*)
  /// maximize omega_i^T Q_tgt(s'_i, a, w) over actions and the envelope
  /// preference set; terminal transitions keep only r_i.
  Matrix envelope_targets(const EnvelopeBatch& batch) const {
    const Index b = batch.rewards.cols();
    const Index n = batch.envelope_preferences.cols();
    const Index d = pref_dim_;
    require(batch.next_observations.cols() == b && batch.preferences.cols() == b, "batch column mismatch");
    require(batch.envelope_preferences.rows() == d && batch.preferences.rows() == d && batch.rewards.rows() == d,
            "batch preference/reward dimension mismatch");
    require(n > 0, "envelope preference set is empty");

    Matrix input(observation_dim_ + d, b * n);
    for (Index i = 0; i < b; ++i) {
      for (Index j = 0; j < n; ++j) {
        input.col(i * n + j) << batch.next_observations.col(i), batch.envelope_preferences.col(j);
      }
    }
    const Matrix q = target_.forward(input);  // (|A| d) x (b n)

    Matrix targets = batch.rewards;
    for (Index i = 0; i < b; ++i) {
      if (batch.terminal[static_cast<std::size_t>(i)]) continue;
      const Vector omega = batch.preferences.col(i);
      double best = -std::numeric_limits<double>::infinity();
      Index best_col = 0, best_action = 0;
      for (Index a = 0; a < num_actions_; ++a) {
        for (Index j = 0; j < n; ++j) {
          const double score = omega.dot(q.col(i * n + j).segment(a * d, d));
          if (score > best) {
            best = score;
            best_col = i * n + j;
            best_action = a;
          }
        }
      }
      targets.col(i) += config_.gamma * q.col(best_col).segment(best_action * d, d);
    }
    return targets;
  }

  /// L = (1 - lambda) mean ||y - Q||^2 + lambda mean |omega^T y - omega^T Q|,
  /// gradient with respect to the online network only.
  Gradient loss_and_gradient(const EnvelopeBatch& batch, const Matrix& targets, double lambda) const {
    const Index b = batch.rewards.cols();
    const Index d = pref_dim_;
    require(static_cast<Index>(batch.actions.size()) == b && targets.cols() == b, "batch size mismatch");
    Matrix input(observation_dim_ + d, b);
    input.topRows(observation_dim_) = batch.observations;
    input.bottomRows(d) = batch.preferences;
    nn::MlpCache cache;
    const Matrix out = online_.forward(input, cache, false, nullptr);
    Matrix upstream = Matrix::Zero(out.rows(), b);
    Gradient g;
    const double inv_b = 1.0 / static_cast<double>(b);
    for (Index i = 0; i < b; ++i) {
      const int a = batch.actions[static_cast<std::size_t>(i)];
      require(a >= 0 && a < num_actions_, "batch action out of range");
      const Vector q = out.col(i).segment(static_cast<Index>(a) * d, d);
      const Vector diff = q - targets.col(i);
      const Vector omega = batch.preferences.col(i);
      const double proj = omega.dot(diff);
      g.main_loss += diff.squaredNorm() * inv_b;
      g.aux_loss += std::abs(proj) * inv_b;
      const double sign = proj > 0.0 ? 1.0 : (proj < 0.0 ? -1.0 : 0.0);
      upstream.block(static_cast<Index>(a) * d, i, d, 1) =
          ((1.0 - lambda) * 2.0 * inv_b) * diff + (lambda * sign * inv_b) * omega;
    }
    g.loss = (1.0 - lambda) * g.main_loss + lambda * g.aux_loss;
    g.network = online_.backward(cache, upstream);
    return g;
  }

  /// One Adam step on the envelope loss. Non-finite targets skip the step.
  UpdateResult update(const EnvelopeBatch& batch, double lambda) {
    const Matrix targets = envelope_targets(batch);
    if (!targets.allFinite()) return {std::numeric_limits<double>::quiet_NaN(), false, "non-finite envelope target"};
    Gradient g = loss_and_gradient(batch, targets, lambda);
    if (!std::isfinite(g.loss)) return {g.loss, false, "non-finite envelope loss"};
    std::vector<nn::ParamBlock> blocks;
    nn::append_blocks(blocks, online_, g.network);
    try {
      adam_.step(blocks);
    } catch (const NumericError& e) {
      return {g.loss, false, e.what()};
    }
    return {g.loss, true, {}};
  }

  nlohmann::json checkpoint() const {
    return {{"online", nn::to_json(online_)}, {"target", nn::to_json(target_)}, {"optimizer", nn::to_json(adam_)}};
  }

  void restore(const nlohmann::json& state) {
    nn::Mlp online = nn::mlp_from_json(state.at("online"));
    if (online.widths() != online_.widths()) throw IoError("agent network shape mismatch");
    online_ = std::move(online);
    target_ = nn::mlp_from_json(state.at("target"));
    adam_ = nn::adam_from_json(state.at("optimizer"));
  }

 private:
  AgentConfig config_;
  Index observation_dim_;
  int num_actions_;
  Index pref_dim_;
  nn::Mlp online_;
  nn::Mlp target_;
  nn::Adam adam_;
};

// ---------------------------------------------------------------------------

struct ScalarizedSolution {
  std::vector<int> policy;
  double scalar_value = 0.0;   // scalarized value from the initial distribution
  Vector original_return;      // K-dim return of the policy in the original space
  std::vector<double> sweeps;  // sup-norm change of every value-iteration sweep
};

using RewardMap = std::function<Vector(const Vector&)>;

/// Solves max_pi E[sum gamma^t w^T f(r_t)] on a tabular MOMDP: value iteration
/// to a 1e-10 sup-norm change, greedy extraction (lowest action on ties), then
/// exact policy-iteration polishing so near-ties are resolved on exact values.
/// `f` defaults to the identity.
inline ScalarizedSolution tabular_scalarized_solve(const TabularMomdp& model, const Vector& weights,
                                                   const RewardMap& f = {}) {
  model.validate();
  const int s_count = model.num_states, a_count = model.num_actions;
  std::vector<double> scalar(static_cast<std::size_t>(s_count) * a_count);
  for (int s = 0; s < s_count; ++s) {
    for (int a = 0; a < a_count; ++a) {
      const Vector mapped = f ? f(model.reward(s, a)) : model.reward(s, a);
      require(mapped.size() == weights.size(), "weight dimension ", weights.size(), " does not match reward map output ",
              mapped.size());
      scalar[model.index(s, a)] = weights.dot(mapped);
    }
  }
  auto q_value = [&](const Vector& v, int s, int a) {
    return scalar[model.index(s, a)] + model.gamma * model.transition(s, a).dot(v);
  };
  auto greedy = [&](const Vector& v) {
    std::vector<int> policy(static_cast<std::size_t>(s_count), 0);
    for (int s = 0; s < s_count; ++s) {
      double best = q_value(v, s, 0);
      for (int a = 1; a < a_count; ++a) {
        const double q = q_value(v, s, a);
        if (q > best) {
          best = q;
          policy[static_cast<std::size_t>(s)] = a;
        }
      }
    }
    return policy;
  };

  ScalarizedSolution out;
  Vector v = Vector::Zero(s_count);
  for (int it = 0; it < 100000; ++it) {
    Vector next(s_count);
    for (int s = 0; s < s_count; ++s) {
      double best = q_value(v, s, 0);
      for (int a = 1; a < a_count; ++a) best = std::max(best, q_value(v, s, a));
      next[s] = best;
    }
    const double change = (next - v).cwiseAbs().maxCoeff();
    out.sweeps.push_back(change);
    v = std::move(next);
    if (change < 1e-10) break;
  }

  auto scalar_values = [&](const std::vector<int>& policy) {
    Matrix system = Matrix::Identity(s_count, s_count);
    Vector rhs(s_count);
    for (int s = 0; s < s_count; ++s) {
      const int a = policy[static_cast<std::size_t>(s)];
      system.row(s) -= model.gamma * model.transition(s, a).transpose();
      rhs[s] = scalar[model.index(s, a)];
    }
    return Vector(system.partialPivLu().solve(rhs));
  };

  std::vector<int> policy = greedy(v);
  for (int round = 0; round < 100; ++round) {
    const Vector exact = scalar_values(policy);
    std::vector<int> improved = policy;
    for (int s = 0; s < s_count; ++s) {
      double best = q_value(exact, s, 0);
      for (int a = 1; a < a_count; ++a) best = std::max(best, q_value(exact, s, a));
      const double tol = 1e-12 * std::max(1.0, std::abs(best));
      for (int a = 0; a < a_count; ++a) {
        if (q_value(exact, s, a) >= best - tol) {
          improved[static_cast<std::size_t>(s)] = a;
          break;
        }
      }
    }
    if (improved == policy) break;
    policy = std::move(improved);
  }

  out.policy = policy;
  out.scalar_value = scalar_values(policy).dot(model.initial_distribution);
  out.original_return = evaluate_policy(model, policy).initial;
  return out;
}

}  // namespace morl
