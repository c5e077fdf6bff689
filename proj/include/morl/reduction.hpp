#pragma once

// Online reward-dimension reducers. All of them observe K-dim rewards while
// the agent trains and map them to m-dim rewards for the value learner.
//
//   LearnedAffineReducer  f(r) = A r (+ b), A parameterized so it stays
//                         positive and row-stochastic, trained against a
//                         reconstruction network g(f(r)) ~ r.
//   IncrementalPcaReducer U^T (r - mu) from streamed mean/covariance.
//   NonnegativePcaReducer U^T (r - mu) with U = relu(P) trained by gradient
//                         ascent on tr(U^T C U) - beta ||U^T U - I||^2.
//   AutoencoderReducer    encoder/decoder MLP pair.

#include "morl/core.hpp"
#include "morl/linalg.hpp"
#include "morl/nn.hpp"

#include <json.hpp>

#include <cmath>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace morl {

struct UpdateResult {
  double loss = 0.0;
  bool applied = false;
  std::string error;
};

class Reducer {
 public:
  virtual ~Reducer() = default;

  virtual std::string name() const = 0;
  virtual Index source_dim() const = 0;
  virtual Index target_dim() const = 0;
  /// Environment steps between update() calls; 0 means never.
  virtual int update_interval() const = 0;

  /// Called once per environment step with the raw reward.
  virtual void observe(const Vector& /*reward*/) {}
  /// One training step on a batch of raw rewards (one per column).
  virtual UpdateResult update(const Matrix& batch, Rng& rng) = 0;
  /// Maps raw rewards (one per column) to reduced rewards.
  virtual Matrix transform(const Matrix& rewards) const = 0;

  Vector transform(const Vector& reward) const { return transform(Matrix(reward)).col(0); }

  /// The m x K linear part when the reducer is affine.
  virtual std::optional<Matrix> linear_map() const { return std::nullopt; }

  virtual nlohmann::json checkpoint() const = 0;
  virtual void restore(const nlohmann::json& state) = 0;

 protected:
  void check_rewards(const Matrix& rewards) const {
    require(rewards.rows() == source_dim(), name(), " expects ", source_dim(), "-dim rewards, got ", rewards.rows());
  }
};

// ---------------------------------------------------------------------------

class IdentityReducer final : public Reducer {
 public:
  explicit IdentityReducer(Index dim) : dim_(dim) {}
  std::string name() const override { return "none"; }
  Index source_dim() const override { return dim_; }
  Index target_dim() const override { return dim_; }
  int update_interval() const override { return 0; }
  UpdateResult update(const Matrix&, Rng&) override { return {}; }
  Matrix transform(const Matrix& rewards) const override {
    check_rewards(rewards);
    return rewards;
  }
  std::optional<Matrix> linear_map() const override { return Matrix::Identity(dim_, dim_); }
  nlohmann::json checkpoint() const override { return {{"kind", "none"}, {"dim", dim_}}; }
  void restore(const nlohmann::json&) override {}

 private:
  Index dim_;
};

// ---------------------------------------------------------------------------

struct LearnedAffineConfig {
  Index source_dim = 16;
  Index target_dim = 4;
  bool use_bias = false;        // "+bias"
  bool row_stochastic = true;   // "-rowst" clears this
  bool positive = true;         // "-positivity" clears this
  double dropout = 0.75;        // "-dropout" sets 0
  double learning_rate = 3e-4;
  int update_interval = 5;
  std::vector<Index> hidden{32, 32};
};

/// The learned reducer: A realized from free logits, reconstructor g trained
/// jointly to minimize mean ||r - g(A r + b)||^2.
class LearnedAffineReducer final : public Reducer {
 public:
  struct Gradient {
    double loss = 0.0;
    Matrix logits;
    Vector bias;
    nn::MlpGradients reconstructor;
  };

  LearnedAffineReducer(LearnedAffineConfig config, Rng& init_rng) : config_(std::move(config)) {
    const Index k = config_.source_dim, m = config_.target_dim;
    require(k > m && m >= 1, "reduction needs K > m >= 1 (K=", k, ", m=", m, ")");
    // Every mode starts from the uniform matrix with entries 1/K.
    if (config_.positive && config_.row_stochastic) logits_ = Matrix::Zero(m, k);
    else if (config_.positive) logits_ = Matrix::Constant(m, k, -std::log(static_cast<double>(k)));
    else if (config_.row_stochastic) logits_ = Matrix::Zero(m, k);
    else logits_ = Matrix::Constant(m, k, 1.0 / static_cast<double>(k));
    bias_ = Vector::Zero(m);
    std::vector<Index> widths{m};
    widths.insert(widths.end(), config_.hidden.begin(), config_.hidden.end());
    widths.push_back(k);
    reconstructor_ = nn::Mlp::kaiming(widths, config_.dropout, init_rng);
    auto sizes = nn::block_sizes(reconstructor_);
    sizes.push_back(logits_.size());
    if (config_.use_bias) sizes.push_back(bias_.size());
    adam_ = nn::Adam({config_.learning_rate}, sizes);
  }

  const LearnedAffineConfig& config() const { return config_; }
  std::string name() const override { return "ours"; }
  Index source_dim() const override { return config_.source_dim; }
  Index target_dim() const override { return config_.target_dim; }
  int update_interval() const override { return config_.update_interval; }

  const Matrix& logits() const { return logits_; }
  Matrix& logits() { return logits_; }
  const Vector& bias() const { return bias_; }
  Vector& bias() { return bias_; }
  nn::Mlp& reconstructor() { return reconstructor_; }
  const nn::Mlp& reconstructor() const { return reconstructor_; }

  /// Realized A under the configured parameterization.
  Matrix matrix() const {
    if (config_.positive && config_.row_stochastic) return nn::softmax_rows(logits_);
    if (config_.positive) return logits_.array().exp().matrix();
    if (config_.row_stochastic) {
      const Vector mean = logits_.rowwise().mean();
      return (logits_.colwise() - mean).array() + 1.0 / static_cast<double>(config_.source_dim);
    }
    return logits_;
  }

  std::optional<Matrix> linear_map() const override { return matrix(); }

  Matrix transform(const Matrix& rewards) const override {
    check_rewards(rewards);
    Matrix z = matrix() * rewards;
    if (config_.use_bias) z.colwise() += bias_;
    return z;
  }

  /// Reconstruction loss and its gradient. `dropout_rng` drives the dropout
  /// masks inside g; pass nullptr for the deterministic evaluation-mode loss.
  Gradient loss_and_gradient(const Matrix& batch, Rng* dropout_rng) const {
    check_rewards(batch);
    require(batch.cols() > 0, "empty reward batch");
    const Matrix a = matrix();
    Matrix z = a * batch;
    if (config_.use_bias) z.colwise() += bias_;
    nn::MlpCache cache;
    const Matrix recon = reconstructor_.forward(z, cache, dropout_rng != nullptr, dropout_rng);
    const Matrix diff = recon - batch;
    const double n = static_cast<double>(batch.cols());
    Gradient g;
    g.loss = diff.squaredNorm() / n;
    g.reconstructor = reconstructor_.backward(cache, (2.0 / n) * diff);
    const Matrix& dz = g.reconstructor.input;
    g.logits = logits_gradient(a, dz * batch.transpose());
    g.bias = config_.use_bias ? Vector(dz.rowwise().sum()) : Vector::Zero(bias_.size());
    return g;
  }

  /// One Adam step on (A logits, b, g). Non-finite losses skip the step.
  UpdateResult update(const Matrix& batch, Rng& rng) override {
    Gradient g = loss_and_gradient(batch, &rng);
    if (!std::isfinite(g.loss) || !g.logits.allFinite()) return {g.loss, false, "non-finite reconstruction loss"};
    std::vector<nn::ParamBlock> blocks;
    nn::append_blocks(blocks, reconstructor_, g.reconstructor);
    blocks.push_back({logits_.data(), g.logits.data(), logits_.size()});
    if (config_.use_bias) blocks.push_back({bias_.data(), g.bias.data(), bias_.size()});
    try {
      adam_.step(blocks);
    } catch (const NumericError& e) {
      return {g.loss, false, e.what()};
    }
    return {g.loss, true, {}};
  }

  nlohmann::json checkpoint() const override {
    return {{"kind", "ours"},
            {"matrix", nn::matrix_to_json(matrix())},
            {"logits", nn::matrix_to_json(logits_)},
            {"bias", nn::vector_to_json(bias_)},
            {"reconstructor", nn::to_json(reconstructor_)},
            {"optimizer", nn::to_json(adam_)}};
  }

  void restore(const nlohmann::json& state) override {
    Matrix logits = nn::matrix_from_json(state.at("logits"));
    if (logits.rows() != logits_.rows() || logits.cols() != logits_.cols()) throw IoError("logit shape mismatch");
    logits_ = std::move(logits);
    bias_ = nn::vector_from_json(state.at("bias"));
    reconstructor_ = nn::mlp_from_json(state.at("reconstructor"));
    adam_ = nn::adam_from_json(state.at("optimizer"));
  }

 private:
  Matrix logits_gradient(const Matrix& a, const Matrix& grad_a) const {
    if (config_.positive && config_.row_stochastic) return nn::softmax_rows_backward(a, grad_a);
    if (config_.positive) return grad_a.cwiseProduct(a);
    if (config_.row_stochastic) return grad_a.colwise() - Vector(grad_a.rowwise().mean());
    return grad_a;
  }

  LearnedAffineConfig config_;
  Matrix logits_;
  Vector bias_;
  nn::Mlp reconstructor_;
  nn::Adam adam_;
};

// ---------------------------------------------------------------------------

/// Streaming sample mean and covariance with the 1/t normalization:
///   mu_{t+1} = t/(t+1) mu_t + r/(t+1)
///   C_{t+1}  = t/(t+1) C_t + t/(t+1)^2 (r - mu_t)(r - mu_t)^T
/// plus an optional top-m eigenvector projection refreshed on demand.
class IncrementalPca {
 public:
  IncrementalPca(Index dim, Index components) : components_(components) {
    require(dim >= 1 && components >= 1 && components <= dim, "invalid PCA dimensions");
    mean_ = Vector::Zero(dim);
    cov_ = Matrix::Zero(dim, dim);
  }

  Index dim() const { return mean_.size(); }
  Index components() const { return components_; }
  std::size_t count() const { return count_; }
  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return cov_; }

  void observe(const Vector& r) {
    require(r.size() == dim(), "observed reward has wrong dimension");
    if (count_ == 0) {
      mean_ = r;
      cov_.setZero();
      count_ = 1;
      return;
    }
    const double t = static_cast<double>(count_);
    const Vector centered = r - mean_;
    cov_ = (t / (t + 1.0)) * cov_ + (t / ((t + 1.0) * (t + 1.0))) * (centered * centered.transpose());
    mean_ = (t / (t + 1.0)) * mean_ + (1.0 / (t + 1.0)) * r;
    ++count_;
  }

  /// Recomputes U from the current covariance. Returns false (keeping the
  /// previous U) when the eigensolver fails to converge.
  bool refresh() {
    require(count_ >= 2, "PCA refresh needs at least two observations");
    auto eig = jacobi_eigen(cov_);
    if (!eig) {
      std::cerr << "warning: PCA eigendecomposition did not converge; keeping previous projection\n";
      return false;
    }
    Matrix u = eig->vectors.leftCols(components_);
    canonicalize_signs(u);
    projection_ = std::move(u);
    eigenvalues_ = eig->values;
    return true;
  }

  bool has_projection() const { return projection_.has_value(); }
  const Matrix& projection() const {
    require(projection_.has_value(), "PCA projection requested before any refresh");
    return *projection_;
  }
  void set_projection(Matrix u) {
    require(u.rows() == dim() && u.cols() == components_, "projection shape mismatch");
    projection_ = std::move(u);
  }
  const Vector& eigenvalues() const { return eigenvalues_; }

  /// U^T (r - mu).
  Vector transform(const Vector& r) const {
    require(projection_.has_value(), "PCA transform before the first refresh");
    require(r.size() == dim(), "PCA transform dimension mismatch");
    return projection_->transpose() * (r - mean_);
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"count", count_}, {"mean", nn::vector_to_json(mean_)}, {"covariance", nn::matrix_to_json(cov_)}};
    if (projection_) j["projection"] = nn::matrix_to_json(*projection_);
    return j;
  }

  void from_json(const nlohmann::json& j) {
    count_ = j.at("count").get<std::size_t>();
    mean_ = nn::vector_from_json(j.at("mean"));
    cov_ = nn::matrix_from_json(j.at("covariance"));
    if (j.contains("projection")) projection_ = nn::matrix_from_json(j.at("projection"));
  }

 private:
  Index components_;
  std::size_t count_ = 0;
  Vector mean_;
  Matrix cov_;
  std::optional<Matrix> projection_;
  Vector eigenvalues_;
};

/// Smallest m whose top-m eigenvalues carry at least `threshold` of the
/// covariance trace. Negative eigenvalues from round-off count as zero.
inline int effective_rank(const Matrix& covariance, double threshold = 0.95) {
  require(threshold > 0.0 && threshold <= 1.0, "effective rank threshold must lie in (0, 1]");
  auto eig = jacobi_eigen(covariance);
  require(eig.has_value(), "eigendecomposition failed");
  const Vector values = eig->values.cwiseMax(0.0);
  const double trace = values.sum();
  if (trace <= 0.0) return 0;
  double acc = 0.0;
  for (Index i = 0; i < values.size(); ++i) {
    acc += values[i];
    if (acc >= threshold * trace * (1.0 - 1e-12)) return static_cast<int>(i + 1);
  }
  return static_cast<int>(values.size());
}

inline int effective_rank(const IncrementalPca& state, double threshold = 0.95) {
  require(state.count() >= 2, "effective rank needs at least two observations");
  return effective_rank(state.covariance(), threshold);
}

class IncrementalPcaReducer final : public Reducer {
 public:
  IncrementalPcaReducer(Index source_dim, Index target_dim, int refresh_interval = 20)
      : stats_(source_dim, target_dim), interval_(refresh_interval) {
    require(source_dim > target_dim, "reduction needs K > m");
    stats_.set_projection(Matrix::Constant(source_dim, target_dim, 1.0 / static_cast<double>(source_dim)));
  }

  std::string name() const override { return "ipca"; }
  Index source_dim() const override { return stats_.dim(); }
  Index target_dim() const override { return stats_.components(); }
  int update_interval() const override { return interval_; }
  const IncrementalPca& stats() const { return stats_; }

  void observe(const Vector& reward) override { stats_.observe(reward); }

  UpdateResult update(const Matrix&, Rng&) override {
    if (stats_.count() < 2) return {0.0, false, "not enough observations"};
    const bool ok = stats_.refresh();
    return {0.0, ok, ok ? "" : "eigendecomposition did not converge"};
  }

  Matrix transform(const Matrix& rewards) const override {
    check_rewards(rewards);
    return stats_.projection().transpose() * (rewards.colwise() - stats_.mean());
  }

  std::optional<Matrix> linear_map() const override { return Matrix(stats_.projection().transpose()); }

  nlohmann::json checkpoint() const override { return {{"kind", "ipca"}, {"state", stats_.to_json()}}; }
  void restore(const nlohmann::json& state) override { stats_.from_json(state.at("state")); }

 private:
  IncrementalPca stats_;
  int interval_;
};

// ---------------------------------------------------------------------------

struct NpcaConfig {
  Index source_dim = 16;
  Index target_dim = 4;
  double beta = 5e4;
  double learning_rate = 1e-4;
  int update_interval = 20;
};

/// Online non-negative PCA with U = relu(P).
class NonnegativePcaReducer final : public Reducer {
 public:
  explicit NonnegativePcaReducer(NpcaConfig config)
      : config_(config), stats_(config.source_dim, config.target_dim) {
    require(config_.source_dim > config_.target_dim && config_.target_dim >= 1, "reduction needs K > m >= 1");
    require(config_.beta >= 0.0, "beta must be nonnegative");
    params_ = Matrix::Constant(config_.source_dim, config_.target_dim, 1.0 / static_cast<double>(config_.source_dim));
    adam_ = nn::Adam({config_.learning_rate}, {params_.size()});
  }

  std::string name() const override { return "npca"; }
  Index source_dim() const override { return config_.source_dim; }
  Index target_dim() const override { return config_.target_dim; }
  int update_interval() const override { return config_.update_interval; }
  const NpcaConfig& config() const { return config_; }
  const IncrementalPca& stats() const { return stats_; }

  Matrix& parameters() { return params_; }
  const Matrix& parameters() const { return params_; }
  Matrix projection() const { return params_.cwiseMax(0.0); }

  /// tr(U^T C U) - beta ||U^T U - I||_F^2 at the current parameters.
  double objective(const Matrix& cov) const {
    const Matrix u = projection();
    const Matrix gram = u.transpose() * u - Matrix::Identity(u.cols(), u.cols());
    return (u.transpose() * cov * u).trace() - config_.beta * gram.squaredNorm();
  }

  /// d objective / d P (zero where the rectifier is inactive).
  Matrix objective_gradient(const Matrix& cov) const {
    const Matrix u = projection();
    const Matrix gram = u.transpose() * u - Matrix::Identity(u.cols(), u.cols());
    const Matrix sym = cov + cov.transpose();
    const Matrix du = sym * u - 4.0 * config_.beta * u * gram;
    return du.cwiseProduct((params_.array() > 0.0).cast<double>().matrix());
  }

  /// One Adam ascent step on the objective for covariance `cov`.
  UpdateResult ascend(const Matrix& cov) {
    require(cov.rows() == source_dim() && cov.cols() == source_dim(), "covariance shape mismatch");
    const double value = objective(cov);
    if (!std::isfinite(value)) return {value, false, "non-finite NPCA objective"};
    const Matrix descent = -objective_gradient(cov);
    const nn::ParamBlock block{params_.data(), descent.data(), params_.size()};
    try {
      adam_.step(std::span<const nn::ParamBlock>(&block, 1));
    } catch (const NumericError& e) {
      return {value, false, e.what()};
    }
    return {value, true, {}};
  }

  void observe(const Vector& reward) override { stats_.observe(reward); }

  UpdateResult update(const Matrix&, Rng&) override {
    if (stats_.count() < 2) return {0.0, false, "not enough observations"};
    return ascend(stats_.covariance());
  }

  Matrix transform(const Matrix& rewards) const override {
    check_rewards(rewards);
    return projection().transpose() * (rewards.colwise() - stats_.mean());
  }

  std::optional<Matrix> linear_map() const override { return Matrix(projection().transpose()); }

  nlohmann::json checkpoint() const override {
    return {{"kind", "npca"},
            {"projection", nn::matrix_to_json(projection())},
            {"parameters", nn::matrix_to_json(params_)},
            {"state", stats_.to_json()},
            {"optimizer", nn::to_json(adam_)}};
  }

  void restore(const nlohmann::json& state) override {
    params_ = nn::matrix_from_json(state.at("parameters"));
    stats_.from_json(state.at("state"));
    adam_ = nn::adam_from_json(state.at("optimizer"));
  }

 private:
  NpcaConfig config_;
  IncrementalPca stats_;
  Matrix params_;
  nn::Adam adam_;
};

// ---------------------------------------------------------------------------

struct AutoencoderConfig {
  Index source_dim = 16;
  Index target_dim = 4;
  double learning_rate = 1e-4;
  int update_interval = 20;
  std::vector<Index> hidden{32, 32};
};

class AutoencoderReducer final : public Reducer {
 public:
  struct Gradient {
    double loss = 0.0;
    nn::MlpGradients encoder;
    nn::MlpGradients decoder;
  };

  AutoencoderReducer(AutoencoderConfig config, Rng& init_rng) : config_(std::move(config)) {
    require(config_.source_dim > config_.target_dim && config_.target_dim >= 1, "reduction needs K > m >= 1");
    std::vector<Index> enc{config_.source_dim}, dec{config_.target_dim};
    enc.insert(enc.end(), config_.hidden.begin(), config_.hidden.end());
    dec.insert(dec.end(), config_.hidden.begin(), config_.hidden.end());
    enc.push_back(config_.target_dim);
    dec.push_back(config_.source_dim);
    encoder_ = nn::Mlp::kaiming(enc, 0.0, init_rng);
    decoder_ = nn::Mlp::kaiming(dec, 0.0, init_rng);
    auto sizes = nn::block_sizes(encoder_);
    auto dsizes = nn::block_sizes(decoder_);
    sizes.insert(sizes.end(), dsizes.begin(), dsizes.end());
    adam_ = nn::Adam({config_.learning_rate}, sizes);
  }

  std::string name() const override { return "ae"; }
  Index source_dim() const override { return config_.source_dim; }
  Index target_dim() const override { return config_.target_dim; }
  int update_interval() const override { return config_.update_interval; }
  nn::Mlp& encoder() { return encoder_; }
  nn::Mlp& decoder() { return decoder_; }

  Matrix transform(const Matrix& rewards) const override {
    check_rewards(rewards);
    return encoder_.forward(rewards);
  }

  Gradient loss_and_gradient(const Matrix& batch) const {
    check_rewards(batch);
    require(batch.cols() > 0, "empty reward batch");
    nn::MlpCache enc_cache, dec_cache;
    const Matrix code = encoder_.forward(batch, enc_cache, true, nullptr);
    const Matrix recon = decoder_.forward(code, dec_cache, true, nullptr);
    const Matrix diff = recon - batch;
    const double n = static_cast<double>(batch.cols());
    Gradient g;
    g.loss = diff.squaredNorm() / n;
    g.decoder = decoder_.backward(dec_cache, (2.0 / n) * diff);
    g.encoder = encoder_.backward(enc_cache, g.decoder.input);
    return g;
  }

  UpdateResult update(const Matrix& batch, Rng&) override {
    Gradient g = loss_and_gradient(batch);
    if (!std::isfinite(g.loss)) return {g.loss, false, "non-finite reconstruction loss"};
    std::vector<nn::ParamBlock> blocks;
    nn::append_blocks(blocks, encoder_, g.encoder);
    nn::append_blocks(blocks, decoder_, g.decoder);
    try {
      adam_.step(blocks);
    } catch (const NumericError& e) {
      return {g.loss, false, e.what()};
    }
    return {g.loss, true, {}};
  }

  nlohmann::json checkpoint() const override {
    return {{"kind", "ae"},
            {"encoder", nn::to_json(encoder_)},
            {"decoder", nn::to_json(decoder_)},
            {"optimizer", nn::to_json(adam_)}};
  }

  void restore(const nlohmann::json& state) override {
    encoder_ = nn::mlp_from_json(state.at("encoder"));
    decoder_ = nn::mlp_from_json(state.at("decoder"));
    adam_ = nn::adam_from_json(state.at("optimizer"));
  }

 private:
  AutoencoderConfig config_;
  nn::Mlp encoder_;
  nn::Mlp decoder_;
  nn::Adam adam_;
};

}  // namespace morl
