#pragma once

// Minimal neural substrate: rectifier MLPs with inverted dropout and
// hand-written reverse mode, row-softmax matrices, and Adam.

#include "morl/core.hpp"

#include <json.hpp>

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace morl::nn {

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

/// Activations recorded by a forward pass; consumed by Mlp::backward.
struct MlpCache {
  std::vector<Matrix> inputs;  // input fed to each dense layer
  std::vector<Matrix> pre;     // pre-activation of each hidden layer
  std::vector<Matrix> masks;   // scaled dropout masks, empty when dropout was off
  bool valid = false;
};

struct MlpGradients {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;
  Matrix input;
};

/// Dense network: affine -> rectifier (-> dropout) for each hidden layer and a
/// final affine output. Batches are column-major: one sample per column.
class Mlp {
 public:
  Mlp() = default;

  /// Zero-initialized network with the given layer widths (input first).
  explicit Mlp(std::vector<Index> widths, double dropout = 0.0) : widths_(std::move(widths)), dropout_(dropout) {
    require(widths_.size() >= 2, "an MLP needs at least input and output widths");
    require(dropout_ >= 0.0 && dropout_ < 1.0, "dropout rate must lie in [0, 1)");
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      require(widths_[l] > 0 && widths_[l + 1] > 0, "layer widths must be positive");
      layers_.push_back({Matrix::Zero(widths_[l + 1], widths_[l]), Vector::Zero(widths_[l + 1])});
    }
  }

  /// Uniform fan-in initialization: bound sqrt(6/fan_in) before rectifiers,
  /// 1/sqrt(fan_in) on the output layer. Biases start at zero.
  static Mlp kaiming(std::vector<Index> widths, double dropout, Rng& rng) {
    Mlp net(std::move(widths), dropout);
    for (std::size_t l = 0; l < net.layers_.size(); ++l) {
      auto& layer = net.layers_[l];
      const double fan_in = static_cast<double>(layer.weight.cols());
      const bool hidden = l + 1 < net.layers_.size();
      const double bound = hidden ? std::sqrt(6.0 / fan_in) : 1.0 / std::sqrt(fan_in);
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (Index j = 0; j < layer.weight.cols(); ++j)
        for (Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = dist(rng);
    }
    return net;
  }

  const std::vector<Index>& widths() const { return widths_; }
  Index input_dim() const { return widths_.front(); }
  Index output_dim() const { return widths_.back(); }
  double dropout() const { return dropout_; }
  void set_dropout(double p) {
    require(p >= 0.0 && p < 1.0, "dropout rate must lie in [0, 1)");
    dropout_ = p;
  }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  Index num_parameters() const {
    Index n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
  }

  /// Evaluation-mode forward pass; pure.
  Matrix forward(const Matrix& x) const {
    check_input(x);
    Matrix h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Matrix z = (layers_[l].weight * h).colwise() + layers_[l].bias;
      if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
      h = std::move(z);
    }
    return h;
  }

  Vector forward(const Vector& x) const { return forward(Matrix(x)).col(0); }

  /// Forward pass that records a cache for backward. Dropout is applied only
  /// when `training` is set and the rate is positive, in which case `rng` is required.
  Matrix forward(const Matrix& x, MlpCache& cache, bool training, Rng* rng) const {
    check_input(x);
    const bool drop = training && dropout_ > 0.0;
    require(!drop || rng != nullptr, "dropout in training mode needs an rng");
    cache = MlpCache{};
    Matrix h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      cache.inputs.push_back(h);
      Matrix z = (layers_[l].weight * h).colwise() + layers_[l].bias;
      if (l + 1 == layers_.size()) {
        h = std::move(z);
        break;
      }
      cache.pre.push_back(z);
      h = z.cwiseMax(0.0);
      if (drop) {
        const double keep = 1.0 - dropout_;
        std::bernoulli_distribution bern(keep);
        Matrix mask(h.rows(), h.cols());
        for (Index j = 0; j < mask.cols(); ++j)
          for (Index i = 0; i < mask.rows(); ++i) mask(i, j) = bern(*rng) ? 1.0 / keep : 0.0;
        h = h.cwiseProduct(mask);
        cache.masks.push_back(std::move(mask));
      }
    }
    cache.valid = true;
    return h;
  }

  /// Reverse-mode gradients of sum(upstream .* output) for the cached batch.
  MlpGradients backward(const MlpCache& cache, const Matrix& upstream) const {
    require(cache.valid && cache.inputs.size() == layers_.size(), "backward called without a matching forward cache");
    require(upstream.rows() == output_dim() && upstream.cols() == cache.inputs.front().cols(),
            "upstream gradient shape mismatch");
    MlpGradients g;
    g.weight.resize(layers_.size());
    g.bias.resize(layers_.size());
    Matrix delta = upstream;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      g.weight[l] = delta * cache.inputs[l].transpose();
      g.bias[l] = delta.rowwise().sum();
      Matrix down = layers_[l].weight.transpose() * delta;
      if (l == 0) {
        g.input = std::move(down);
        break;
      }
      if (!cache.masks.empty()) down = down.cwiseProduct(cache.masks[l - 1]);
      delta = down.cwiseProduct((cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
    return g;
  }

  MlpGradients zero_gradients() const {
    MlpGradients g;
    for (const auto& l : layers_) {
      g.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
      g.bias.push_back(Vector::Zero(l.bias.size()));
    }
    return g;
  }

 private:
  void check_input(const Matrix& x) const {
    require(!layers_.empty(), "forward on an empty network");
    require(x.rows() == input_dim(), "input has ", x.rows(), " rows, network expects ", input_dim());
  }

  std::vector<Index> widths_;
  double dropout_ = 0.0;
  std::vector<DenseLayer> layers_;
};

// ---------------------------------------------------------------------------
// Row softmax

/// Row-wise softmax with max-shift; every entry of the result is positive
/// for finite logits and every row sums to 1.
inline Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double shift = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - shift).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

/// Pulls dL/dA back through A = softmax_rows(logits).
inline Matrix softmax_rows_backward(const Matrix& realized, const Matrix& grad_realized) {
  Matrix out(realized.rows(), realized.cols());
  for (Index i = 0; i < realized.rows(); ++i) {
    const double inner = realized.row(i).dot(grad_realized.row(i));
    out.row(i) = realized.row(i).cwiseProduct((grad_realized.row(i).array() - inner).matrix());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// A contiguous parameter tensor paired with its gradient.
struct ParamBlock {
  double* value;
  const double* grad;
  Index size;
};

class Adam {
 public:
  Adam() = default;
  Adam(AdamConfig config, const std::vector<Index>& block_sizes) : config_(config) {
    for (Index n : block_sizes) {
      first_.push_back(Vector::Zero(n));
      second_.push_back(Vector::Zero(n));
    }
  }

  /// Bias-corrected Adam update. Throws NumericError, touching nothing, if
  /// any gradient is non-finite.
  void step(std::span<const ParamBlock> blocks) {
    require(blocks.size() == first_.size(), "Adam got ", blocks.size(), " blocks, expected ", first_.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      require(blocks[b].size == first_[b].size(), "Adam block ", b, " changed shape");
      if (!Eigen::Map<const Vector>(blocks[b].grad, blocks[b].size).allFinite())
        throw NumericError("non-finite gradient in Adam step");
    }
    ++steps_;
    const double t = static_cast<double>(steps_);
    const double c1 = 1.0 - std::pow(config_.beta1, t);
    const double c2 = 1.0 - std::pow(config_.beta2, t);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      Eigen::Map<Vector> value(blocks[b].value, blocks[b].size);
      Eigen::Map<const Vector> grad(blocks[b].grad, blocks[b].size);
      first_[b] = config_.beta1 * first_[b] + (1.0 - config_.beta1) * grad;
      second_[b] = config_.beta2 * second_[b] + (1.0 - config_.beta2) * grad.cwiseProduct(grad);
      value.array() -= config_.learning_rate * (first_[b].array() / c1) /
                       ((second_[b].array() / c2).sqrt() + config_.epsilon);
    }
  }

  const AdamConfig& config() const { return config_; }
  std::size_t steps() const { return steps_; }
  const std::vector<Vector>& first_moments() const { return first_; }
  const std::vector<Vector>& second_moments() const { return second_; }

  void restore(std::vector<Vector> first, std::vector<Vector> second, std::size_t steps) {
    require(first.size() == first_.size() && second.size() == second_.size(), "Adam restore shape mismatch");
    first_ = std::move(first);
    second_ = std::move(second);
    steps_ = steps;
  }

 private:
  AdamConfig config_{};
  std::vector<Vector> first_;
  std::vector<Vector> second_;
  std::size_t steps_ = 0;
};

inline std::vector<Index> block_sizes(const Mlp& net) {
  std::vector<Index> sizes;
  for (const auto& l : net.layers()) {
    sizes.push_back(l.weight.size());
    sizes.push_back(l.bias.size());
  }
  return sizes;
}

inline void append_blocks(std::vector<ParamBlock>& out, Mlp& net, const MlpGradients& grads) {
  auto& layers = net.layers();
  require(grads.weight.size() == layers.size(), "gradient layout does not match network");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    out.push_back({layers[l].weight.data(), grads.weight[l].data(), layers[l].weight.size()});
    out.push_back({layers[l].bias.data(), grads.bias[l].data(), layers[l].bias.size()});
  }
}

// ---------------------------------------------------------------------------
// JSON serialization. Matrices are stored row-major as nested arrays.

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const Index rows = static_cast<Index>(j.size());
  const Index cols = rows ? static_cast<Index>(j.at(0).size()) : 0;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (static_cast<Index>(j.at(i).size()) != cols) throw IoError("ragged matrix in JSON");
    for (Index c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
  }
  return m;
}

inline nlohmann::json vector_to_json(const Vector& v) { return to_std(v); }
inline Vector vector_from_json(const nlohmann::json& j) { return from_std(j.get<std::vector<double>>()); }

inline nlohmann::json to_json(const Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    layers.push_back({{"name", "dense" + std::to_string(l)},
                      {"weight", matrix_to_json(net.layers()[l].weight)},
                      {"bias", vector_to_json(net.layers()[l].bias)}});
  }
  return {{"widths", net.widths()}, {"dropout", net.dropout()}, {"layers", std::move(layers)}};
}

inline Mlp mlp_from_json(const nlohmann::json& j) {
  Mlp net(j.at("widths").get<std::vector<Index>>(), j.at("dropout").get<double>());
  const auto& layers = j.at("layers");
  if (layers.size() != net.layers().size()) throw IoError("layer count mismatch in network JSON");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix w = matrix_from_json(layers[l].at("weight"));
    Vector b = vector_from_json(layers[l].at("bias"));
    auto& dst = net.layers()[l];
    if (w.rows() != dst.weight.rows() || w.cols() != dst.weight.cols() || b.size() != dst.bias.size())
      throw IoError("layer shape mismatch in network JSON");
    dst.weight = std::move(w);
    dst.bias = std::move(b);
  }
  return net;
}

inline nlohmann::json to_json(const Adam& adam) {
  nlohmann::json first = nlohmann::json::array(), second = nlohmann::json::array();
  for (const auto& v : adam.first_moments()) first.push_back(vector_to_json(v));
  for (const auto& v : adam.second_moments()) second.push_back(vector_to_json(v));
  const auto& c = adam.config();
  return {{"learning_rate", c.learning_rate}, {"beta1", c.beta1}, {"beta2", c.beta2}, {"epsilon", c.epsilon},
          {"steps", adam.steps()}, {"first", std::move(first)}, {"second", std::move(second)}};
}

inline Adam adam_from_json(const nlohmann::json& j) {
  AdamConfig c{j.at("learning_rate").get<double>(), j.at("beta1").get<double>(), j.at("beta2").get<double>(),
               j.at("epsilon").get<double>()};
  std::vector<Vector> first, second;
  std::vector<Index> sizes;
  for (const auto& v : j.at("first")) {
    first.push_back(vector_from_json(v));
    sizes.push_back(first.back().size());
  }
  for (const auto& v : j.at("second")) second.push_back(vector_from_json(v));
  Adam adam(c, sizes);
  adam.restore(std::move(first), std::move(second), j.at("steps").get<std::size_t>());
  return adam;
}

}  // namespace morl::nn
