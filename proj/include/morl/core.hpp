#pragma once

// Shared vocabulary for the morl headers: dense types, error classes,
// seeded random streams and simplex helpers.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace morl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Caller violated a documented precondition (bad shape, bad argument, misuse).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A computation produced a non-finite value; the guarded state is unchanged.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem or parse failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename... Args>
std::string concat(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

}  // namespace detail

template <typename... Args>
inline void require(bool condition, Args&&... message) {
  if (!condition) throw UsageError(detail::concat(std::forward<Args>(message)...));
}

using Rng = std::mt19937_64;

/// Derives an independent stream from a base seed and a stream label so that
/// env, agent, replay and reducer randomness never share state.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x6d6f726cU};
  return Rng(seq);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

/// Flat Dirichlet(alpha, ..., alpha) draw via normalized gamma variates.
inline Vector sample_dirichlet(Index dim, double alpha, Rng& rng) {
  require(dim >= 1, "dirichlet dimension must be positive");
  std::gamma_distribution<double> gamma(alpha, 1.0);
  Vector v(dim);
  double total = 0.0;
  do {
    for (Index i = 0; i < dim; ++i) v[i] = gamma(rng);
    total = v.sum();
  } while (total <= 0.0);
  return v / total;
}

inline bool on_simplex(const Vector& w, double tol = 1e-9) {
  return w.size() > 0 && (w.array() >= -tol).all() && std::abs(w.sum() - 1.0) <= tol;
}

/// A point of the probability simplex used to weight objectives.
class Preference {
 public:
  explicit Preference(Vector weights) : weights_(std::move(weights)) {
    require(weights_.size() >= 1, "preference must be nonempty");
    require(on_simplex(weights_), "preference must be nonnegative and sum to 1");
  }

  const Vector& weights() const { return weights_; }
  Index dim() const { return weights_.size(); }
  double operator[](Index i) const { return weights_[i]; }

 private:
  Vector weights_;
};

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline Vector from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace morl
