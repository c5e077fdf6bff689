#pragma once

// Exhaustive ground truth on tiny MOMDPs: every deterministic stationary
// policy is evaluated exactly, giving exact fronts, CCS subsets, and a direct
// check that scalarized optima of reduced rewards stay Pareto optimal.

#include "morl/agent.hpp"
#include "morl/core.hpp"
#include "morl/metrics.hpp"
#include "morl/momdp.hpp"
#include "morl/nn.hpp"

#include <json.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace morl {

using PolicyTable = std::vector<int>;

struct PolicyReturn {
  PolicyTable policy;
  Vector value;
};

inline constexpr double kMaxEnumeratedPolicies = 1e5;

/// Every deterministic stationary policy with its exact return from mu0.
/// Policies are listed in mixed-radix order with state 0 most significant.
inline std::vector<PolicyReturn> enumerate_returns(const TabularMomdp& model) {
  model.validate();
  const double count = std::pow(static_cast<double>(model.num_actions), model.num_states);
  require(count <= kMaxEnumeratedPolicies, "policy enumeration would visit ", count, " policies (limit 1e5)");
  std::vector<PolicyReturn> out;
  out.reserve(static_cast<std::size_t>(count));
  PolicyTable policy(static_cast<std::size_t>(model.num_states), 0);
  for (;;) {
    out.push_back({policy, evaluate_policy(model, policy).initial});
    int s = model.num_states - 1;
    while (s >= 0 && ++policy[static_cast<std::size_t>(s)] == model.num_actions) {
      policy[static_cast<std::size_t>(s)] = 0;
      --s;
    }
    if (s < 0) break;
  }
  return out;
}

/// Pareto front of the deterministic stationary policy class.
inline ParetoSet exact_pareto_front(const TabularMomdp& model) {
  std::vector<Vector> values;
  for (auto& pr : enumerate_returns(model)) values.push_back(std::move(pr.value));
  return pareto_filter(values);
}

/// Front points that attain max w^T J for at least one grid weight. All
/// maximizers within a 1e-12 relative tie band are kept.
inline ParetoSet exact_ccs(const ParetoSet& front, const std::vector<Vector>& weight_grid) {
  require(!front.empty(), "CCS of an empty front");
  std::vector<bool> selected(front.size(), false);
  for (const auto& w : weight_grid) {
    require(w.size() == front.dim(), "weight dimension does not match front");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : front.points()) best = std::max(best, w.dot(p));
    const double tol = 1e-12 * std::max(1.0, std::abs(best));
    for (std::size_t i = 0; i < front.size(); ++i)
      if (w.dot(front.points()[i]) >= best - tol) selected[i] = true;
  }
  std::vector<Vector> kept;
  std::vector<std::optional<Vector>> tags;
  for (std::size_t i = 0; i < front.size(); ++i) {
    if (!selected[i]) continue;
    kept.push_back(front.points()[i]);
    tags.push_back(front.provenance()[i]);
  }
  return pareto_filter(kept, tags);
}

struct Theorem1Failure {
  std::size_t instance = 0;
  Vector preference;
  PolicyTable policy;
  Vector original_return;
};

struct Theorem1Verdict {
  std::size_t instances = 0;
  std::size_t checks = 0;
  std::vector<Theorem1Failure> failures;

  bool passed() const { return failures.empty(); }

  void merge(const Theorem1Verdict& other) {
    for (auto f : other.failures) {
      f.instance += instances;
      failures.push_back(std::move(f));
    }
    instances += other.instances;
    checks += other.checks;
  }
};

inline constexpr double kFrontMembershipTolerance = 1e-8;

/// For each reduced preference w_m: solve the tabular problem with scalar
/// reward w_m^T (A r + b), then check that the policy's ORIGINAL return is a
/// member of the exact front (max-norm tolerance 1e-8).
inline Theorem1Verdict verify_theorem1(const TabularMomdp& model, const Matrix& a,
                                       const std::vector<Vector>& weight_grid, const Vector& bias = Vector()) {
  require(a.cols() == model.num_objectives, "reduction matrix has ", a.cols(), " columns, MOMDP has K=",
          model.num_objectives);
  require(bias.size() == 0 || bias.size() == a.rows(), "bias length must match reduction rows");
  const ParetoSet front = exact_pareto_front(model);
  const RewardMap f = [&](const Vector& r) -> Vector {
    Vector z = a * r;
    if (bias.size()) z += bias;
    return z;
  };
  Theorem1Verdict verdict;
  verdict.instances = 1;
  for (const auto& w : weight_grid) {
    require(w.size() == a.rows(), "preference dimension must equal reduction rows");
    const ScalarizedSolution sol = tabular_scalarized_solve(model, w, f);
    ++verdict.checks;
    if (!front.contains(sol.original_return, kFrontMembershipTolerance))
      verdict.failures.push_back({0, w, sol.policy, sol.original_return});
  }
  return verdict;
}

// ---------------------------------------------------------------------------
// Random matrix families for the Theorem 1 suite.

enum class MatrixFamily {
  PositiveRowStochastic,  // softmax of Gaussian logits
  SignedRowStochastic,    // rows sum to 1, entries of mixed sign
};

inline Matrix random_reduction_matrix(MatrixFamily family, Index m, Index k, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(m, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < m; ++i) z(i, j) = normal(rng);
  if (family == MatrixFamily::PositiveRowStochastic) return nn::softmax_rows(2.0 * z);
  const Vector mean = z.rowwise().mean();
  return (z.colwise() - mean).array() + 1.0 / static_cast<double>(k);
}

/// Reduced-preference grid with exactly 21 points for m = 2 (20 divisions)
/// and m = 3 (5 divisions); other m use 4 divisions.
inline std::vector<Vector> theorem1_weight_grid(Index m) {
  const int divisions = m == 2 ? 20 : (m == 3 ? 5 : 4);
  return equidistant_simplex_points(static_cast<int>(m), divisions);
}

struct Theorem1SuiteConfig {
  std::size_t instances = 200;
  std::uint64_t seed = 1;
  MatrixFamily family = MatrixFamily::PositiveRowStochastic;
  int max_states = 4;
  int max_actions = 3;
  double gamma = 0.9;
};

/// Random (MOMDP, A) pairs with S in [2, max_states], A in [2, max_actions],
/// K in {3, 4, 5}, m in {2, 3}, m < K.
inline Theorem1Verdict run_theorem1_suite(const Theorem1SuiteConfig& config) {
  Rng rng = make_rng(config.seed, 0x74686d31ULL);
  Theorem1Verdict total;
  for (std::size_t i = 0; i < config.instances; ++i) {
    const int states = std::uniform_int_distribution<int>(2, config.max_states)(rng);
    const int actions = std::uniform_int_distribution<int>(2, config.max_actions)(rng);
    const Index k = std::uniform_int_distribution<int>(3, 5)(rng);
    const Index m = std::uniform_int_distribution<int>(2, 3)(rng);
    const std::uint64_t instance_seed = rng();
    const TabularMomdp model = make_random_tabular_momdp(instance_seed, states, actions, k, config.gamma);
    const Matrix a = random_reduction_matrix(config.family, m, k, rng);
    total.merge(verify_theorem1(model, a, theorem1_weight_grid(m)));
  }
  return total;
}

inline nlohmann::json to_json(const Theorem1Verdict& verdict) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : verdict.failures) {
    failures.push_back({{"instance", f.instance},
                        {"preference", to_std(f.preference)},
                        {"policy", f.policy},
                        {"original_return", to_std(f.original_return)}});
  }
  return {{"instances", verdict.instances}, {"checks", verdict.checks}, {"failures", std::move(failures)}};
}

}  // namespace morl
