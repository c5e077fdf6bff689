#pragma once

#include "morl/core.hpp"

#include <functional>
#include <vector>

namespace morl::testing {

/// Central finite differences of `f` with respect to `n` parameters stored at
/// `params`. Parameters are restored afterwards.
inline std::vector<double> numeric_gradient(const std::function<double()>& f, double* params, Index n,
                                            double h = 1e-5) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = f();
    params[i] = keep - h;
    const double down = f();
    params[i] = keep;
    g[static_cast<std::size_t>(i)] = (up - down) / (2 * h);
  }
  return g;
}

/// ||a - b|| / (||a|| + ||b||), the usual gradient-check ratio.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(na) + std::sqrt(nb);
  return denom < 1e-300 ? 0.0 : std::sqrt(diff) / denom;
}

inline std::vector<double> flatten(const Matrix& m) { return {m.data(), m.data() + m.size()}; }

inline void append(std::vector<double>& out, const Matrix& m) { out.insert(out.end(), m.data(), m.data() + m.size()); }

}  // namespace morl::testing
