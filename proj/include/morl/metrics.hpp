#pragma once

// Exact multi-objective evaluation: dominance, non-dominated filtering,
// hypervolume, sparsity, expected utility and simplex lattices.

#include "morl/core.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace morl {

/// u >_P v: u is at least as good everywhere and strictly better somewhere.
inline bool pareto_dominates(const Vector& u, const Vector& v) {
  require(u.size() == v.size(), "dominance check on mismatched dimensions ", u.size(), " vs ", v.size());
  bool strict = false;
  for (Index i = 0; i < u.size(); ++i) {
    if (u[i] < v[i]) return false;
    if (u[i] > v[i]) strict = true;
  }
  return strict;
}

/// Mutually non-dominated points with an optional provenance tag per point
/// (the preference that produced it). Only pareto_filter builds one.
class ParetoSet {
 public:
  ParetoSet() = default;

  const std::vector<Vector>& points() const { return points_; }
  const std::vector<std::optional<Vector>>& provenance() const { return provenance_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  Index dim() const { return points_.empty() ? 0 : points_.front().size(); }

  /// True if some member is within `tol` (max-norm) of `x`.
  bool contains(const Vector& x, double tol) const {
    for (const auto& p : points_)
      if (p.size() == x.size() && (p - x).cwiseAbs().maxCoeff() <= tol) return true;
    return false;
  }

 private:
  friend ParetoSet pareto_filter(const std::vector<Vector>&, const std::vector<std::optional<Vector>>&);
  std::vector<Vector> points_;
  std::vector<std::optional<Vector>> provenance_;
};

/// Keeps exactly the undominated points; exact duplicates collapse onto the
/// first occurrence. Input order is preserved among survivors.
inline ParetoSet pareto_filter(const std::vector<Vector>& points,
                               const std::vector<std::optional<Vector>>& provenance = {}) {
  require(!points.empty(), "pareto_filter needs at least one point");
  require(provenance.empty() || provenance.size() == points.size(), "provenance must align with points");
  const Index dim = points.front().size();
  for (const auto& p : points) require(p.size() == dim, "pareto_filter on mixed dimensions");

  ParetoSet out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < points.size() && keep; ++j) {
      if (i == j) continue;
      if (pareto_dominates(points[j], points[i])) keep = false;
      else if (j < i && points[j] == points[i]) keep = false;
    }
    if (keep) {
      out.points_.push_back(points[i]);
      out.provenance_.push_back(provenance.empty() ? std::nullopt : provenance[i]);
    }
  }
  return out;
}

inline ParetoSet pareto_filter(const ParetoSet& set) { return pareto_filter(set.points(), set.provenance()); }

namespace detail {

// Boxes are anchored at the origin after translating by the reference point;
// every coordinate is strictly positive here.
inline double hv_2d(std::vector<Vector> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vector& a, const Vector& b) { return a[0] > b[0]; });
  double volume = 0.0, best_y = 0.0;
  for (const auto& p : pts) {
    if (p[1] > best_y) {
      volume += p[0] * (p[1] - best_y);
      best_y = p[1];
    }
  }
  return volume;
}

inline std::vector<Vector> nondominated_weak(const std::vector<Vector>& pts) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < pts.size() && keep; ++j) {
      if (i == j) continue;
      const bool geq = (pts[j].array() >= pts[i].array()).all();
      if (geq && (pts[j] != pts[i] || j < i)) keep = false;
    }
    if (keep) out.push_back(pts[i]);
  }
  return out;
}

// Exclusive-contribution recursion: HV(S) = sum_i [vol(p_i) - HV(limit_i)],
// where limit_i clips the later points to p_i's box. Points are sorted by the
// last coordinate so the limit sets shrink quickly.
inline double hv_recursive(std::vector<Vector> pts) {
  if (pts.empty()) return 0.0;
  if (pts.size() == 1) return pts.front().prod();
  if (pts.front().size() == 2) return hv_2d(std::move(pts));
  const Index last = pts.front().size() - 1;
  std::sort(pts.begin(), pts.end(), [last](const Vector& a, const Vector& b) { return a[last] > b[last]; });
  double volume = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<Vector> limited;
    limited.reserve(pts.size() - i - 1);
    for (std::size_t j = i + 1; j < pts.size(); ++j) limited.push_back(pts[j].cwiseMin(pts[i]));
    volume += pts[i].prod() - hv_recursive(nondominated_weak(std::move(limited)));
  }
  return volume;
}

}  // namespace detail

/// Lebesgue measure of the union of boxes [ref, x_i]. Points that do not
/// strictly dominate the reference in every coordinate add nothing.
inline double hypervolume(const std::vector<Vector>& points, const Vector& ref) {
  require(ref.size() >= 1, "reference point must be nonempty");
  std::vector<Vector> shifted;
  for (const auto& p : points) {
    require(p.size() == ref.size(), "hypervolume point/reference dimension mismatch");
    Vector d = p - ref;
    if ((d.array() > 0.0).all()) shifted.push_back(std::move(d));
  }
  if (shifted.empty()) return 0.0;
  if (ref.size() == 1) {
    double best = 0.0;
    for (const auto& d : shifted) best = std::max(best, d[0]);
    return best;
  }
  return detail::hv_recursive(detail::nondominated_weak(std::move(shifted)));
}

inline double hypervolume(const ParetoSet& set, const Vector& ref) { return hypervolume(set.points(), ref); }

/// Mean squared gap between consecutive per-objective sorted values, divided by N-1.
/// A single point has no gaps and scores 0.
inline double sparsity(const std::vector<Vector>& points) {
  require(!points.empty(), "sparsity of an empty set");
  const std::size_t n = points.size();
  if (n == 1) return 0.0;
  const Index dim = points.front().size();
  double total = 0.0;
  std::vector<double> column(n);
  for (Index k = 0; k < dim; ++k) {
    for (std::size_t i = 0; i < n; ++i) column[i] = points[i][k];
    std::sort(column.begin(), column.end(), std::greater<>());
    for (std::size_t i = 0; i + 1 < n; ++i) total += (column[i] - column[i + 1]) * (column[i] - column[i + 1]);
  }
  return total / static_cast<double>(n - 1);
}

inline double sparsity(const ParetoSet& set) { return sparsity(set.points()); }

/// Expected utility over a preference set, utility = signed length of the
/// projection of r onto w. The front is Pareto-filtered first.
inline double eum(const std::vector<Vector>& front, const std::vector<Vector>& prefs) {
  require(!front.empty() && !prefs.empty(), "eum needs a nonempty front and preference set");
  const ParetoSet filtered = pareto_filter(front);
  double total = 0.0;
  for (const auto& w : prefs) {
    const double norm = w.norm();
    require(norm > 0.0, "eum preference has zero norm");
    require(w.size() == filtered.dim(), "eum preference dimension mismatch");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& r : filtered.points()) best = std::max(best, w.dot(r) / norm);
    total += best;
  }
  return total / static_cast<double>(prefs.size());
}

inline double eum(const ParetoSet& front, const std::vector<Vector>& prefs) { return eum(front.points(), prefs); }

/// Number of lattice points C(divisions + m - 1, m - 1).
inline std::size_t simplex_lattice_size(int m, int divisions) {
  require(m >= 1 && divisions >= 0, "invalid simplex lattice parameters");
  long double c = 1.0L;
  for (int i = 1; i < m; ++i) c = c * (divisions + i) / i;
  return static_cast<std::size_t>(std::llround(static_cast<double>(c)));
}

/// All (k_1..k_m)/divisions with sum k = divisions, first coordinate descending.
inline std::vector<Vector> equidistant_simplex_points(int m, int divisions) {
  require(m >= 2, "simplex lattice needs m >= 2");
  require(divisions >= 1, "simplex lattice needs divisions >= 1");
  std::vector<Vector> out;
  out.reserve(simplex_lattice_size(m, divisions));
  std::vector<int> counts(static_cast<std::size_t>(m), 0);
  auto fill = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == m - 1) {
      counts[pos] = remaining;
      Vector w(m);
      for (int j = 0; j < m; ++j) w[j] = static_cast<double>(counts[j]) / divisions;
      out.push_back(std::move(w));
      return;
    }
    for (int c = remaining; c >= 0; --c) {
      counts[pos] = c;
      self(self, pos + 1, remaining - c);
    }
  };
  fill(fill, 0, divisions);
  return out;
}

// ---------------------------------------------------------------------------
// Point-set CSV: one point per row, comma separated, optional header line
// starting with a non-numeric token.

inline void write_points_csv(std::ostream& os, const std::vector<Vector>& points, const std::string& prefix = "x") {
  if (points.empty()) return;
  for (Index k = 0; k < points.front().size(); ++k) os << (k ? "," : "") << prefix << '_' << (k + 1);
  os << '\n';
  os.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& p : points) {
    for (Index k = 0; k < p.size(); ++k) os << (k ? "," : "") << p[k];
    os << '\n';
  }
}

inline std::vector<Vector> read_points_csv(std::istream& is) {
  std::vector<Vector> out;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    bool header = false;
    while (start <= line.size()) {
      const std::size_t end = std::min(line.find(',', start), line.size());
      const std::string cell = line.substr(start, end - start);
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        if (!first) throw IoError("non-numeric cell '" + cell + "' in point CSV");
        header = true;
        break;
      }
      start = end + 1;
    }
    first = false;
    if (header) continue;
    if (!out.empty() && static_cast<Index>(row.size()) != out.front().size())
      throw IoError("ragged row in point CSV");
    out.push_back(from_std(row));
  }
  return out;
}

}  // namespace morl
