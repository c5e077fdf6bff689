#include "morl/metrics.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace morl;

namespace {

Vector v(std::initializer_list<double> xs) {
  Vector out(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

std::vector<Vector> random_points(Rng& rng, int n, int d, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Vector> pts;
  for (int i = 0; i < n; ++i) {
    Vector p(d);
    for (int k = 0; k < d; ++k) p[k] = u(rng);
    pts.push_back(p);
  }
  return pts;
}

// Quadratic all-pairs oracle, written independently of pareto_filter.
std::vector<Vector> brute_front(const std::vector<Vector>& pts) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      bool geq = true, gt = false;
      for (Index k = 0; k < pts[i].size(); ++k) {
        geq = geq && pts[j][k] >= pts[i][k];
        gt = gt || pts[j][k] > pts[i][k];
      }
      if (geq && gt) dominated = true;
    }
    bool duplicate = false;
    for (const auto& q : out) duplicate = duplicate || q == pts[i];
    if (!dominated && !duplicate) out.push_back(pts[i]);
  }
  return out;
}

// Inclusion-exclusion over all subsets: vol(union) = sum (-1)^{|S|+1} vol(meet(S)).
double inclusion_exclusion_hv(const std::vector<Vector>& pts, const Vector& ref) {
  const std::size_t n = pts.size();
  double total = 0.0;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    Vector meet = Vector::Constant(ref.size(), std::numeric_limits<double>::infinity());
    int bits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) {
        meet = meet.cwiseMin(pts[i]);
        ++bits;
      }
    }
    const double vol = (meet - ref).cwiseMax(0.0).prod();
    total += (bits % 2 ? 1.0 : -1.0) * vol;
  }
  return total;
}

}  // namespace

TEST(ParetoDominates, SpecExamples) {
  EXPECT_TRUE(pareto_dominates(v({2, 3}), v({1, 3})));
  EXPECT_FALSE(pareto_dominates(v({1, 3}), v({3, 1})));
  EXPECT_FALSE(pareto_dominates(v({3, 1}), v({1, 3})));
  EXPECT_FALSE(pareto_dominates(v({1, 1}), v({1, 1})));
}

TEST(ParetoDominates, DimensionMismatchIsUsageError) {
  EXPECT_THROW(pareto_dominates(v({1, 2}), v({1, 2, 3})), UsageError);
}

TEST(ParetoDominates, StrictPartialOrderProperties) {
  Rng rng = make_rng(11);
  std::uniform_int_distribution<int> coord(0, 2);
  for (int trial = 0; trial < 2000; ++trial) {
    Vector a(3), b(3), c(3);
    for (int k = 0; k < 3; ++k) {
      a[k] = coord(rng);
      b[k] = coord(rng);
      c[k] = coord(rng);
    }
    EXPECT_FALSE(pareto_dominates(a, a));
    if (pareto_dominates(a, b)) EXPECT_FALSE(pareto_dominates(b, a));
    if (pareto_dominates(a, b) && pareto_dominates(b, c)) EXPECT_TRUE(pareto_dominates(a, c));
  }
}

TEST(ParetoFilter, SpecExamples) {
  const ParetoSet s = pareto_filter({v({1, 2}), v({2, 1}), v({1, 1})});
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.points()[0], v({1, 2}));
  EXPECT_EQ(s.points()[1], v({2, 1}));
  const ParetoSet single = pareto_filter({v({5})});
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single.points()[0], v({5}));
}

TEST(ParetoFilter, EmptyInputIsUsageError) { EXPECT_THROW(pareto_filter(std::vector<Vector>{}), UsageError); }

TEST(ParetoFilter, DuplicatesCollapseToFirst) {
  const ParetoSet s = pareto_filter({v({1, 2}), v({1, 2}), v({2, 1})}, {v({0.1, 0.9}), v({0.2, 0.8}), std::nullopt});
  ASSERT_EQ(s.size(), 2u);
  ASSERT_TRUE(s.provenance()[0].has_value());
  EXPECT_EQ(*s.provenance()[0], v({0.1, 0.9}));
  EXPECT_FALSE(s.provenance()[1].has_value());
}

TEST(ParetoFilter, MatchesQuadraticOracleOnRandomSets) {
  Rng rng = make_rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    // Coarse integer grid so ties and duplicates occur.
    std::uniform_int_distribution<int> coord(0, 6);
    std::vector<Vector> pts;
    for (int i = 0; i < 50; ++i) pts.push_back(v({double(coord(rng)), double(coord(rng)), double(coord(rng))}));
    EXPECT_EQ(pareto_filter(pts).points(), brute_front(pts));
  }
}

TEST(ParetoFilter, Idempotent) {
  Rng rng = make_rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const ParetoSet once = pareto_filter(random_points(rng, 30, 3));
    EXPECT_EQ(pareto_filter(once).points(), once.points());
  }
}

TEST(Hypervolume, SpecExamples) {
  EXPECT_DOUBLE_EQ(hypervolume({v({1, 1})}, v({0, 0})), 1.0);
  EXPECT_DOUBLE_EQ(hypervolume({v({2, 1}), v({1, 2})}, v({0, 0})), 3.0);
}

TEST(Hypervolume, PointsNotDominatingReferenceAreClipped) {
  EXPECT_DOUBLE_EQ(hypervolume({v({-1, 5})}, v({0, 0})), 0.0);
  EXPECT_DOUBLE_EQ(hypervolume({v({0, 5}), v({2, 2})}, v({0, 0})), 4.0);
}

TEST(Hypervolume, SinglePointIsBoxVolume) {
  Rng rng = make_rng(7);
  for (int d = 2; d <= 6; ++d) {
    const Vector p = random_points(rng, 1, d, 0.5, 2.0).front();
    const Vector ref = Vector::Constant(d, 0.25);
    EXPECT_NEAR(hypervolume({p}, ref), (p - ref).prod(), 1e-12);
  }
}

TEST(Hypervolume, MatchesInclusionExclusion) {
  Rng rng = make_rng(8);
  std::uniform_int_distribution<int> dim(2, 5), count(1, 7);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = dim(rng);
    const auto pts = random_points(rng, count(rng), d, -0.2, 1.0);
    const Vector ref = Vector::Zero(d);
    const double expected = inclusion_exclusion_hv(pts, ref);
    EXPECT_NEAR(hypervolume(pts, ref), expected, 1e-12 * std::max(1.0, expected));
  }
}

TEST(Hypervolume, MatchesMonteCarloWithinThreeStandardErrors) {
  Rng rng = make_rng(9);
  std::uniform_int_distribution<int> dim(2, 4), count(1, 6);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = dim(rng);
    const auto pts = random_points(rng, count(rng), d);
    const Vector ref = Vector::Zero(d);
    const int samples = 200000;
    int hits = 0;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < samples; ++s) {
      Vector x(d);
      for (int k = 0; k < d; ++k) x[k] = u(rng);
      for (const auto& p : pts) {
        if ((x.array() <= p.array()).all()) {
          ++hits;
          break;
        }
      }
    }
    const double p_hat = double(hits) / samples;
    const double se = std::sqrt(std::max(p_hat * (1 - p_hat), 1e-12) / samples);
    EXPECT_LE(std::abs(hypervolume(pts, ref) - p_hat), 3 * se + 1e-12);
  }
}

TEST(Hypervolume, MonotoneAndDominatedPointsAddNothing) {
  Rng rng = make_rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    auto pts = random_points(rng, 5, 4);
    const Vector ref = Vector::Zero(4);
    const double base = hypervolume(pts, ref);
    const Vector extra = random_points(rng, 1, 4).front();
    auto more = pts;
    more.push_back(extra);
    EXPECT_GE(hypervolume(more, ref), base - 1e-15);
    auto dominated = pts;
    dominated.push_back(pts[0] * 0.5);
    EXPECT_NEAR(hypervolume(dominated, ref), base, 1e-14);
  }
}

TEST(Hypervolume, SixteenDimensionalLatticeSizedSetIsTractable) {
  Rng rng = make_rng(12);
  std::vector<Vector> pts;
  // Points on a sphere-like front, 35 of them, in 16-D.
  for (int i = 0; i < 35; ++i) {
    Vector p = random_points(rng, 1, 16, 0.0, 1.0).front();
    pts.push_back(p / p.norm());
  }
  const double hv = hypervolume(pts, Vector::Constant(16, -1.0));
  EXPECT_GT(hv, 1.0);
  EXPECT_TRUE(std::isfinite(hv));
}

TEST(Sparsity, SpecExamples) {
  EXPECT_EQ(sparsity({v({0, 2}), v({1, 1}), v({2, 0})}), 2.0);
  EXPECT_EQ(sparsity({v({0, 0}), v({1, 1})}), 2.0);
  EXPECT_EQ(sparsity({v({3, 4, 5})}), 0.0);
  EXPECT_THROW(sparsity(std::vector<Vector>{}), UsageError);
}

TEST(Eum, SpecExamples) {
  EXPECT_DOUBLE_EQ(eum({v({1, 0})}, {v({1, 0}), v({0, 1})}), 0.5);
  EXPECT_THROW(eum({v({1, 0})}, {v({0, 0})}), UsageError);
}

TEST(Eum, PositiveHomogeneity) {
  const auto prefs = equidistant_simplex_points(3, 5);
  const double base = eum({v({1, 1, 1})}, prefs);
  EXPECT_NEAR(eum({v({2.5, 2.5, 2.5})}, prefs), 2.5 * base, 1e-12);
}

TEST(Eum, InvariantToDominatedPoints) {
  Rng rng = make_rng(13);
  const auto prefs = equidistant_simplex_points(3, 6);
  for (int trial = 0; trial < 50; ++trial) {
    auto pts = random_points(rng, 4, 3, -1.0, 1.0);
    const double base = eum(pts, prefs);
    pts.push_back(pts[1] - Vector::Constant(3, 0.1));
    EXPECT_DOUBLE_EQ(eum(pts, prefs), base);
  }
}

TEST(Eum, NegativeReturnsGiveNegativeUtility) {
  // Signed projection: a front that is worse everywhere scores lower.
  const auto prefs = equidistant_simplex_points(2, 4);
  EXPECT_LT(eum({v({-3, -3})}, prefs), eum({v({-1, -1})}, prefs));
  EXPECT_LT(eum({v({-1, -1})}, prefs), 0.0);
}

TEST(SimplexLattice, SpecExamples) {
  const auto two = equidistant_simplex_points(2, 2);
  ASSERT_EQ(two.size(), 3u);
  EXPECT_EQ(two[0], v({1, 0}));
  EXPECT_EQ(two[1], v({0.5, 0.5}));
  EXPECT_EQ(two[2], v({0, 1}));
  EXPECT_EQ(equidistant_simplex_points(3, 4).size(), 15u);
  EXPECT_EQ(equidistant_simplex_points(4, 4).size(), 35u);
  EXPECT_EQ(simplex_lattice_size(3, 4), 15u);
  EXPECT_EQ(simplex_lattice_size(4, 4), 35u);
  EXPECT_EQ(simplex_lattice_size(16, 5), 15504u);
}

TEST(SimplexLattice, PointsAreOnTheSimplexAndDistinct) {
  for (int m = 2; m <= 5; ++m) {
    for (int div = 1; div <= 6; ++div) {
      const auto pts = equidistant_simplex_points(m, div);
      EXPECT_EQ(pts.size(), simplex_lattice_size(m, div));
      for (std::size_t i = 0; i < pts.size(); ++i) {
        EXPECT_NEAR(pts[i].sum(), 1.0, 1e-12);
        EXPECT_GE(pts[i].minCoeff(), 0.0);
        for (std::size_t j = 0; j < i; ++j) EXPECT_GT((pts[i] - pts[j]).norm(), 1e-9);
      }
    }
  }
}

TEST(PointsCsv, RoundTripIsExact) {
  Rng rng = make_rng(14);
  const auto pts = random_points(rng, 10, 5, -1e4, 1e4);
  std::stringstream ss;
  write_points_csv(ss, pts);
  EXPECT_EQ(read_points_csv(ss), pts);
}
