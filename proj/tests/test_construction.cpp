#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "mesugaki/construction.hpp"
#include "mesugaki/diagnostics.hpp"
#include "oracles.hpp"

using namespace mesugaki;

namespace {

const HistoryView kEmpty{};

WakaraseMeasure uniform_density(double rate, double hi) {
  return DensityForm{Homogeneous{rate}, UniformLaw{0.0, hi, 1.0}};
}

std::vector<double> terminal(const auto& simulate, std::size_t n) {
  return parallel_map(n, 4, [&](std::size_t i) { return simulate(i); });
}

}  // namespace

TEST(SplitProbability, Examples) {
  const auto g = grid_at_level(2);
  EXPECT_NEAR(split_probability(uniform_density(1.0, 1.0), g, 0, 0.0, kEmpty), 0.5, 1e-14);
  const auto wide = uniform_density(1.0, 2.5);
  EXPECT_NEAR(split_probability(wide, g, 1, 0.0, kEmpty), 0.5, 1e-14);
  EXPECT_EQ(split_probability(wide, g, 2, 0.0, kEmpty), 0.0);
  EXPECT_THROW(split_probability(uniform_density(1.0, 1.0), g, 1, 0.0, kEmpty),
               ContractViolation);
  EXPECT_THROW(split_probability(wide, g, 3, 0.0, kEmpty), DomainError);
}

TEST(SplitProbability, AtomOnSplitPointGoesUp) {
  DiscreteAtoms a;
  a.atoms.push_back({0.75, Homogeneous{1.0}});
  EXPECT_EQ(split_probability(a, grid_at_level(2), 0, 0.0, kEmpty), 1.0);
}

TEST(Coupled, InvariantsProperty) {
  const WakaraseMeasure mus[] = {
      uniform_density(3.0, 2.5),
      DensityForm{Homogeneous{2.0}, ExponentialLaw{1.0, 1.0}},
      DensityForm{Hawkes{1.0, ExponentialKernel{1.0, 2.0}}, UniformLaw{0.0, 3.0, 1.0}}};
  for (const auto& mu : mus) {
    for (std::size_t i = 0; i < 200; ++i) {
      const auto f = simulate_coupled(mu, 6, 2.0, derive_stream(17, i));
      for (const auto& e : f.events) {
        ASSERT_GT(e.time, 0.0);
        ASSERT_LE(e.time, 2.0);
        for (int n = 1; n < 6; ++n) {
          // Marks only move up along refinement, and sit on the grid.
          ASSERT_GE(e.mark_at(n + 1), e.mark_at(n));
          if (n >= e.origin) {
            const auto& pts = f.grids[static_cast<std::size_t>(n - 1)].points;
            ASSERT_TRUE(std::binary_search(pts.begin(), pts.end(), e.mark_at(n)));
          }
        }
      }
      for (int n = 1; n <= 6; ++n) {
        const auto a = f.level(n);
        const auto b = reconstruct_level(f, n);
        ASSERT_EQ(a.events.size(), b.events.size());
        for (std::size_t k = 0; k < a.events.size(); ++k) {
          ASSERT_EQ(a.events[k].time, b.events[k].time);
          ASSERT_EQ(a.events[k].mark, b.events[k].mark);
        }
      }
      // N^m - N^n is a nondecreasing path.
      const auto lo = f.level(2);
      const auto hi = f.level(5);
      double prev = 0.0;
      for (const auto& e : f.events) {
        const double d = hi.value_at(e.time) - lo.value_at(e.time);
        ASSERT_GE(d, prev);
        prev = d;
      }
    }
  }
}

TEST(Coupled, ShallowLevelsDoNotDependOnDepth) {
  const auto mu = uniform_density(3.0, 2.5);
  for (std::size_t i = 0; i < 50; ++i) {
    const auto a = simulate_coupled(mu, 3, 1.0, derive_stream(4, i));
    const auto b = simulate_coupled(mu, 7, 1.0, derive_stream(4, i));
    for (int n = 1; n <= 3; ++n) {
      const auto x = a.level(n);
      const auto y = b.level(n);
      ASSERT_EQ(x.events.size(), y.events.size());
      for (std::size_t k = 0; k < x.events.size(); ++k) {
        ASSERT_EQ(x.events[k].time, y.events[k].time);
        ASSERT_EQ(x.events[k].mark, y.events[k].mark);
      }
    }
  }
}

TEST(Coupled, LevelMatchesIndependentDiscreteLaw) {
  const auto mu = std::make_shared<const WakaraseMeasure>(uniform_density(4.0, 2.5));
  const std::size_t n = 20000;
  const auto coupled = terminal(
      [&](std::size_t i) {
        return simulate_coupled(*mu, 5, 1.0, derive_stream(91, i)).level(3).value_at(1.0);
      },
      n);
  const auto g = grid_at_level(3);
  const auto direct = terminal(
      [&](std::size_t i) {
        auto rng = derive_stream(92, i);
        return simulate_discrete(mu, g, 1.0, rng).value_at(1.0);
      },
      n);
  EXPECT_GT(ks_two_sample(coupled, direct).p_value, 0.01);
  // E N^3_1 is the sum of cell lows times cell rates.
  const auto d = discretize(*mu, g, 0.0, kEmpty);
  double mean = 0.0;
  for (const auto& a : d.measure.atoms) mean += a.mark * std::get<Homogeneous>(a.rate).rate;
  const auto s = mean_stats(coupled);
  EXPECT_NEAR(s.mean, mean, 4.0 * s.standard_error);
}

TEST(Coupled, Errors) {
  EXPECT_THROW(simulate_coupled(uniform_density(1.0, 1.0), 1, 1.0, derive_stream(1, 0)),
               DomainError);
  const WakaraseMeasure neg = DensityForm{Homogeneous{1.0}, UniformLaw{-1.0, 1.0, 1.0}};
  EXPECT_THROW(simulate_coupled(neg, 3, 1.0, derive_stream(1, 0)), UnsupportedError);
}

TEST(DiagnoseConvergence, PointMassHasNoDifferences) {
  const WakaraseMeasure mu = DensityForm{Homogeneous{2.0}, PointMass{1.0, 1.0}};
  const auto r = diagnose_convergence(mu, {1, 2, 3, 4}, 1.0, 500, 5);
  for (const auto& p : r.pairs) {
    EXPECT_EQ(p.empirical_l2, 0.0);
    EXPECT_EQ(p.bound, 0.0);
    EXPECT_FALSE(p.violation);
  }
  EXPECT_FALSE(r.any_violation);
  for (const auto& s : r.stabilization) EXPECT_EQ(s.stable_fraction, 1.0);
}

TEST(DiagnoseConvergence, UnitDensityWithinBound) {
  const auto r = diagnose_convergence(uniform_density(1.0, 1.0), {2, 4, 6}, 1.0, 3000, 6,
                                      {1e-3, 4});
  ASSERT_EQ(r.pairs.size(), 2u);
  for (const auto& p : r.pairs) {
    EXPECT_GT(p.bound, 0.0);
    EXPECT_FALSE(p.violation) << p.n << "," << p.m;
    EXPECT_EQ(p.large_l2, 0.0);
  }
  // Level-2 deficit on (0, 1): 1/3 - 0.125.
  EXPECT_NEAR(r.pairs[0].bound, 1.0 / 3.0 - 0.125, 1e-9);
  EXPECT_LT(r.pairs[1].empirical_l2, r.pairs[0].empirical_l2);
}

TEST(DiagnoseConvergence, RejectsBadDepths) {
  const auto mu = uniform_density(1.0, 1.0);
  EXPECT_THROW(diagnose_convergence(mu, {3}, 1.0, 10, 1), DomainError);
  EXPECT_THROW(diagnose_convergence(mu, {3, 2}, 1.0, 10, 1), DomainError);
  EXPECT_THROW(diagnose_convergence(mu, {0, 2}, 1.0, 10, 1), DomainError);
}

TEST(SimulateDiscrete, TwoAtomMean) {
  DiscreteAtoms a;
  a.atoms.push_back({1.0, Homogeneous{1.0}});
  a.atoms.push_back({2.0, Homogeneous{1.0}});
  const std::size_t n = 40000;
  const auto x = terminal(
      [&](std::size_t i) {
        auto rng = derive_stream(33, i);
        return simulate_discrete(a, 1.0, rng).value_at(1.0);
      },
      n);
  const auto s = mean_stats(x);
  EXPECT_NEAR(s.mean, 3.0, 4.0 * s.standard_error);
  // Var = sum z^2 rate = 5.
  EXPECT_NEAR(s.variance, 5.0, 0.2);
}

TEST(SimulateMesugaki, WaldMean) {
  const std::size_t n = 40000;
  const auto mu = uniform_density(2.0, 1.0);
  const auto x = terminal(
      [&](std::size_t i) {
        auto rng = derive_stream(34, i);
        return simulate_mesugaki(mu, 1.0, rng).value_at(1.0);
      },
      n);
  const auto s = mean_stats(x);
  EXPECT_NEAR(s.mean, 1.0, 4.0 * s.standard_error);
  EXPECT_NEAR(s.variance, 2.0 / 3.0, 0.05);
}

TEST(SimulateMesugaki, HawkesMarksAtOneMatchCounting) {
  const WakaraseMeasure mu =
      DensityForm{Hawkes{1.0, ExponentialKernel{1.0, 2.0}}, PointMass{1.0, 1.0}};
  const std::size_t n = 20000;
  const auto x = terminal(
      [&](std::size_t i) {
        auto rng = derive_stream(35, i);
        return simulate_mesugaki(mu, 5.0, rng).value_at(5.0);
      },
      n);
  const auto s = mean_stats(x);
  EXPECT_NEAR(s.mean, oracle::hawkes_mean_count(1.0, 1.0, 2.0, 5.0), 4.0 * s.standard_error);
}
