#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "mesugaki/diagnostics.hpp"
#include "mesugaki/wakarase.hpp"
#include "oracles.hpp"

using namespace mesugaki;

namespace {

const HistoryView kEmpty{};

DiscreteAtoms atoms(std::vector<std::pair<double, double>> list) {
  DiscreteAtoms out;
  for (auto [z, r] : list) out.atoms.push_back({z, Homogeneous{r}});
  return out;
}

WakaraseMeasure unit_density(double hi) {
  return DensityForm{Homogeneous{hi}, UniformLaw{0.0, hi, 1.0}};
}

}  // namespace

TEST(MeasureOfSet, Atoms) {
  const WakaraseMeasure mu = atoms({{1.0, 2.0}, {3.0, 5.0}});
  EXPECT_EQ(measure_of_set(mu, Interval::closed(0.5, 2.0), 0.0, kEmpty), 2.0);
  EXPECT_EQ(measure_of_set(mu, Interval::open(0.0, kInf), 0.0, kEmpty), 7.0);
}

TEST(MeasureOfSet, Density) {
  const WakaraseMeasure mu = DensityForm{Homogeneous{3.0}, UniformLaw{0.0, 2.0, 1.0}};
  EXPECT_NEAR(measure_of_set(mu, Interval::closed(1.0, 2.0), 0.0, kEmpty), 1.5, 1e-15);
}

TEST(MeasureOfSet, HistoryDependentRate) {
  const WakaraseMeasure mu =
      DensityForm{Hawkes{1.0, ExponentialKernel{1.0, 2.0}}, PointMass{2.0, 1.0}};
  const std::vector<JumpEvent> ev{{0.5, 2.0}};
  const HistoryView v{std::span<const JumpEvent>(ev)};
  EXPECT_NEAR(measure_of_set(mu, Interval::closed(1.5, 2.5), 1.0, v), 1.0 + std::exp(-1.0),
              1e-14);
  EXPECT_EQ(measure_of_set(mu, Interval::closed(1.5, 2.5), 0.5, v), 1.0);
}

TEST(MeasureOfSet, RejectsTimeBeforeOrigin) {
  HistoryView v;
  v.origin = 1.0;
  EXPECT_THROW(measure_of_set(unit_density(1.0), Interval::open(0.0, 1.0), 0.5, v),
               DomainError);
}

TEST(OrderCondition, Examples) {
  const WakaraseMeasure half = DensityForm{Homogeneous{2.0}, PointMass{0.5, 1.0}};
  EXPECT_NEAR(check_order_condition(half, 1.0, 10, 1).mean, 0.5, 1e-12);
  EXPECT_NEAR(check_order_condition(atoms({{1.0, 1.0}}), 3.0, 10, 1).mean, 3.0, 1e-12);
  const auto e = check_order_condition(unit_density(1.0), 1.0, 10, 1);
  EXPECT_NEAR(e.mean, 1.0 / 3.0, 1e-10);
  EXPECT_EQ(e.standard_error, 0.0);
  EXPECT_FALSE(e.violated);
}

TEST(OrderCondition, SingularDensityViolates) {
  const WakaraseMeasure mu = DensityForm{Homogeneous{1.0}, PowerLaw{1.0, 3.5, 1.0}};
  const auto e = check_order_condition(mu, 1.0, 10, 1);
  EXPECT_TRUE(e.violated);
}

TEST(OrderCondition, HawkesMonteCarlo) {
  // E int_0^T lambda dt with marks at 1: equals E N_T.
  const WakaraseMeasure mu =
      DensityForm{Hawkes{1.0, ExponentialKernel{1.0, 2.0}}, PointMass{1.0, 1.0}};
  const auto e = check_order_condition(mu, 5.0, 20000, 3, {1e12, 1e-3, 4});
  EXPECT_NEAR(e.mean, oracle::hawkes_mean_count(1.0, 1.0, 2.0, 5.0), 4.0 * e.standard_error);
  EXPECT_GT(e.standard_error, 0.0);
}

TEST(Grid, RefinementExamples) {
  const auto g2 = refine_grid(first_grid());
  EXPECT_EQ(g2.points, (std::vector<double>{0.5, 1.0, 2.0}));
  EXPECT_EQ(g2.level, 2);
  const auto g3 = refine_grid(g2);
  EXPECT_EQ(g3.points, (std::vector<double>{0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0}));
  EXPECT_EQ(g3.level, 3);
}

TEST(Grid, SizesAndNesting) {
  MarkGrid g = first_grid();
  for (int n = 1; n <= 12; ++n) {
    ASSERT_EQ(g.size(), (std::size_t{1} << n) - 1) << "level " << n;
    const auto next = refine_grid(g);
    for (double z : g.points) {
      EXPECT_TRUE(std::binary_search(next.points.begin(), next.points.end(), z));
    }
    EXPECT_EQ(next.min(), 0.5 * g.min());
    EXPECT_EQ(next.max(), g.max() + 1.0);
    g = next;
  }
}

TEST(Grid, LocateAndCells) {
  const auto g = grid_at_level(2);
  EXPECT_EQ(g.locate(0.4), MarkGrid::npos);
  EXPECT_EQ(g.locate(0.5), 0u);
  EXPECT_EQ(g.locate(1.99), 1u);
  EXPECT_EQ(g.locate(100.0), 2u);
  EXPECT_TRUE(std::isinf(g.cell(2).hi));
  EXPECT_THROW(grid_at_level(0), DomainError);
}

TEST(Discretize, DensityExample) {
  const auto d = discretize(unit_density(2.5), grid_at_level(2), 0.0, kEmpty);
  ASSERT_EQ(d.measure.atoms.size(), 3u);
  const double expect[] = {0.5, 1.0, 0.5};
  for (int m = 0; m < 3; ++m) {
    EXPECT_NEAR(std::get<Homogeneous>(d.measure.atoms[m].rate).rate, expect[m], 1e-14);
  }
  EXPECT_NEAR(d.dropped_mass, 0.5, 1e-14);
}

TEST(Discretize, AtomLandsInItsCell) {
  const auto d = discretize(atoms({{1.0, 2.0}}), grid_at_level(2), 0.0, kEmpty);
  EXPECT_EQ(std::get<Homogeneous>(d.measure.atoms[1].rate).rate, 2.0);
  EXPECT_EQ(std::get<Homogeneous>(d.measure.atoms[0].rate).rate, 0.0);
  EXPECT_EQ(std::get<Homogeneous>(d.measure.atoms[2].rate).rate, 0.0);
}

TEST(Discretize, NegativeMarksMirror) {
  const WakaraseMeasure mu = atoms({{-1.2, 1.0}, {0.7, 2.0}});
  const auto d = discretize(mu, grid_at_level(2), 0.0, kEmpty);
  double neg = 0.0;
  for (const auto& a : d.measure.atoms) {
    if (a.mark == -1.0) neg = std::get<Homogeneous>(a.rate).rate;
  }
  EXPECT_EQ(neg, 1.0);
}

TEST(Discretize, MassConservationProperty) {
  auto rng = derive_stream(31, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const double lo = rng.uniform() * 2.0;
    const double hi = lo + 0.01 + rng.uniform() * 4.0;
    const double rate = 0.1 + rng.uniform() * 5.0;
    const WakaraseMeasure mu = DensityForm{Homogeneous{rate}, UniformLaw{lo, hi, 1.0}};
    const auto g = grid_at_level(1 + rep % 6);
    const auto d = discretize(mu, g, 0.0, kEmpty);
    double total = 0.0;
    for (const auto& a : d.measure.atoms) total += std::get<Homogeneous>(a.rate).rate;
    EXPECT_LE(total, rate * (1.0 + 1e-12));
    EXPECT_NEAR(total + d.dropped_mass, rate, 1e-12 * rate);
  }
}

TEST(SecondMomentDeficit, NonnegativeAndNonincreasing) {
  const WakaraseMeasure mus[] = {unit_density(1.0), unit_density(2.5),
                                 DensityForm{Homogeneous{2.0}, PowerLaw{0.5, 0.5, 1.0}},
                                 DensityForm{Homogeneous{1.0}, ExponentialLaw{1.5, 1.0}}};
  for (const auto& mu : mus) {
    double prev = kInf;
    MarkGrid g = first_grid();
    for (int n = 1; n <= 10; ++n) {
      const double d = second_moment_deficit(mu, g, 0.0, kEmpty);
      EXPECT_GE(d, -1e-12);
      EXPECT_LE(d, prev + 1e-12);
      prev = d;
      g = refine_grid(g);
    }
  }
}

TEST(SecondMomentDeficit, UnitDensityHandValue) {
  // Level 2 on (0, 1): int z^2 = 1/3, minus 0.25 * 0.5 for the cell [0.5, 1).
  EXPECT_NEAR(second_moment_deficit(unit_density(1.0), grid_at_level(2), 0.0, kEmpty),
              1.0 / 3.0 - 0.125, 1e-12);
}

TEST(CellBound, DominatesRateProperty) {
  const WakaraseMeasure mu =
      DensityForm{Hawkes{1.0, ExponentialKernel{1.5, 2.0}}, UniformLaw{0.0, 2.0, 1.0}};
  auto rng = derive_stream(8, 0);
  const auto ev = detail::thin_marked(mu, 10.0, rng, {});
  const HistoryView v{std::span<const JumpEvent>(ev)};
  const IntervalSet cell{Interval::right_open(0.5, 1.0)};
  for (int k = 0; k < 500; ++k) {
    const double t = 10.0 * k / 500.0;
    const auto [B, until] = cell_bound(mu, cell, t, v, 10.0);
    const auto upto = v.before(std::nextafter(t, kInf));
    for (double s = t; s < std::min(until, 10.0); s += 0.05) {
      EXPECT_LE(measure_of_set(mu, cell, s, upto), B * (1.0 + 1e-12));
    }
  }
}

TEST(ThinMarked, RejectsInfiniteMass) {
  auto rng = derive_stream(1, 0);
  const WakaraseMeasure mu = DensityForm{Homogeneous{1.0}, PowerLaw{1.0, 1.5, 1.0}};
  EXPECT_THROW(detail::thin_marked(mu, 1.0, rng, {}), UnsupportedError);
}

TEST(DynamicAtoms, ValidatesEntries) {
  const WakaraseMeasure bad =
      DynamicAtoms{[](double, const HistoryView&) { return std::vector<AtomRate>{{0.0, 1.0}}; }};
  EXPECT_THROW(total_rate(bad, 0.0, kEmpty), DomainError);
  const WakaraseMeasure neg =
      DynamicAtoms{[](double, const HistoryView&) { return std::vector<AtomRate>{{1.0, -1.0}}; }};
  EXPECT_THROW(total_rate(neg, 0.0, kEmpty), ContractViolation);
}

TEST(DiscretizeDynamic, TracksHistory) {
  auto mu = std::make_shared<const WakaraseMeasure>(
      DensityForm{Hawkes{1.0, ExponentialKernel{1.0, 2.0}}, UniformLaw{0.0, 2.0, 1.0}});
  const auto g = grid_at_level(2);
  const auto dyn = discretize_dynamic(mu, g);
  const std::vector<JumpEvent> ev{{0.5, 1.2}};
  const HistoryView v{std::span<const JumpEvent>(ev)};
  const auto snap = discretize(*mu, g, 1.0, v);
  for (std::size_t m = 0; m < g.size(); ++m) {
    EXPECT_NEAR(intensity_at(dyn.atoms[m].rate, 1.0, v),
                std::get<Homogeneous>(snap.measure.atoms[m].rate).rate, 1e-14);
  }
}
