#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mesugaki/diagnostics.hpp"
#include "mesugaki/mark_law.hpp"
#include "oracles.hpp"

using namespace mesugaki;

TEST(Interval, Containment) {
  EXPECT_TRUE(Interval::right_open(1.0, 2.0).contains(1.0));
  EXPECT_FALSE(Interval::right_open(1.0, 2.0).contains(2.0));
  EXPECT_FALSE(Interval::open(0.0, 1.0).contains(0.0));
  EXPECT_TRUE(Interval::left_open(0.0, 1.0).contains(1.0));
  EXPECT_TRUE(Interval::closed(1.0, 1.0).contains(1.0));
  EXPECT_TRUE(Interval::open(1.0, 1.0).empty());
  const auto m = Interval::right_open(1.0, 2.0).mirrored();
  EXPECT_TRUE(m.contains(-1.0));
  EXPECT_FALSE(m.contains(-2.0));
}

TEST(Mass, ClosedFormsMatchQuadrature) {
  const PowerLaw power{1.0, 0.5, 1.0};
  EXPECT_NEAR(mass(power, Interval::open(0.25, 0.75)),
              oracle::gk([](double z) { return 1.0 / std::sqrt(z); }, 0.25, 0.75), 1e-12);
  EXPECT_NEAR(total_mass(power), 2.0, 1e-14);
  const ExponentialLaw ex{2.0, 3.0};
  EXPECT_NEAR(mass(ex, Interval::open(0.5, 1.5)),
              oracle::gk([](double z) { return 6.0 * std::exp(-2.0 * z); }, 0.5, 1.5), 1e-12);
  const UniformLaw u{0.0, 2.0, 1.0};
  EXPECT_NEAR(mass(u, Interval::closed(1.0, 2.0)), 0.5, 1e-15);
  const DensityLaw d{[](double z) { return z * z; }, 0.0, 2.0, {}};
  EXPECT_NEAR(mass(d, Interval::open(0.5, 1.0)), (1.0 - 0.125) / 3.0, 1e-10);
}

TEST(Mass, AtomsRespectEndpoints) {
  const FiniteAtoms a{{{1.0, 2.0}, {3.0, 5.0}}};
  EXPECT_EQ(mass(a, Interval::closed(0.5, 2.0)), 2.0);
  EXPECT_EQ(mass(a, Interval::right_open(1.0, 3.0)), 2.0);
  EXPECT_EQ(mass(a, Interval::open(1.0, 3.0)), 0.0);
  EXPECT_EQ(total_mass(a), 7.0);
}

TEST(Mass, InfiniteForSingularPower) {
  EXPECT_TRUE(std::isinf(total_mass(PowerLaw{1.0, 1.5, 1.0})));
  EXPECT_NEAR(mass(PowerLaw{1.0, 1.5, 1.0}, Interval::open(0.25, 1.0)), 2.0, 1e-14);
}

TEST(Integrate, MatchesQuadrature) {
  const PowerLaw power{1.0, 0.5, 1.0};
  const IntervalSet set{Interval::open(0.1, 0.9)};
  EXPECT_NEAR(integrate(power, [](double z) { return z * z; }, set),
              oracle::gk([](double z) { return z * z / std::sqrt(z); }, 0.1, 0.9), 1e-10);
  const UniformLaw u{0.0, 1.0, 1.0};
  EXPECT_NEAR(integrate(u, [](double z) { return z; }, whole_line()), 0.5, 1e-12);
  const ExponentialLaw ex{1.0, 1.0};
  EXPECT_NEAR(integrate(ex, [](double z) { return z; }, whole_line()), 1.0, 1e-8);
}

TEST(Sample, MatchesLawByKS) {
  auto rng = derive_stream(21, 0);
  const int n = 20000;
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) xs.push_back(sample(PowerLaw{0.5, 0.5, 1.0}, rng));
  EXPECT_TRUE(ks_one_sample(xs, [](double z) { return z <= 0 ? 0.0 : std::min(1.0, std::sqrt(z)); })
                  .pass);
  xs.clear();
  const DensityLaw d{[](double z) { return 2.0 * z; }, 0.0, 1.0, {}};
  for (int i = 0; i < 5000; ++i) xs.push_back(sample(d, rng));
  EXPECT_TRUE(ks_one_sample(xs, [](double z) { return std::clamp(z * z, 0.0, 1.0); }).pass);
  xs.clear();
  for (int i = 0; i < n; ++i) xs.push_back(sample(UniformLaw{0.0, 1.0, 1.0}, rng));
  for (double x : xs) {
    ASSERT_GT(x, 0.0);
    ASSERT_LE(x, 1.0);
  }
  EXPECT_TRUE(ks_one_sample(xs, [](double z) { return std::clamp(z, 0.0, 1.0); }).pass);
}

TEST(Sample, AtomFrequencies) {
  auto rng = derive_stream(22, 0);
  const FiniteAtoms a{{{1.0, 1.0}, {-2.0, 3.0}}};
  const int n = 40000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += sample(a, rng) == 1.0;
  EXPECT_NEAR(ones / double(n), 0.25, 4.0 * std::sqrt(0.25 * 0.75 / n));
}

TEST(Sample, ConditionalLawFollowsHistory) {
  const auto small = std::make_shared<const MarkLaw>(PointMass{1.0, 1.0});
  const auto large = std::make_shared<const MarkLaw>(PointMass{5.0, 1.0});
  const ConditionalLaw law{[=](double, const HistoryView& h) {
    return h.count() == 0 ? small : large;
  }};
  auto rng = derive_stream(1, 0);
  const std::vector<JumpEvent> ev{{0.1, 1.0}};
  HistoryView v{std::span<const JumpEvent>(ev)};
  EXPECT_EQ(sample(law, rng), 1.0);
  EXPECT_EQ(sample(law, rng, 0.5, v), 5.0);
  EXPECT_EQ(mass(law, Interval::closed(4.0, 6.0), 0.5, v), 1.0);
}

TEST(Validate, RejectsBadLaws) {
  EXPECT_THROW(validate_law(PointMass{0.0, 1.0}), DomainError);
  EXPECT_THROW(validate_law(FiniteAtoms{}), DomainError);
  EXPECT_THROW(validate_law(FiniteAtoms{{{1.0, 1.0}, {1.0, 2.0}}}), DomainError);
  EXPECT_THROW(validate_law(UniformLaw{1.0, 1.0, 1.0}), DomainError);
  EXPECT_THROW(validate_law(ExponentialLaw{0.0, 1.0}), DomainError);
  EXPECT_THROW(validate_law(DensityLaw{{}, 0.0, 1.0, {}}), DomainError);
  EXPECT_NO_THROW(validate_law(PowerLaw{1.0, 1.5, 1.0}));
}
