#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mesugaki/construction.hpp"
#include "mesugaki/diagnostics.hpp"
#include "mesugaki/integral.hpp"
#include "oracles.hpp"

using namespace mesugaki;

namespace {

const std::vector<JumpEvent> kEvents{{0.5, 2.0}, {1.0, -1.0}, {1.5, 0.3}};

HistoryView events_view() { return HistoryView{std::span<const JumpEvent>(kEvents)}; }

const WakaraseMeasure kUniform = DensityForm{Homogeneous{2.0}, UniformLaw{0.0, 1.0, 1.0}};

// Same rule as mark_integrand(g) but without the closed-form flag.
Integrand generic(std::function<double(double)> g) {
  return Integrand{[g](double, double z, const HistoryView&) { return g(z); }, {}, false};
}

}  // namespace

TEST(IntegrateJump, Examples) {
  const auto id = mark_integrand([](double z) { return z; });
  EXPECT_NEAR(integrate_jump(id, events_view()), 1.3, 1e-15);
  EXPECT_EQ(integrate_jump(id, events_view(), 1.0), 1.0);
  EXPECT_EQ(integrate_jump(with_window(id, MarkWindow::truncation(2.0)), events_view()), -1.0);
  EXPECT_EQ(integrate_jump(with_window(id, MarkWindow::large(2.0)), events_view()), 1.0);
}

TEST(IntegrateJump, SeesStrictPast) {
  const Integrand count{[](double, double, const HistoryView& h) { return double(h.count()); }};
  EXPECT_EQ(integrate_jump(count, events_view()), 3.0);
}

TEST(IntegrateJump, EmptyWindow) {
  const auto id = mark_integrand([](double z) { return z; }, MarkWindow::truncation(1.0));
  EXPECT_EQ(integrate_jump(id, events_view()), 0.0);
  EXPECT_EQ(compensator_integral(id, kUniform, events_view(), 2.0), 0.0);
}

TEST(CompensatorIntegral, Examples) {
  const HistoryView none{};
  EXPECT_NEAR(compensator_integral(mark_integrand([](double z) { return z; }), kUniform, none, 1.0),
              1.0, 1e-12);
  EXPECT_NEAR(compensator_integral(mark_integrand([](double z) { return z * z; }), kUniform,
                                   none, 1.0),
              2.0 / 3.0, 1e-12);
  EXPECT_NEAR(compensator_integral(generic([](double z) { return z * z; }), kUniform, none, 1.0),
              2.0 / 3.0, 1e-9);
}

TEST(CompensatorIntegral, HawkesFactorizedMatchesQuadrature) {
  const WakaraseMeasure mu =
      DensityForm{Hawkes{1.0, ExponentialKernel{1.0, 2.0}}, UniformLaw{0.0, 2.0, 1.0}};
  auto rng = derive_stream(40, 0);
  const auto path = simulate_mesugaki(mu, 4.0, rng);
  const auto fast = compensator_integral(mark_integrand([](double z) { return z; }), mu, path, 4.0);
  const auto slow = compensator_integral(generic([](double z) { return z; }), mu, path, 4.0, 1e-4);
  const double expect = compensator(Hawkes{1.0, ExponentialKernel{1.0, 2.0}}, path.view(), 4.0);
  EXPECT_NEAR(fast, expect, 1e-12);
  EXPECT_NEAR(slow, expect, 1e-6);
}

TEST(CompensatorIntegral, DivergenceThrows) {
  const WakaraseMeasure mu = DensityForm{Homogeneous{1.0}, PowerLaw{0.5, 0.5, 1.0}};
  EXPECT_THROW(compensator_integral(mark_integrand([](double z) { return 1.0 / z; }), mu,
                                    HistoryView{}, 1.0),
               IntegrabilityError);
}

TEST(IntegrateCompensated, IsometryCompoundPoisson) {
  const auto id = mark_integrand([](double z) { return z; });
  const std::size_t n = 40000;
  const auto x = parallel_map(n, 4, [&](std::size_t i) {
    auto rng = derive_stream(41, i);
    return integrate_compensated(id, kUniform, simulate_mesugaki(kUniform, 1.0, rng), 1.0);
  });
  const auto s = mean_stats(x);
  EXPECT_NEAR(s.mean, 0.0, 4.0 * s.standard_error);
  std::vector<double> sq;
  for (double v : x) sq.push_back(v * v);
  const auto q = mean_stats(sq);
  EXPECT_NEAR(q.mean, 2.0 / 3.0, 4.0 * q.standard_error);
}

TEST(IntegrateCompensated, HistoryDependentIntegrandIsCentered) {
  // theta = 1 / (1 + N_{t-}) against a Hawkes rate.
  const WakaraseMeasure mu =
      DensityForm{Hawkes{1.0, ExponentialKernel{1.0, 2.0}}, UniformLaw{0.0, 1.0, 1.0}};
  const Integrand theta{
      [](double, double z, const HistoryView& h) { return z / (1.0 + double(h.count())); }};
  const std::size_t n = 4000;
  const auto x = parallel_map(n, 4, [&](std::size_t i) {
    auto rng = derive_stream(42, i);
    return integrate_compensated(theta, mu, simulate_mesugaki(mu, 2.0, rng), 2.0, 1e-2);
  });
  const auto s = mean_stats(x);
  EXPECT_NEAR(s.mean, 0.0, 4.0 * s.standard_error);
}

TEST(TruncationSweep, TailBoundMatchesOracle) {
  const WakaraseMeasure mu = DensityForm{Homogeneous{2.0}, PowerLaw{0.5, 0.5, 1.0}};
  const auto id = mark_integrand([](double z) { return z; });
  const auto r = truncation_sweep(id, mu, 1.0, 4000, 43, {2, 4, 8}, {1e-3, 4});
  ASSERT_EQ(r.pairs.size(), 2u);
  for (const auto& p : r.pairs) {
    const double expect =
        2.0 * oracle::gk([](double z) { return z * z * 0.5 / std::sqrt(z); }, 0.0, 1.0 / p.n);
    EXPECT_NEAR(p.tail_bound, expect, 1e-10);
    EXPECT_FALSE(p.flag);
    EXPECT_LE(p.empirical_l2_diff, p.tail_bound + 4.0 * p.standard_error);
  }
  EXPECT_FALSE(r.any_flag);
}

TEST(TruncationSweep, SupportExhaustedLargeJumps) {
  const auto id = mark_integrand([](double z) { return z; });
  const auto r = truncation_sweep(id, kUniform, 1.0, 200, 44, {2, 4, 8});
  for (const auto& l : r.large) {
    EXPECT_EQ(l.zero_fraction, 1.0);
    EXPECT_EQ(l.max_sup, 0.0);
  }
  for (double s : r.stabilized_at) EXPECT_EQ(s, 2.0);
}

TEST(TruncationSweep, LargeJumpsStabilize) {
  const WakaraseMeasure mu = DensityForm{Homogeneous{1.0}, ExponentialLaw{0.5, 1.0}};
  const auto id = mark_integrand([](double z) { return z; });
  const auto r = truncation_sweep(id, mu, 1.0, 500, 45, {2, 4, 8, 64});
  for (double s : r.stabilized_at) EXPECT_FALSE(std::isnan(s));
  EXPECT_LE(r.large.back().median_sup, r.large.front().median_sup);
}

TEST(TruncationSweep, RejectsBadWindows) {
  const auto id = mark_integrand([](double z) { return z; });
  EXPECT_THROW(truncation_sweep(id, kUniform, 1.0, 10, 1, {2}), DomainError);
  EXPECT_THROW(truncation_sweep(id, kUniform, 1.0, 10, 1, {4, 2}), DomainError);
  EXPECT_THROW(truncation_sweep(id, kUniform, 1.0, 10, 1, {0.5, 2}), DomainError);
}
