#pragma once

// Stochastic integrals against the random measure of a Mesugaki path: the
// pathwise jump integral, its compensator, the compensated integral on a
// truncation window, and the truncation sweep over windows (1/n, n).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "mesugaki/construction.hpp"
#include "mesugaki/core.hpp"
#include "mesugaki/mark_law.hpp"
#include "mesugaki/parallel.hpp"
#include "mesugaki/point_process.hpp"
#include "mesugaki/wakarase.hpp"

namespace mesugaki {

/// Window on |z|; the default is every nonzero mark.
struct MarkWindow {
  double lo = 0.0;
  double hi = kInf;
  bool lo_closed = false;
  bool hi_closed = false;

  static MarkWindow open(double a, double b) { return {a, b, false, false}; }
  /// (1/n, n)
  static MarkWindow truncation(double n) { return open(1.0 / n, n); }
  /// [1, n]; the large-jump window
  static MarkWindow large(double n) { return {1.0, n, true, true}; }

  bool contains(double z) const { return to_interval().contains(std::abs(z)); }

  Interval to_interval() const { return {lo, hi, lo_closed, hi_closed}; }

  /// The window as a set of signed marks.
  IntervalSet marks() const {
    const Interval pos = to_interval();
    if (pos.empty()) return {};
    return {pos.mirrored(), pos};
  }
};

/// theta(t, z, F_t). The history passed in never holds events at or after t.
struct Integrand {
  std::function<double(double, double, const HistoryView&)> rule;
  MarkWindow window{};
  /// theta depends on z only; enables closed-form compensators.
  bool mark_only = false;
};

inline Integrand mark_integrand(std::function<double(double)> g,
                                MarkWindow window = {}) {
  return Integrand{[g = std::move(g)](double, double z, const HistoryView&) { return g(z); },
                   window, true};
}

inline Integrand with_window(Integrand theta, MarkWindow window) {
  theta.window = window;
  return theta;
}

/// sum over events (tau_k, z_k) with z_k in the window of
/// theta(tau_k, z_k, F_{tau_k-}), for events with tau_k <= horizon.
inline double integrate_jump(const Integrand& theta, const HistoryView& path,
                             double horizon = kInf) {
  double s = 0.0;
  for (std::size_t k = 0; k < path.events.size(); ++k) {
    const auto& e = path.events[k];
    if (e.time > horizon) break;
    if (!theta.window.contains(e.mark)) continue;
    HistoryView past = path;
    past.events = path.events.first(k);
    s += theta.rule(e.time, e.mark, past);
  }
  return s;
}

inline double integrate_jump(const Integrand& theta, const MesugakiPath& path,
                             double horizon = kInf) {
  return integrate_jump(theta, path.view(), horizon);
}

namespace detail {

inline bool has_factorized_compensator(const Integrand& theta,
                                       const WakaraseMeasure& mu) {
  const auto* d = std::get_if<DensityForm>(&mu);
  return theta.mark_only && d && !d->law.history_dependent();
}

inline double checked_integral(double v) {
  if (!std::isfinite(v)) {
    throw IntegrabilityError("compensator integral is not finite");
  }
  return v;
}

}  // namespace detail

/// int_0^T int_window theta(s, z) mu(dz; F_s) ds along the path's history.
///
/// A mark-only integrand against a density-form measure with a fixed mark
/// law factorizes into int theta dp times the rate compensator, which is
/// closed form for homogeneous and Hawkes rates. Otherwise a trapezoid in
/// time, split at the path's jump times.
inline double compensator_integral(const Integrand& theta,
                                   const WakaraseMeasure& mu,
                                   const HistoryView& path, double horizon,
                                   double quad_step = 1e-3) {
  if (!(horizon >= path.origin)) throw DomainError("horizon precedes origin");
  const IntervalSet set = theta.window.marks();
  if (set.empty()) return 0.0;
  if (detail::has_factorized_compensator(theta, mu)) {
    const auto& d = std::get<DensityForm>(mu);
    auto f = [&](double z) { return theta.rule(0.0, z, path); };
    const double inner = detail::checked_integral(integrate(d.law, f, set));
    if (inner == 0.0) return 0.0;
    return detail::checked_integral(
        inner * compensator(d.total_rate, path, horizon, quad_step));
  }
  std::vector<double> breaks;
  if (const auto* d = std::get_if<DensityForm>(&mu)) {
    breaks = detail::compensator_breaks(d->total_rate);
  }
  return detail::checked_integral(integrate_along_path(
      path, horizon, quad_step,
      [&](double s, const HistoryView& past) {
        return integrate_marks(
            mu, [&](double z) { return theta.rule(s, z, past); }, set, s, past);
      },
      breaks));
}

inline double compensator_integral(const Integrand& theta,
                                   const WakaraseMeasure& mu,
                                   const MesugakiPath& path, double horizon,
                                   double quad_step = 1e-3) {
  return compensator_integral(theta, mu, path.view(), horizon, quad_step);
}

/// integrate_jump - compensator_integral on the same window.
inline double integrate_compensated(const Integrand& theta,
                                    const WakaraseMeasure& mu,
                                    const HistoryView& path, double horizon,
                                    double quad_step = 1e-3) {
  return integrate_jump(theta, path, horizon) -
         compensator_integral(theta, mu, path, horizon, quad_step);
}

inline double integrate_compensated(const Integrand& theta,
                                    const WakaraseMeasure& mu,
                                    const MesugakiPath& path, double horizon,
                                    double quad_step = 1e-3) {
  return integrate_compensated(theta, mu, path.view(), horizon, quad_step);
}

//---------------------------------------------------------------------------//
// Truncation sweep
//---------------------------------------------------------------------------//

struct WindowPairStats {
  double n = 0.0;
  double m = 0.0;
  double empirical_l2_diff = 0.0;  // E|M^m_T - M^n_T|^2
  double standard_error = 0.0;
  double tail_bound = 0.0;  // E int_0^T int_{|z| outside (1/n, n)} theta^2 mu
  bool flag = false;
};

struct LargeJumpPairStats {
  double n = 0.0;
  double m = 0.0;
  double median_sup = 0.0;  // sup_t |L^m_t - L^n_t|
  double max_sup = 0.0;
  double zero_fraction = 0.0;
};

struct SweepReport {
  double horizon = 0.0;
  std::size_t paths = 0;
  std::vector<double> windows;
  std::vector<WindowPairStats> pairs;
  std::vector<LargeJumpPairStats> large;
  /// Per path, the first window n whose large-jump integral equals the
  /// largest window's.
  std::vector<double> stabilized_at;
  bool any_flag = false;
};

struct SweepOptions {
  double quad_step = 1e-3;
  unsigned threads = 1;
  double z_threshold = 4.0;
  SimulationOptions simulation{};
};

namespace detail {

/// int_0^T int_{outside window} theta^2 mu along a history.
inline double tail_second_moment(const Integrand& theta,
                                 const WakaraseMeasure& mu,
                                 const HistoryView& path, double horizon,
                                 const MarkWindow& window, double quad_step) {
  const Interval w = window.to_interval();
  const MarkWindow below{0.0, w.lo, false, !w.lo_closed};
  const MarkWindow above{w.hi, kInf, !w.hi_closed, false};
  double total = 0.0;
  for (const auto& part : {below, above}) {
    if (part.to_interval().empty()) continue;
    Integrand sq = theta;
    sq.window = part;
    sq.rule = [&theta](double t, double z, const HistoryView& h) {
      const double v = theta.rule(t, z, h);
      return v * v;
    };
    total += compensator_integral(sq, mu, path, horizon, quad_step);
  }
  return total;
}

/// sup_t |sum_{tau_k <= t, |z_k| in (n, m]} theta| along one path.
inline double shell_sup(const Integrand& theta, const HistoryView& path,
                        double n, double m, double horizon) {
  double acc = 0.0;
  double sup = 0.0;
  for (std::size_t k = 0; k < path.events.size(); ++k) {
    const auto& e = path.events[k];
    if (e.time > horizon) break;
    const double a = std::abs(e.mark);
    if (!(a > n && a <= m)) continue;
    HistoryView past = path;
    past.events = path.events.first(k);
    acc += theta.rule(e.time, e.mark, past);
    sup = std::max(sup, std::abs(acc));
  }
  return sup;
}

}  // namespace detail

/// Compensated integrals M^n on windows (1/n, n) and large-jump integrals
/// L^n on [1, n], over paths simulated directly from mu. Path i uses
/// derive_stream(master_seed, i).
inline SweepReport truncation_sweep(const Integrand& theta,
                                    const WakaraseMeasure& mu, double horizon,
                                    std::size_t n_paths, std::uint64_t master_seed,
                                    std::vector<double> windows,
                                    const SweepOptions& options = {}) {
  if (windows.size() < 2) throw DomainError("need at least two windows");
  if (!std::is_sorted(windows.begin(), windows.end()) ||
      std::adjacent_find(windows.begin(), windows.end()) != windows.end() ||
      !(windows.front() >= 1.0)) {
    throw DomainError("windows must be increasing with n >= 1");
  }
  if (n_paths < 2) throw DomainError("need at least two paths");
  const std::size_t W = windows.size();
  const bool shared_compensator = theta.mark_only && is_history_free(mu);

  // For history-free mu and mark-only theta the compensators and bounds are
  // the same on every path.
  std::vector<double> fixed_comp(W, 0.0), fixed_bound(W, 0.0);
  if (shared_compensator) {
    const HistoryView empty{};
    for (std::size_t k = 0; k < W; ++k) {
      const auto w = MarkWindow::truncation(windows[k]);
      fixed_comp[k] = compensator_integral(with_window(theta, w), mu, empty,
                                           horizon, options.quad_step);
      fixed_bound[k] = detail::tail_second_moment(theta, mu, empty, horizon, w,
                                                  options.quad_step);
    }
  }

  struct PathResult {
    std::vector<double> M, bound, L, sup;
    double stabilized_at = 0.0;
  };
  const auto results = parallel_map(n_paths, options.threads, [&](std::size_t i) {
    auto rng = derive_stream(master_seed, i);
    const auto path = simulate_mesugaki(mu, horizon, rng, options.simulation);
    const HistoryView v = path.view();
    PathResult r;
    for (std::size_t k = 0; k < W; ++k) {
      const auto w = MarkWindow::truncation(windows[k]);
      const double jump = integrate_jump(with_window(theta, w), v, horizon);
      const double comp = shared_compensator
                              ? fixed_comp[k]
                              : compensator_integral(with_window(theta, w), mu, v,
                                                     horizon, options.quad_step);
      r.M.push_back(jump - comp);
      if (!shared_compensator) {
        r.bound.push_back(detail::tail_second_moment(theta, mu, v, horizon, w,
                                                     options.quad_step));
      }
      r.L.push_back(integrate_jump(with_window(theta, MarkWindow::large(windows[k])),
                                   v, horizon));
    }
    for (std::size_t k = 0; k + 1 < W; ++k) {
      r.sup.push_back(detail::shell_sup(theta, v, windows[k], windows[k + 1], horizon));
    }
    r.stabilized_at = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < W; ++k) {
      if (r.L[k] == r.L.back()) {
        r.stabilized_at = windows[k];
        break;
      }
    }
    return r;
  });

  SweepReport report;
  report.horizon = horizon;
  report.paths = n_paths;
  report.windows = windows;
  const auto N = static_cast<double>(n_paths);
  for (std::size_t k = 0; k + 1 < W; ++k) {
    WindowPairStats s;
    s.n = windows[k];
    s.m = windows[k + 1];
    double sum = 0.0, sum2 = 0.0, bound = 0.0;
    std::vector<double> sups;
    for (const auto& r : results) {
      const double d = r.M[k + 1] - r.M[k];
      sum += d * d;
      sum2 += d * d * d * d;
      if (!shared_compensator) bound += r.bound[k];
      sups.push_back(r.sup[k]);
    }
    s.empirical_l2_diff = sum / N;
    s.standard_error = std::sqrt(
        std::max(0.0, (sum2 - N * s.empirical_l2_diff * s.empirical_l2_diff) / (N - 1)) / N);
    s.tail_bound = shared_compensator ? fixed_bound[k] : bound / N;
    s.flag = s.empirical_l2_diff > s.tail_bound + options.z_threshold * s.standard_error;
    report.any_flag = report.any_flag || s.flag;
    report.pairs.push_back(s);

    LargeJumpPairStats l;
    l.n = s.n;
    l.m = s.m;
    std::sort(sups.begin(), sups.end());
    l.median_sup = sups[sups.size() / 2];
    l.max_sup = sups.back();
    l.zero_fraction =
        static_cast<double>(std::count(sups.begin(), sups.end(), 0.0)) / N;
    report.large.push_back(l);
  }
  for (const auto& r : results) report.stabilized_at.push_back(r.stabilized_at);
  return report;
}

}  // namespace mesugaki
