#pragma once

// Jump-adapted Euler simulation of
//   X_t = X_0 + int a ds + int b dB + int int_{|z|>=1} h1 N + int int_{|z|<1} h2 (N - mu ds)
// with an exact ledger of every jump, and the Ito-formula reconstruction of
// f(X_T) from the same Brownian increments and jumps.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "mesugaki/core.hpp"
#include "mesugaki/mark_law.hpp"
#include "mesugaki/point_process.hpp"
#include "mesugaki/quadrature.hpp"
#include "mesugaki/rng.hpp"
#include "mesugaki/wakarase.hpp"

namespace mesugaki {

/// Coefficients see (t, X). The measure may read the state through
/// HistoryView::state, which holds X at the last grid node or jump.
struct SemimartingaleSpec {
  double x0 = 0.0;
  std::function<double(double, double)> drift;      // a(t, x)
  std::function<double(double, double)> diffusion;  // b(t, x)
  std::function<double(double, double, double)> h1;  // (t, z, x), |z| >= 1
  std::function<double(double, double, double)> h2;  // (t, z, x), |z| < 1
  WakaraseMeasure mu = DiscreteAtoms{};
  /// Subtract int_{|z|<1} h2 mu dt from the drift.
  bool compensate_small_jumps = true;
  std::shared_ptr<const DrivingPath> driving;
};

inline bool is_large_jump(double z) { return std::abs(z) >= 1.0; }

inline IntervalSet small_marks() {
  return {Interval::open(-1.0, 0.0), Interval::open(0.0, 1.0)};
}

struct JumpRecord {
  double time = 0.0;
  double mark = 0.0;
  double left_limit = 0.0;  // X_{tau-}
  double increment = 0.0;   // h1 or h2 applied
  bool large = false;
};

/// One Euler piece between consecutive grid nodes and jump times.
struct ContinuousSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  double x = 0.0;  // X at t0 (after any jump at t0)
  double drift = 0.0;
  double diffusion = 0.0;
  double compensator_drift = 0.0;  // int_{|z|<1} h2 mu, when compensated
  double dB = 0.0;
};

struct SemimartingalePath {
  double x0 = 0.0;
  double horizon = 0.0;
  std::vector<double> node_times;
  std::vector<double> node_values;
  std::vector<JumpRecord> jumps;
  std::vector<ContinuousSegment> segments;
  std::vector<JumpEvent> events;  // (tau, z) history of the random measure
  double final_value = 0.0;
};

struct EulerOptions {
  std::size_t max_events = 10'000'000;
};

namespace detail {

inline HistoryView state_view(const std::vector<JumpEvent>& events,
                              const DrivingPath* driving, double state) {
  HistoryView v{std::span<const JumpEvent>(events), driving, 0.0};
  v.state = state;
  return v;
}

}  // namespace detail

/// Euler steps on `grid`, with jump times found by thinning inside each
/// step. The measure sees the state frozen at the last node or jump; jump
/// sizes use the exact left limit X_{tau-}.
inline SemimartingalePath simulate_semimartingale(const SemimartingaleSpec& spec,
                                                  const TimeGrid& grid,
                                                  RngStream& rng,
                                                  const EulerOptions& options = {}) {
  validate_measure(spec.mu);
  SemimartingalePath path;
  path.x0 = spec.x0;
  path.horizon = grid.horizon();
  const DrivingPath* driving = spec.driving.get();
  const IntervalSet all = whole_line();
  const IntervalSet small = small_marks();

  double x = spec.x0;
  double frozen = x;
  double last = -kInf;
  path.node_times.push_back(0.0);
  path.node_values.push_back(x);

  auto view = [&] { return detail::state_view(path.events, driving, frozen); };

  auto advance = [&](double a, double b) {
    if (!(b > a)) return;
    ContinuousSegment seg;
    seg.t0 = a;
    seg.t1 = b;
    seg.x = x;
    const double dt = b - a;
    if (spec.drift) seg.drift = spec.drift(a, x);
    if (spec.diffusion) {
      seg.diffusion = spec.diffusion(a, x);
      seg.dB = std::sqrt(dt) * rng.normal();
    }
    if (spec.compensate_small_jumps && spec.h2) {
      // Just after a, so a jump at a is part of the history.
      const double s = std::nextafter(a, kInf);
      seg.compensator_drift = integrate_marks(
          spec.mu, [&](double z) { return spec.h2(a, z, x); }, small, s, view());
    }
    x += (seg.drift - seg.compensator_drift) * dt + seg.diffusion * seg.dB;
    path.segments.push_back(seg);
  };

  for (std::size_t i = 0; i < grid.steps(); ++i) {
    const double t0 = grid.node(i);
    const double t1 = grid.node(i + 1);
    frozen = x;
    double seg_start = t0;
    double s = t0;
    while (s < t1) {
      auto [B, until] = cell_bound(spec.mu, all, s, view(), t1);
      until = std::min(until, t1);
      if (!(until > s)) until = t1;
      if (!(B >= 0.0) || std::isinf(B)) {
        throw ContractViolation("dominating rate must be finite and >= 0");
      }
      const double cand = B > 0.0 ? s + rng.exponential(B) : kInf;
      if (cand > until) {
        s = until;
        continue;
      }
      s = cand;
      const double lam = total_rate(spec.mu, s, view());
      if (lam > B * (1.0 + 1e-9)) {
        throw ContractViolation("jump intensity exceeded its dominating rate");
      }
      if (!(rng.uniform() * B <= lam) || s == last || lam == 0.0) continue;
      if (path.events.size() >= options.max_events) {
        throw RunawayError("event cap exceeded (" +
                           std::to_string(options.max_events) + " events)");
      }
      advance(seg_start, s);
      const double z = sample_mark(spec.mu, s, view(), rng);
      JumpRecord rec;
      rec.time = s;
      rec.mark = z;
      rec.left_limit = x;
      rec.large = is_large_jump(z);
      const auto& h = rec.large ? spec.h1 : spec.h2;
      rec.increment = h ? h(s, z, x) : 0.0;
      x += rec.increment;
      path.jumps.push_back(rec);
      path.events.push_back({s, z});
      frozen = x;
      seg_start = s;
      last = s;
    }
    advance(seg_start, t1);
    path.node_times.push_back(t1);
    path.node_values.push_back(x);
  }
  path.final_value = x;
  return path;
}

//---------------------------------------------------------------------------//
// Ito residual
//---------------------------------------------------------------------------//

struct TestFunction {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
};

struct DerivativeCheck {
  bool ok = true;
  double worst_first = 0.0;   // relative error of f'
  double worst_second = 0.0;  // relative error of f''
};

/// Compare f' and f'' with central differences of f at `points`.
inline DerivativeCheck check_derivatives(const TestFunction& fn,
                                         std::span<const double> points,
                                         double tolerance = 1e-6) {
  DerivativeCheck out;
  for (double x : points) {
    const double scale = std::max(1.0, std::abs(x));
    const double h1 = 1e-5 * scale;
    const double h2 = 1e-4 * scale;
    const double d1 = (fn.f(x + h1) - fn.f(x - h1)) / (2.0 * h1);
    const double d2 = (fn.f(x + h2) - 2.0 * fn.f(x) + fn.f(x - h2)) / (h2 * h2);
    const double e1 = std::abs(d1 - fn.df(x)) / std::max(1.0, std::abs(fn.df(x)));
    const double e2 = std::abs(d2 - fn.d2f(x)) / std::max(1.0, std::abs(fn.d2f(x)));
    out.worst_first = std::max(out.worst_first, e1);
    out.worst_second = std::max(out.worst_second, e2);
  }
  out.ok = out.worst_first <= tolerance && out.worst_second <= tolerance;
  return out;
}

struct ItoResidual {
  double lhs = 0.0;  // f(X_T)
  double rhs = 0.0;  // compensated assembly
  double rhs_uncompensated = 0.0;
  double residual = 0.0;       // |lhs - rhs|
  double assembly_gap = 0.0;   // |rhs - rhs_uncompensated|
};

struct ItoOptions {
  double quad_step = 1e-3;
};

/// f(X_0) + sum over segments [f'(X)((a - c) dt + b dB) + f''(X) b^2 dt / 2]
/// + sum of large jumps f(X- + h1) - f(X-) + the small-jump term.
///
/// The small-jump term is assembled twice: as the compensated sum plus its
/// compensator, and as the plain sum. Both use X_{tau-} throughout.
inline ItoResidual ito_residual(const SemimartingaleSpec& spec,
                                const TestFunction& fn,
                                const SemimartingalePath& path,
                                const ItoOptions& options = {}) {
  ItoResidual out;
  out.lhs = fn.f(path.final_value);
  const IntervalSet small = small_marks();
  const DrivingPath* driving = spec.driving.get();

  double continuous = 0.0;
  double small_compensator = 0.0;
  for (const auto& seg : path.segments) {
    const double dt = seg.t1 - seg.t0;
    continuous += fn.df(seg.x) * ((seg.drift - seg.compensator_drift) * dt +
                                  seg.diffusion * seg.dB) +
                  0.5 * fn.d2f(seg.x) * seg.diffusion * seg.diffusion * dt;
    if (spec.h2 && spec.compensate_small_jumps) {
      const double fx = fn.f(seg.x);
      const HistoryView v = detail::state_view(path.events, driving, seg.x);
      auto inner = [&](double s) {
        const double at = std::max(s, std::nextafter(seg.t0, kInf));
        return integrate_marks(
            spec.mu,
            [&](double z) { return fn.f(seg.x + spec.h2(seg.t0, z, seg.x)) - fx; },
            small, at, v);
      };
      small_compensator += trapezoid(inner, seg.t0, seg.t1, options.quad_step);
    }
  }
  double large = 0.0;
  double small_sum = 0.0;
  for (const auto& j : path.jumps) {
    const double d = fn.f(j.left_limit + j.increment) - fn.f(j.left_limit);
    (j.large ? large : small_sum) += d;
  }
  const double base = fn.f(path.x0) + continuous + large;
  out.rhs = base + ((small_sum - small_compensator) + small_compensator);
  out.rhs_uncompensated = base + small_sum;
  out.residual = std::abs(out.lhs - out.rhs);
  out.assembly_gap = std::abs(out.rhs - out.rhs_uncompensated);
  return out;
}

inline ItoResidual ito_residual(const SemimartingaleSpec& spec,
                                const TestFunction& fn, const TimeGrid& grid,
                                RngStream& rng, const ItoOptions& options = {}) {
  return ito_residual(spec, fn, simulate_semimartingale(spec, grid, rng), options);
}

}  // namespace mesugaki
