#pragma once

// Quadrature helpers: adaptive Simpson for mark integrals and a composite
// trapezoid that integrates history-dependent rates along a realized path,
// splitting at jump times so each piece is evaluated with a fixed history.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "mesugaki/core.hpp"

namespace mesugaki {

namespace detail {

template <class F>
double simpson_recurse(F& f, double a, double b, double fa, double fm,
                       double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  // Relative floor: an absolute target below rounding never converges.
  const double target = std::max(tol, 1e-14 * std::abs(left + right));
  if (depth <= 0 || std::abs(delta) <= 15.0 * target || !std::isfinite(delta)) {
    return left + right + delta / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson on [a, b] with absolute tolerance `tol`.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-10,
                        int max_depth = 48) {
  if (!(b > a)) return 0.0;
  // Pre-split into a few panels so narrow features are not stepped over.
  constexpr int panels = 8;
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double lo = a + i * h;
    const double hi = (i + 1 == panels) ? b : lo + h;
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
    total += detail::simpson_recurse(f, lo, hi, flo, fm, fhi, whole,
                                     tol / panels, max_depth);
  }
  return total;
}

/// Composite trapezoid on [a, b] with at most `step` spacing.
template <class F>
double trapezoid(F&& f, double a, double b, double step) {
  if (!(b > a)) return 0.0;
  const auto n = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil((b - a) / step - 1e-9)));
  const double h = (b - a) / static_cast<double>(n);
  double sum = 0.5 * (f(a) + f(b));
  for (std::size_t i = 1; i < n; ++i) sum += f(a + static_cast<double>(i) * h);
  return sum * h;
}

/// Cumulative integrals of g(s, F_s) along a realized path, reported at the
/// sorted `query_times`.
///
/// The time axis is split at every jump time (and at `extra_breaks`); on each
/// piece the integrand sees the strict left-limit history, and a piece that
/// starts at a jump time is evaluated one ulp to the right so the jump is
/// already part of the history there.
template <class G>
std::vector<double> cumulative_along_path(const HistoryView& path,
                                          std::span<const double> query_times,
                                          double step, G&& g,
                                          std::span<const double> extra_breaks = {}) {
  std::vector<double> out(query_times.size(), 0.0);
  if (query_times.empty()) return out;
  const double origin = path.origin;
  const double end = query_times.back();

  struct Break {
    double time;
    bool is_jump;
  };
  std::vector<Break> breaks;
  breaks.reserve(path.events.size() + extra_breaks.size() + query_times.size());
  for (const auto& e : path.events) {
    if (e.time > origin && e.time < end) breaks.push_back({e.time, true});
  }
  for (double b : extra_breaks) {
    if (b > origin && b < end) breaks.push_back({b, false});
  }
  for (double q : query_times) {
    if (q > origin && q < end) breaks.push_back({q, false});
  }
  breaks.push_back({end, false});
  std::stable_sort(breaks.begin(), breaks.end(),
                   [](const Break& x, const Break& y) { return x.time < y.time; });

  double acc = 0.0;
  double left = origin;
  bool left_is_jump = !path.events.empty() && path.events.front().time == origin;
  std::size_t q = 0;
  auto flush = [&](double t) {
    while (q < query_times.size() && query_times[q] <= t) out[q++] = acc;
  };
  flush(origin);
  for (const auto& br : breaks) {
    if (br.time > left) {
      const double a = left;
      const bool nudge = left_is_jump;
      auto eval = [&](double s) {
        const double at = (nudge && s == a) ? std::nextafter(a, kInf) : s;
        return g(at, path.before(at));
      };
      acc += trapezoid(eval, a, br.time, step);
      left = br.time;
      left_is_jump = br.is_jump;
    } else {
      left_is_jump = left_is_jump || br.is_jump;
    }
    flush(left);
  }
  flush(kInf);
  return out;
}

template <class G>
double integrate_along_path(const HistoryView& path, double horizon,
                            double step, G&& g,
                            std::span<const double> extra_breaks = {}) {
  const double q[] = {horizon};
  return cumulative_along_path(path, q, step, std::forward<G>(g),
                               extra_breaks)[0];
}

}  // namespace mesugaki
