#pragma once

// Single-jump counting processes with path-dependent intensity
// lambda(t | F_t): simulation by Ogata thinning and compensator evaluation.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mesugaki/core.hpp"
#include "mesugaki/quadrature.hpp"
#include "mesugaki/rng.hpp"

namespace mesugaki {

//---------------------------------------------------------------------------//
// Intensity models
//---------------------------------------------------------------------------//

struct Homogeneous {
  double rate = 0.0;
};

/// Deterministic lambda(t). Without `bound` the dominating rate is found by
/// sampling the lookahead window.
struct Deterministic {
  std::function<double(double)> rate;
  std::optional<double> bound;
};

/// lambda(t | F_t) = phi(X_t) for a recorded driving path X.
struct Cox {
  std::function<double(double)> phi;
  std::shared_ptr<const DrivingPath> driving;
  std::optional<double> bound;
};

/// psi(u) = alpha * exp(-beta * u)
struct ExponentialKernel {
  double alpha = 0.0;
  double beta = 1.0;
};

/// Arbitrary nonincreasing kernel. `integral` is the branching ratio
/// int_0^inf psi; `support` is where psi drops below 1e-12 and is cut off.
struct GeneralKernel {
  std::function<double(double)> psi;
  double integral = 0.0;
  double support = kInf;
};

inline GeneralKernel make_kernel(std::function<double(double)> psi,
                                 double integral) {
  double support = 1.0;
  while (psi(support) >= 1e-12 && support < 1e12) support *= 2.0;
  return GeneralKernel{std::move(psi), integral, support};
}

using HawkesKernel = std::variant<ExponentialKernel, GeneralKernel>;

/// lambda(t | F_t) = base + sum_{s < t} psi(t - s)
struct Hawkes {
  double base = 0.0;
  HawkesKernel kernel;
};

/// User rule (t, F_t) -> rate. `bound(t, F_t, lookahead)` must dominate the
/// rule on [t, t + lookahead) when no new events arrive.
struct Custom {
  std::function<double(double, const HistoryView&)> rule;
  std::function<double(double, const HistoryView&, double)> bound;
};

using IntensityModel = std::variant<Homogeneous, Deterministic, Cox, Hawkes, Custom>;

inline double kernel_value(const HawkesKernel& k, double u) {
  if (u < 0.0) return 0.0;
  if (const auto* e = std::get_if<ExponentialKernel>(&k)) {
    return e->alpha * std::exp(-e->beta * u);
  }
  const auto& g = std::get<GeneralKernel>(k);
  return u >= g.support ? 0.0 : g.psi(u);
}

/// int_0^u psi
inline double kernel_integral(const HawkesKernel& k, double u) {
  if (u <= 0.0) return 0.0;
  if (const auto* e = std::get_if<ExponentialKernel>(&k)) {
    return e->alpha / e->beta * -std::expm1(-e->beta * u);
  }
  const auto& g = std::get<GeneralKernel>(k);
  return adaptive_simpson(g.psi, 0.0, std::min(u, g.support), 1e-12);
}

inline double branching_ratio(const HawkesKernel& k) {
  if (const auto* e = std::get_if<ExponentialKernel>(&k)) {
    return e->alpha / e->beta;
  }
  return std::get<GeneralKernel>(k).integral;
}

/// Throws DomainError when parameters are out of range. With
/// `for_simulation`, Hawkes kernels must also be subcritical.
inline void validate_model(const IntensityModel& model,
                           bool for_simulation = true) {
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Homogeneous>) {
          if (!(m.rate >= 0.0) || !std::isfinite(m.rate)) {
            throw DomainError("homogeneous rate must be finite and >= 0");
          }
        } else if constexpr (std::is_same_v<M, Deterministic>) {
          if (!m.rate) throw DomainError("deterministic rate function missing");
        } else if constexpr (std::is_same_v<M, Cox>) {
          if (!m.phi || !m.driving) {
            throw DomainError("cox model needs phi and a driving path");
          }
        } else if constexpr (std::is_same_v<M, Hawkes>) {
          if (!(m.base > 0.0)) throw DomainError("hawkes base rate must be > 0");
          if (const auto* e = std::get_if<ExponentialKernel>(&m.kernel)) {
            if (!(e->alpha >= 0.0) || !(e->beta > 0.0)) {
              throw DomainError("hawkes kernel needs alpha >= 0, beta > 0");
            }
          }
          if (for_simulation && !(branching_ratio(m.kernel) < 1.0)) {
            throw DomainError(
                "hawkes kernel is not stable: integral of psi must be < 1");
          }
        } else {
          if (!m.rule) throw DomainError("custom intensity rule missing");
        }
      },
      model);
}

inline bool is_history_free(const IntensityModel& model) {
  return std::holds_alternative<Homogeneous>(model) ||
         std::holds_alternative<Deterministic>(model) ||
         std::holds_alternative<Cox>(model);
}

namespace detail {

inline double checked_rate(double r) {
  if (!(r >= 0.0)) {
    throw ContractViolation("intensity rule returned a negative or NaN rate");
  }
  return r;
}

/// Hawkes excitation from every event in `events` that precedes t.
inline double hawkes_excitation(const Hawkes& h, double t,
                                std::span<const JumpEvent> events) {
  double sum = 0.0;
  if (const auto* e = std::get_if<ExponentialKernel>(&h.kernel)) {
    for (const auto& ev : events) sum += std::exp(-e->beta * (t - ev.time));
    return e->alpha * sum;
  }
  const auto& g = std::get<GeneralKernel>(h.kernel);
  for (auto it = events.rbegin(); it != events.rend(); ++it) {
    const double u = t - it->time;
    if (u >= g.support) break;
    sum += g.psi(u);
  }
  return sum;
}

/// Rate given a history that already excludes events at or after t.
inline double rate_of(const IntensityModel& model, double t,
                      const HistoryView& past) {
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Homogeneous>) {
          return m.rate;
        } else if constexpr (std::is_same_v<M, Deterministic>) {
          return checked_rate(m.rate(t));
        } else if constexpr (std::is_same_v<M, Cox>) {
          return checked_rate(m.phi(m.driving->value_at(t)));
        } else if constexpr (std::is_same_v<M, Hawkes>) {
          return m.base + hawkes_excitation(m, t, past.events);
        } else {
          return checked_rate(m.rule(t, past));
        }
      },
      model);
}

/// Sup of fn over [a, b]: 65 samples, then golden-section refinement
/// around the best sample.
template <class Fn>
double sampled_sup(Fn&& fn, double a, double b) {
  constexpr int n = 64;
  const double h = (b - a) / n;
  int best = 0;
  double best_value = fn(a);
  for (int i = 1; i <= n; ++i) {
    const double v = fn(i == n ? b : a + i * h);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  double lo = a + std::max(0, best - 1) * h;
  double hi = std::min(b, a + (best + 1) * h);
  constexpr double phi = 0.6180339887498949;
  for (int it = 0; it < 60 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
    const double x1 = hi - phi * (hi - lo);
    const double x2 = lo + phi * (hi - lo);
    const double f1 = fn(x1);
    const double f2 = fn(x2);
    best_value = std::max({best_value, f1, f2});
    if (f1 > f2) {
      hi = x2;
    } else {
      lo = x1;
    }
  }
  return best_value;
}

/// Lookahead window used by the thinning loop for `model`.
inline double lookahead_for(const IntensityModel& model, double t,
                            double horizon) {
  const double rest = horizon - t;
  if (const auto* d = std::get_if<Deterministic>(&model); d && !d->bound) {
    return std::min(rest, std::max(horizon / 32.0, 1e-12));
  }
  if (const auto* c = std::get_if<Cox>(&model); c && !c->bound) {
    return std::min(rest, std::max(horizon / 32.0, 1e-12));
  }
  return rest;
}

/// Ogata thinning on (origin, horizon].
///
/// `bound(t)` returns {B, until}: B dominates the intensity on (t, until]
/// given the events accepted so far. `rate(t)` is the left-limit intensity at
/// a candidate. `accept(t)` records an accepted event.
template <class Bound, class Rate, class Accept>
void thin(double origin, double horizon, RngStream& rng, std::size_t cap,
          Bound&& bound, Rate&& rate, Accept&& accept) {
  double t = origin;
  double last = -kInf;
  std::size_t accepted = 0;
  while (t < horizon) {
    auto [B, until] = bound(t);
    until = std::min(until, horizon);
    if (!(until > t)) until = horizon;
    if (!(B >= 0.0) || std::isinf(B)) {
      throw ContractViolation("dominating rate must be finite and >= 0");
    }
    if (B == 0.0) {
      t = until;
      continue;
    }
    const double w = rng.exponential(B);
    if (t + w > until) {
      t = until;
      continue;
    }
    t += w;
    const double lam = rate(t);
    if (!(lam >= 0.0)) throw ContractViolation("intensity is negative or NaN");
    if (lam > B * (1.0 + 1e-9)) {
      throw ContractViolation("intensity exceeded its dominating rate at t=" +
                              std::to_string(t));
    }
    if (rng.uniform() * B <= lam) {
      if (t == last) continue;  // floating-point tie: redraw
      if (++accepted > cap) {
        throw RunawayError("event cap exceeded (" + std::to_string(cap) +
                           " events)");
      }
      accept(t);
      last = t;
    }
  }
}

}  // namespace detail

//---------------------------------------------------------------------------//
// Operations
//---------------------------------------------------------------------------//

/// lambda(t | F_t); only events strictly before t are visible to the model.
inline double intensity_at(const IntensityModel& model, double t,
                           const HistoryView& history) {
  if (t < history.origin) {
    throw DomainError("intensity_at: t precedes the history origin");
  }
  return detail::rate_of(model, t, history.before(t));
}

inline double intensity_at(const IntensityModel& model, double t,
                           const PathHistory& history) {
  return intensity_at(model, t, history.view());
}

/// Upper bound on the intensity over [t, t + lookahead) assuming no new
/// events. Events at time t itself count as already happened.
inline double dominating_rate(const IntensityModel& model, double t,
                              const HistoryView& history, double lookahead) {
  if (!(lookahead > 0.0)) throw DomainError("lookahead must be positive");
  const double end = t + lookahead;
  const HistoryView upto = history.before(std::nextafter(t, kInf));
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Homogeneous>) {
          return m.rate;
        } else if constexpr (std::is_same_v<M, Deterministic>) {
          if (m.bound) return *m.bound;
          return detail::sampled_sup(
              [&](double s) { return detail::checked_rate(m.rate(s)); }, t, end);
        } else if constexpr (std::is_same_v<M, Cox>) {
          if (m.bound) return *m.bound;
          double sup = detail::sampled_sup(
              [&](double s) {
                return detail::checked_rate(m.phi(m.driving->value_at(s)));
              },
              t, end);
          for (double k : m.driving->knots_between(t, end)) {
            sup = std::max(sup, m.phi(m.driving->value_at(k)));
          }
          return sup;
        } else if constexpr (std::is_same_v<M, Hawkes>) {
          // Kernel is nonincreasing, so the current intensity dominates.
          return m.base + detail::hawkes_excitation(m, t, upto.events);
        } else {
          if (!m.bound) {
            throw UnsupportedError("custom intensity has no declared bound");
          }
          return m.bound(t, upto, lookahead);
        }
      },
      model);
}

inline double dominating_rate(const IntensityModel& model, double t,
                              const PathHistory& history, double lookahead) {
  return dominating_rate(model, t, history.view(), lookahead);
}

struct SimulationOptions {
  std::size_t max_events = 10'000'000;
};

/// Event times on (0, horizon] with mark 1.
inline std::vector<JumpEvent> simulate_counting(
    const IntensityModel& model, double horizon, RngStream& rng,
    const SimulationOptions& options = {}) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError("simulate_counting: horizon must be positive");
  }
  validate_model(model, true);
  std::vector<JumpEvent> events;

  if (const auto* h = std::get_if<Hawkes>(&model)) {
    if (const auto* k = std::get_if<ExponentialKernel>(&h->kernel)) {
      // O(1) recursion: excitation `level` as of time `stamp`.
      double level = 0.0;
      double stamp = 0.0;
      auto current = [&](double t) {
        return h->base + level * std::exp(-k->beta * (t - stamp));
      };
      detail::thin(
          0.0, horizon, rng, options.max_events,
          [&](double t) { return std::pair{current(t), horizon}; }, current,
          [&](double t) {
            level = level * std::exp(-k->beta * (t - stamp)) + k->alpha;
            stamp = t;
            events.push_back({t, 1.0});
          });
      return events;
    }
  }

  auto view = [&] {
    return HistoryView{std::span<const JumpEvent>(events), nullptr, 0.0};
  };
  detail::thin(
      0.0, horizon, rng, options.max_events,
      [&](double t) {
        const double la = detail::lookahead_for(model, t, horizon);
        return std::pair{dominating_rate(model, t, view(), la), t + la};
      },
      [&](double t) { return detail::rate_of(model, t, view()); },
      [&](double t) { events.push_back({t, 1.0}); });
  return events;
}

namespace detail {

inline std::vector<double> compensator_breaks(const IntensityModel& model) {
  if (const auto* c = std::get_if<Cox>(&model)) return c->driving->times();
  return {};
}

inline double closed_form_compensator(const IntensityModel& model,
                                      const HistoryView& history, double t) {
  const double span = t - history.origin;
  if (const auto* h = std::get_if<Homogeneous>(&model)) return h->rate * span;
  const auto& hk = std::get<Hawkes>(model);
  double total = hk.base * span;
  for (const auto& e : history.before(t).events) {
    total += kernel_integral(hk.kernel, t - e.time);
  }
  return total;
}

}  // namespace detail

/// int_origin^t lambda(s | F_s) ds along the realized history.
///
/// Closed form for homogeneous and Hawkes models; otherwise a composite
/// trapezoid with spacing `quad_step`, split at jump times.
inline double compensator(const IntensityModel& model,
                          const HistoryView& history, double t,
                          double quad_step = 1e-3) {
  if (t < history.origin) throw DomainError("compensator: t precedes origin");
  if (std::holds_alternative<Homogeneous>(model) ||
      std::holds_alternative<Hawkes>(model)) {
    return detail::closed_form_compensator(model, history, t);
  }
  const auto breaks = detail::compensator_breaks(model);
  return integrate_along_path(
      history, t, quad_step,
      [&](double s, const HistoryView& past) {
        return detail::rate_of(model, s, past);
      },
      breaks);
}

inline double compensator(const IntensityModel& model,
                          const PathHistory& history, double t,
                          double quad_step = 1e-3) {
  return compensator(model, history.view(), t, quad_step);
}

/// Compensator at each of the sorted `times` in one pass.
inline std::vector<double> compensator_at(const IntensityModel& model,
                                          const HistoryView& history,
                                          std::span<const double> times,
                                          double quad_step = 1e-3) {
  if (std::holds_alternative<Homogeneous>(model) ||
      std::holds_alternative<Hawkes>(model)) {
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
      out.push_back(detail::closed_form_compensator(model, history, t));
    }
    return out;
  }
  const auto breaks = detail::compensator_breaks(model);
  return cumulative_along_path(
      history, times, quad_step,
      [&](double s, const HistoryView& past) {
        return detail::rate_of(model, s, past);
      },
      breaks);
}

}  // namespace mesugaki
