#pragma once

// Conditional Levy ("Wakarase") measures mu(dz; F_t): discrete atoms with
// their own intensities, density form lambda(t | F_t) p(dz), and atoms chosen
// from the current history. Also the mark grid Z_n and the discretization
// that turns mu into atoms on Z_n.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "mesugaki/core.hpp"
#include "mesugaki/mark_law.hpp"
#include "mesugaki/parallel.hpp"
#include "mesugaki/point_process.hpp"
#include "mesugaki/quadrature.hpp"
#include "mesugaki/rng.hpp"

namespace mesugaki {

struct Atom {
  double mark = 1.0;
  IntensityModel rate;
};

/// mu(A; F_t) = sum_{i: z_i in A} lambda_i(t | F_t). Every atom intensity
/// sees the full marked history.
struct DiscreteAtoms {
  std::vector<Atom> atoms;
};

/// mu(dz; F_t) = lambda(t | F_t) p(dz | t, F_t)
struct DensityForm {
  IntensityModel total_rate;
  MarkLaw law;
};

struct AtomRate {
  double mark = 1.0;
  double rate = 0.0;
};

/// Atoms selected from the history (and from an SDE state carried in the
/// view). The rates may only change when the history or state changes.
struct DynamicAtoms {
  std::function<std::vector<AtomRate>(double, const HistoryView&)> atoms;
};

using WakaraseMeasure = std::variant<DiscreteAtoms, DensityForm, DynamicAtoms>;

namespace detail {

inline std::vector<AtomRate> checked_atoms(const DynamicAtoms& d, double t,
                                           const HistoryView& past) {
  auto atoms = d.atoms(t, past);
  for (const auto& a : atoms) {
    if (a.mark == 0.0 || !std::isfinite(a.mark)) {
      throw DomainError("atom marks must be nonzero");
    }
    if (!(a.rate >= 0.0)) throw ContractViolation("atom rate is negative");
  }
  return atoms;
}

}  // namespace detail

inline void validate_measure(const WakaraseMeasure& mu) {
  std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, DiscreteAtoms>) {
          std::vector<double> zs;
          for (const auto& a : m.atoms) {
            if (a.mark == 0.0 || !std::isfinite(a.mark)) {
              throw DomainError("atom marks must be finite and nonzero");
            }
            validate_model(a.rate, false);
            zs.push_back(a.mark);
          }
          std::sort(zs.begin(), zs.end());
          if (std::adjacent_find(zs.begin(), zs.end()) != zs.end()) {
            throw DomainError("atom marks must be distinct");
          }
        } else if constexpr (std::is_same_v<M, DensityForm>) {
          validate_model(m.total_rate, false);
          validate_law(m.law);
        } else {
          if (!m.atoms) throw DomainError("dynamic atom rule missing");
        }
      },
      mu);
}

/// mu(A; F_t). Only events strictly before t are visible.
inline double measure_of_set(const WakaraseMeasure& mu, const IntervalSet& set,
                             double t, const HistoryView& history) {
  if (t < history.origin) throw DomainError("measure_of_set: t before origin");
  const HistoryView past = history.before(t);
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, DiscreteAtoms>) {
          double s = 0.0;
          for (const auto& a : m.atoms) {
            if (contains(set, a.mark)) s += detail::rate_of(a.rate, t, past);
          }
          return s;
        } else if constexpr (std::is_same_v<M, DensityForm>) {
          const double p = mass(m.law, set, t, past);
          if (p == 0.0) return 0.0;
          return detail::rate_of(m.total_rate, t, past) * p;
        } else {
          double s = 0.0;
          for (const auto& a : detail::checked_atoms(m, t, past)) {
            if (contains(set, a.mark)) s += a.rate;
          }
          return s;
        }
      },
      mu);
}

inline double measure_of_set(const WakaraseMeasure& mu, const Interval& set,
                             double t, const HistoryView& history) {
  return measure_of_set(mu, IntervalSet{set}, t, history);
}

/// mu(R \ {0}; F_t)
inline double total_rate(const WakaraseMeasure& mu, double t,
                         const HistoryView& history) {
  return measure_of_set(mu, whole_line(), t, history);
}

/// int_A f(z) mu(dz; F_t)
template <class F>
double integrate_marks(const WakaraseMeasure& mu, F&& f, const IntervalSet& set,
                       double t, const HistoryView& history) {
  const HistoryView past = history.before(t);
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, DiscreteAtoms>) {
          double s = 0.0;
          for (const auto& a : m.atoms) {
            if (!contains(set, a.mark)) continue;
            const double r = detail::rate_of(a.rate, t, past);
            if (r != 0.0) s += r * f(a.mark);
          }
          return s;
        } else if constexpr (std::is_same_v<M, DensityForm>) {
          const double r = detail::rate_of(m.total_rate, t, past);
          if (r == 0.0) return 0.0;
          return r * integrate(m.law, f, set, t, past);
        } else {
          double s = 0.0;
          for (const auto& a : detail::checked_atoms(m, t, past)) {
            if (contains(set, a.mark) && a.rate != 0.0) s += a.rate * f(a.mark);
          }
          return s;
        }
      },
      mu);
}

/// True when mu(.; F_t) does not depend on the jump history.
inline bool is_history_free(const WakaraseMeasure& mu) {
  return std::visit(
      [](const auto& m) -> bool {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, DiscreteAtoms>) {
          return std::all_of(m.atoms.begin(), m.atoms.end(), [](const Atom& a) {
            return is_history_free(a.rate);
          });
        } else if constexpr (std::is_same_v<M, DensityForm>) {
          return is_history_free(m.total_rate) && !m.law.history_dependent();
        } else {
          return false;
        }
      },
      mu);
}

/// Upper bound on mu(cell; F_s) for s in [t, until) with no new events;
/// returns {bound, until}.
inline std::pair<double, double> cell_bound(const WakaraseMeasure& mu,
                                            const IntervalSet& cell, double t,
                                            const HistoryView& history,
                                            double horizon) {
  const HistoryView upto = history.before(std::nextafter(t, kInf));
  return std::visit(
      [&](const auto& m) -> std::pair<double, double> {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, DiscreteAtoms>) {
          double b = 0.0;
          double until = horizon;
          for (const auto& a : m.atoms) {
            if (!contains(cell, a.mark)) continue;
            const double la = detail::lookahead_for(a.rate, t, horizon);
            if (!(la > 0.0)) continue;
            b += dominating_rate(a.rate, t, upto, la);
            until = std::min(until, t + la);
          }
          return {b, until};
        } else if constexpr (std::is_same_v<M, DensityForm>) {
          const double la = detail::lookahead_for(m.total_rate, t, horizon);
          if (!(la > 0.0)) return {0.0, horizon};
          const double p =
              m.law.history_dependent() ? 1.0 : mass(m.law, cell, t, upto);
          if (p == 0.0) return {0.0, horizon};
          return {dominating_rate(m.total_rate, t, upto, la) * p, t + la};
        } else {
          double b = 0.0;
          for (const auto& a : detail::checked_atoms(m, t, upto)) {
            if (contains(cell, a.mark)) b += a.rate;
          }
          return {b, horizon};
        }
      },
      mu);
}

/// Draw the mark of an event at t, given the strict past.
inline double sample_mark(const WakaraseMeasure& mu, double t,
                          const HistoryView& history, RngStream& rng) {
  const HistoryView past = history.before(t);
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, DiscreteAtoms>) {
          std::vector<double> rates;
          rates.reserve(m.atoms.size());
          double total = 0.0;
          for (const auto& a : m.atoms) {
            rates.push_back(detail::rate_of(a.rate, t, past));
            total += rates.back();
          }
          double u = rng.uniform() * total;
          for (std::size_t i = 0; i < rates.size(); ++i) {
            if (u < rates[i]) return m.atoms[i].mark;
            u -= rates[i];
          }
          for (std::size_t i = rates.size(); i-- > 0;) {
            if (rates[i] > 0.0) return m.atoms[i].mark;
          }
          throw ContractViolation("mark drawn from a measure with zero mass");
        } else if constexpr (std::is_same_v<M, DensityForm>) {
          return sample(m.law, rng, t, past);
        } else {
          const auto atoms = detail::checked_atoms(m, t, past);
          double total = 0.0;
          for (const auto& a : atoms) total += a.rate;
          double u = rng.uniform() * total;
          for (const auto& a : atoms) {
            if (u < a.rate) return a.mark;
            u -= a.rate;
          }
          for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) {
            if (it->rate > 0.0) return it->mark;
          }
          throw ContractViolation("mark drawn from a measure with zero mass");
        }
      },
      mu);
}

namespace detail {

/// Direct simulation of the marked process: thinning on the total rate,
/// then a mark from mu(dz; F_t) / mu(R\{0}; F_t). The history updates after
/// every accepted event, so mu may depend on the path's own jumps.
inline std::vector<JumpEvent> thin_marked(
    const WakaraseMeasure& mu, double horizon, RngStream& rng,
    const SimulationOptions& options,
    std::shared_ptr<const DrivingPath> driving = nullptr) {
  if (const auto* d = std::get_if<DensityForm>(&mu)) {
    if (!d->law.history_dependent() && std::isinf(total_mass(d->law))) {
      throw UnsupportedError(
          "measure has infinite total rate; direct simulation needs a "
          "small-jump truncation (see integral truncation windows)");
    }
  }
  std::vector<JumpEvent> events;
  auto view = [&] {
    return HistoryView{std::span<const JumpEvent>(events), driving.get(), 0.0};
  };
  const IntervalSet all = whole_line();
  thin(
      0.0, horizon, rng, options.max_events,
      [&](double t) { return cell_bound(mu, all, t, view(), horizon); },
      [&](double t) { return total_rate(mu, t, view()); },
      [&](double t) {
        events.push_back({t, sample_mark(mu, t, view(), rng)});
      });
  return events;
}

}  // namespace detail

//---------------------------------------------------------------------------//
// Order condition
//---------------------------------------------------------------------------//

struct OrderConditionEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t paths = 0;
  bool violated = false;
};

struct OrderConditionOptions {
  double ceiling = 1e12;
  double quad_step = 1e-3;
  unsigned threads = 1;
};

/// Monte-Carlo estimate of E[int_0^T int min(1, z^2) mu(dz; F_t) dt].
/// History-free measures are integrated deterministically (zero SE).
/// Path i uses derive_stream(master_seed, i).
inline OrderConditionEstimate check_order_condition(
    const WakaraseMeasure& mu, double horizon, std::size_t n_paths,
    std::uint64_t master_seed, const OrderConditionOptions& options = {}) {
  if (!(horizon > 0.0)) throw DomainError("order condition: horizon <= 0");
  const IntervalSet small = {Interval::open(-1.0, 0.0), Interval::open(0.0, 1.0)};
  const IntervalSet large = {Interval::left_open(-kInf, -1.0),
                             Interval::right_open(1.0, kInf)};
  auto inner = [&](double s, const HistoryView& past) {
    return integrate_marks(mu, [](double z) { return z * z; }, small, s, past) +
           measure_of_set(mu, large, s, past);
  };
  // Fixed mark law: the mark integral factors out of the time integral.
  const auto* density = std::get_if<DensityForm>(&mu);
  const bool factored = density && !density->law.history_dependent();
  auto along = [&](const std::vector<JumpEvent>& events) {
    HistoryView v{std::span<const JumpEvent>(events), nullptr, 0.0};
    if (factored) {
      const double c =
          integrate(density->law, [](double z) { return z * z; }, small) +
          mass(density->law, large);
      if (!std::isfinite(c)) throw IntegrabilityError("order integral diverges");
      return c == 0.0 ? 0.0
                      : c * compensator(density->total_rate, v, horizon, options.quad_step);
    }
    std::vector<double> breaks;
    if (const auto* d = std::get_if<DensityForm>(&mu)) {
      breaks = detail::compensator_breaks(d->total_rate);
    }
    return integrate_along_path(v, horizon, options.quad_step, inner, breaks);
  };

  OrderConditionEstimate est;
  try {
    if (is_history_free(mu)) {
      est.mean = along({});
      est.paths = 0;
    } else {
      const auto values = parallel_map(n_paths, options.threads, [&](std::size_t i) {
        auto rng = derive_stream(master_seed, i);
        return along(detail::thin_marked(mu, horizon, rng, {}));
      });
      double s = 0.0, s2 = 0.0;
      for (double v : values) {
        s += v;
        s2 += v * v;
      }
      const auto n = static_cast<double>(values.size());
      est.mean = s / n;
      est.standard_error =
          n > 1 ? std::sqrt(std::max(0.0, (s2 - n * est.mean * est.mean) / (n - 1)) / n)
                : 0.0;
      est.paths = values.size();
    }
  } catch (const IntegrabilityError&) {
    est.mean = kInf;
  }
  est.violated = !(est.mean <= options.ceiling);
  return est;
}

//---------------------------------------------------------------------------//
// Mark grid Z_n and discretization
//---------------------------------------------------------------------------//

struct MarkGrid {
  std::vector<double> points;  // sorted, distinct, positive
  int level = 1;

  double min() const { return points.front(); }
  double max() const { return points.back(); }
  std::size_t size() const { return points.size(); }

  /// Cell owned by point m: [z_m, z_{m+1}), and [z_max, inf) for the last.
  Interval cell(std::size_t m) const {
    const double hi = m + 1 < points.size() ? points[m + 1] : kInf;
    return Interval::right_open(points[m], hi);
  }

  /// Index of the point whose cell contains z, or npos below z_min.
  std::size_t locate(double z) const {
    auto it = std::upper_bound(points.begin(), points.end(), z);
    if (it == points.begin()) return npos;
    return static_cast<std::size_t>(it - points.begin()) - 1;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Z_1 = {1}
inline MarkGrid first_grid() { return MarkGrid{{1.0}, 1}; }

/// Z_{n+1} = Z_n u {z_min / 2, z_max + 1} u {midpoints of neighbours}
inline MarkGrid refine_grid(const MarkGrid& grid) {
  if (grid.points.empty() || grid.level < 1) {
    throw DomainError("refine_grid: invalid grid");
  }
  std::vector<double> next;
  next.reserve(2 * grid.size() + 1);
  next.push_back(0.5 * grid.min());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    next.push_back(grid.points[i]);
    if (i + 1 < grid.size()) {
      next.push_back(0.5 * (grid.points[i] + grid.points[i + 1]));
    }
  }
  next.push_back(grid.max() + 1.0);
  std::sort(next.begin(), next.end());
  next.erase(std::unique(next.begin(), next.end()), next.end());
  return MarkGrid{std::move(next), grid.level + 1};
}

inline MarkGrid grid_at_level(int level) {
  if (level < 1) throw DomainError("grid level must be >= 1");
  MarkGrid g = first_grid();
  while (g.level < level) g = refine_grid(g);
  return g;
}

struct DiscretizedMeasure {
  DiscreteAtoms measure;
  double dropped_mass = 0.0;  // mass in (-z_min, 0) u (0, z_min)
};

/// Snapshot of mu(.; F_t) on Z: the atom at z_m carries mu([z_m, z_{m+1})),
/// the last atom mu([z_max, inf)). Negative marks use the mirrored grid.
inline DiscretizedMeasure discretize(const WakaraseMeasure& mu,
                                     const MarkGrid& grid, double t,
                                     const HistoryView& history) {
  DiscretizedMeasure out;
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const double w = measure_of_set(mu, grid.cell(m), t, history);
    out.measure.atoms.push_back({grid.points[m], Homogeneous{w}});
  }
  const double negative =
      measure_of_set(mu, Interval::open(-kInf, 0.0), t, history);
  if (negative > 0.0) {
    for (std::size_t m = 0; m < grid.size(); ++m) {
      const double w = measure_of_set(mu, grid.cell(m).mirrored(), t, history);
      out.measure.atoms.push_back({-grid.points[m], Homogeneous{w}});
    }
  }
  out.dropped_mass =
      measure_of_set(mu, {Interval::open(-grid.min(), 0.0),
                          Interval::open(0.0, grid.min())},
                     t, history);
  return out;
}

/// int_{(0,inf)} z^2 mu(dz) - sum_m z_m^2 mu([z_m, z_{m+1})) at (t, F_t).
/// Nonnegative, and nonincreasing along refine_grid.
inline double second_moment_deficit(const WakaraseMeasure& mu,
                                    const MarkGrid& grid, double t,
                                    const HistoryView& history) {
  const IntervalSet positive{Interval::open(0.0, kInf)};
  const double full = integrate_marks(
      mu, [](double z) { return z * z; }, positive, t, history);
  if (!std::isfinite(full)) {
    throw IntegrabilityError("second moment of the measure is infinite");
  }
  double discrete = 0.0;
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const double z = grid.points[m];
    discrete += z * z * measure_of_set(mu, grid.cell(m), t, history);
  }
  return full - discrete;
}

/// Path-dependent discretization: each atom's intensity re-evaluates the
/// cell mass of mu against the live history.
inline DiscreteAtoms discretize_dynamic(std::shared_ptr<const WakaraseMeasure> mu,
                                        const MarkGrid& grid) {
  DiscreteAtoms out;
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const IntervalSet cell{grid.cell(m)};
    Custom rate{
        [mu, cell](double t, const HistoryView& h) {
          return measure_of_set(*mu, cell, t, h);
        },
        [mu, cell](double t, const HistoryView& h, double lookahead) {
          const double end = t + lookahead;
          double b = 0.0;
          for (double s = t; s < end;) {
            const auto [v, until] = cell_bound(*mu, cell, s, h, end);
            b = std::max(b, v);
            if (!(until > s)) break;
            s = until;
          }
          return b;
        }};
    out.atoms.push_back({grid.points[m], std::move(rate)});
  }
  return out;
}

}  // namespace mesugaki
