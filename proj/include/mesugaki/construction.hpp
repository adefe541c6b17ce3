#pragma once

// Discrete Mesugaki processes on the grids Z_n, the jump-splitting coupling
// between refinement levels, convergence diagnostics for the coupled family,
// and the direct simulator of the limit process.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "mesugaki/core.hpp"
#include "mesugaki/parallel.hpp"
#include "mesugaki/point_process.hpp"
#include "mesugaki/rng.hpp"
#include "mesugaki/wakarase.hpp"

namespace mesugaki {

/// Marked path N_t = sum_{tau_k <= t} z_k.
struct MesugakiPath {
  std::vector<JumpEvent> events;
  double horizon = 0.0;
  std::shared_ptr<const DrivingPath> driving;

  HistoryView view() const {
    return HistoryView{std::span<const JumpEvent>(events), driving.get(), 0.0};
  }

  double value_at(double t) const {
    double s = 0.0;
    for (const auto& e : events) {
      if (e.time > t) break;
      s += e.mark;
    }
    return s;
  }
};

struct DiscreteMesugakiPath {
  MarkGrid grid;
  std::vector<JumpEvent> events;
  int level = 0;

  double value_at(double t) const {
    double s = 0.0;
    for (const auto& e : events) {
      if (e.time > t) break;
      s += e.mark;
    }
    return s;
  }
};

/// Direct simulation of the marked process generated by mu. The measure may
/// depend on the path's own history.
inline MesugakiPath simulate_mesugaki(
    const WakaraseMeasure& mu, double horizon, RngStream& rng,
    const SimulationOptions& options = {},
    std::shared_ptr<const DrivingPath> driving = nullptr) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError("simulate_mesugaki: horizon must be positive");
  }
  validate_measure(mu);
  MesugakiPath path;
  path.horizon = horizon;
  path.driving = driving;
  path.events = detail::thin_marked(mu, horizon, rng, options, driving);
  return path;
}

/// Superposition of the atom processes by competing thinning: one dominating
/// clock, the mark chosen in proportion to the atom rates at acceptance.
inline DiscreteMesugakiPath simulate_discrete(const DiscreteAtoms& atoms,
                                              double horizon, RngStream& rng,
                                              const SimulationOptions& options = {}) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError("simulate_discrete: horizon must be positive");
  }
  const WakaraseMeasure mu = atoms;
  validate_measure(mu);
  DiscreteMesugakiPath path;
  std::vector<double> marks;
  for (const auto& a : atoms.atoms) {
    if (a.mark > 0.0) marks.push_back(a.mark);
  }
  std::sort(marks.begin(), marks.end());
  path.grid.points = std::move(marks);
  path.level = 0;
  if (atoms.atoms.empty()) return path;
  path.events = detail::thin_marked(mu, horizon, rng, options);
  return path;
}

/// Level-n discrete process of mu, with atoms re-evaluated along the path.
inline DiscreteMesugakiPath simulate_discrete(
    std::shared_ptr<const WakaraseMeasure> mu, const MarkGrid& grid,
    double horizon, RngStream& rng, const SimulationOptions& options = {}) {
  auto path = simulate_discrete(discretize_dynamic(mu, grid), horizon, rng, options);
  path.grid = grid;
  path.level = grid.level;
  return path;
}

//---------------------------------------------------------------------------//
// Jump-splitting coupling
//---------------------------------------------------------------------------//

namespace detail {

/// Where a level-n cell [a, b) splits at level n + 1.
inline double split_point(const Interval& cell) {
  return std::isinf(cell.hi) ? cell.lo + 1.0 : 0.5 * (cell.lo + cell.hi);
}

inline double clamp_probability(double raw) {
  if (raw > 1.0 + 1e-9 || raw < -1e-9) {
    std::clog << "mesugaki: split probability " << raw
              << " outside [0, 1]; clamped\n";
  }
  return std::clamp(raw, 0.0, 1.0);
}

inline double upper_split_probability(const WakaraseMeasure& mu,
                                      const Interval& cell, double t,
                                      const HistoryView& history) {
  const double parent = measure_of_set(mu, cell, t, history);
  if (!(parent > 0.0)) {
    throw ContractViolation("split of a cell with zero mass");
  }
  const double c = split_point(cell);
  const double upper =
      measure_of_set(mu, Interval::right_open(c, cell.hi), t, history);
  return clamp_probability(upper / parent);
}

/// Coarsest cell of an event first produced at `origin`: [1, inf) for the
/// level-1 atom, [2^(1-j), 2^(2-j)) for the low cell added at level j.
inline Interval origin_cell(int origin) {
  if (origin == 1) return Interval::right_open(1.0, kInf);
  return Interval::right_open(std::ldexp(1.0, 1 - origin),
                              std::ldexp(1.0, 2 - origin));
}

inline std::uint32_t clock_substream(int origin) {
  return static_cast<std::uint32_t>(origin) << 1;
}

inline std::uint32_t split_substream(int level) {
  return (static_cast<std::uint32_t>(level) << 1) | 1u;
}

}  // namespace detail

/// Probability that a level-n event in cell i of `grid` moves to the upper
/// child at level n + 1.
inline double split_probability(const WakaraseMeasure& mu, const MarkGrid& grid,
                                std::size_t cell_index, double t,
                                const HistoryView& history) {
  if (cell_index >= grid.size()) throw DomainError("cell index out of range");
  return detail::upper_split_probability(mu, grid.cell(cell_index), t, history);
}

struct CoupledEvent {
  double time = 0.0;
  int origin = 1;             // first level carrying the event
  std::vector<double> marks;  // marks[k] is the mark at level origin + k

  double mark_at(int level) const {
    if (level < origin) return 0.0;
    return marks[static_cast<std::size_t>(level - origin)];
  }
};

struct SplitDraw {
  std::size_t event = 0;
  int level = 0;  // the level the draw moves the event to
  double probability = 0.0;
  bool upper = false;
};

struct CoupledFamily {
  int depth = 0;
  double horizon = 0.0;
  std::vector<MarkGrid> grids;  // grids[n - 1] is Z_n
  std::vector<CoupledEvent> events;
  std::vector<SplitDraw> splits;

  DiscreteMesugakiPath level(int n) const {
    if (n < 1 || n > depth) throw DomainError("level outside the family");
    DiscreteMesugakiPath out{grids[static_cast<std::size_t>(n - 1)], {}, n};
    for (const auto& e : events) {
      if (e.origin <= n) out.events.push_back({e.time, e.mark_at(n)});
    }
    return out;
  }
};

/// Level-n path rebuilt from event origins and the recorded splits alone.
inline DiscreteMesugakiPath reconstruct_level(const CoupledFamily& family,
                                              int n) {
  if (n < 1 || n > family.depth) throw DomainError("level outside the family");
  std::vector<Interval> cells;
  cells.reserve(family.events.size());
  for (const auto& e : family.events) cells.push_back(detail::origin_cell(e.origin));
  for (const auto& s : family.splits) {
    if (s.level > n) continue;
    auto& cell = cells[s.event];
    const double c = detail::split_point(cell);
    cell = s.upper ? Interval::right_open(c, cell.hi)
                   : Interval::right_open(cell.lo, c);
  }
  DiscreteMesugakiPath out{family.grids[static_cast<std::size_t>(n - 1)], {}, n};
  for (std::size_t i = 0; i < family.events.size(); ++i) {
    if (family.events[i].origin <= n) {
      out.events.push_back({family.events[i].time, cells[i].lo});
    }
  }
  return out;
}

/// Coupled family N^1, ..., N^K of discrete processes for a measure on
/// (0, inf).
///
/// Every event belongs to the cell it was born in: [1, inf) at level 1, or
/// the low cell [z_min, 2 z_min) added at a later level. Each such cell runs
/// its own thinning clock against the finest-level history. At each further
/// level the event's cell splits in two and a Bernoulli draw with the upper
/// child's share of the mass decides which half it follows; the mark is the
/// left end of the current cell. Clocks and splits use their own substreams
/// of `rng`, so for history-free measures the first n levels do not depend
/// on K.
inline CoupledFamily simulate_coupled(const WakaraseMeasure& mu, int depth,
                                      double horizon, const RngStream& rng,
                                      const SimulationOptions& options = {}) {
  if (depth < 2) throw DomainError("coupled family needs at least two levels");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError("simulate_coupled: horizon must be positive");
  }
  validate_measure(mu);

  CoupledFamily family;
  family.depth = depth;
  family.horizon = horizon;
  family.grids.push_back(first_grid());
  for (int n = 2; n <= depth; ++n) family.grids.push_back(refine_grid(family.grids.back()));

  std::vector<JumpEvent> finest;
  auto view = [&] {
    return HistoryView{std::span<const JumpEvent>(finest), nullptr, 0.0};
  };
  if (measure_of_set(mu, Interval::open(-kInf, 0.0), 0.0, view()) > 0.0) {
    throw UnsupportedError(
        "coupled construction needs a measure on (0, inf); split off and "
        "mirror the negative part");
  }

  struct Clock {
    int origin;
    IntervalSet cell;
    RngStream rng;
    double bound = 0.0;
    double next = kInf;
    bool refresh = false;  // `next` is the end of the bound's validity
  };
  std::vector<Clock> clocks;
  for (int j = 1; j <= depth; ++j) {
    clocks.push_back({j, {detail::origin_cell(j)}, rng.substream(detail::clock_substream(j))});
  }
  std::vector<RngStream> split_rng;
  for (int n = 0; n <= depth; ++n) split_rng.push_back(rng.substream(detail::split_substream(n)));

  auto arm = [&](Clock& c, double t) {
    auto [B, until] = cell_bound(mu, c.cell, t, view(), horizon);
    until = std::min(until, horizon);
    if (!(until > t)) until = horizon;
    if (!(B >= 0.0) || std::isinf(B)) {
      throw ContractViolation("dominating rate must be finite and >= 0");
    }
    c.bound = B;
    const double w = B > 0.0 ? c.rng.exponential(B) : kInf;
    c.refresh = t + w > until;
    c.next = c.refresh ? until : t + w;
  };
  for (auto& c : clocks) arm(c, 0.0);

  const bool history_free = is_history_free(mu);
  double last = -kInf;
  std::size_t accepted = 0;
  for (;;) {
    auto it = std::min_element(clocks.begin(), clocks.end(),
                               [](const Clock& a, const Clock& b) { return a.next < b.next; });
    Clock& c = *it;
    const double t = c.next;
    if (!(t < horizon) && !(t == horizon && !c.refresh)) break;
    if (c.refresh) {
      arm(c, t);
      continue;
    }
    const double lam = measure_of_set(mu, c.cell, t, view());
    if (lam > c.bound * (1.0 + 1e-9)) {
      throw ContractViolation("cell intensity exceeded its dominating rate");
    }
    const bool accept = c.rng.uniform() * c.bound <= lam && t != last && lam > 0.0;
    if (!accept) {
      arm(c, t);
      continue;
    }
    if (++accepted > options.max_events) {
      throw RunawayError("event cap exceeded (" + std::to_string(options.max_events) +
                         " events)");
    }
    CoupledEvent ev{t, c.origin, {}};
    Interval cell = c.cell.front();
    ev.marks.push_back(cell.lo);
    for (int n = c.origin + 1; n <= depth; ++n) {
      const double p = detail::upper_split_probability(mu, cell, t, view());
      const bool upper = split_rng[static_cast<std::size_t>(n)].uniform() < p;
      const double mid = detail::split_point(cell);
      cell = upper ? Interval::right_open(mid, cell.hi)
                   : Interval::right_open(cell.lo, mid);
      ev.marks.push_back(cell.lo);
      family.splits.push_back({family.events.size(), n, p, upper});
    }
    finest.push_back({t, ev.marks.back()});
    family.events.push_back(std::move(ev));
    last = t;
    if (history_free) {
      arm(c, t);
    } else {
      // The intensities may have jumped; restart every clock from t.
      for (auto& other : clocks) arm(other, t);
    }
  }
  return family;
}

//---------------------------------------------------------------------------//
// Convergence diagnostics
//---------------------------------------------------------------------------//

struct LevelPairStats {
  int n = 0;
  int m = 0;
  double empirical_l2 = 0.0;  // E|N^m_T - N^n_T|^2
  double standard_error = 0.0;
  double bound = 0.0;  // E int_0^T int z^2 (mu - mu_n)(dz) dt
  bool violation = false;
  double large_l2 = 0.0;  // part from marks >= 1
  double small_l2 = 0.0;  // part from marks < 1
  double median_sup_distance = 0.0;
};

struct StabilizationStats {
  int level = 0;
  std::size_t large_events = 0;
  /// Fraction of large events whose level-n mark already equals the
  /// level-K mark.
  double stable_fraction = 1.0;
  /// Fraction of large events unchanged from level n to n + 1.
  double next_unchanged = 1.0;
  double mean_increment = 0.0;  // mean of (level-K mark - level-n mark)
};

struct ConvergenceReport {
  double horizon = 0.0;
  std::size_t paths = 0;
  int depth = 0;
  std::vector<int> depths;
  std::vector<LevelPairStats> pairs;
  std::vector<StabilizationStats> stabilization;
  bool any_violation = false;
};

struct ConvergenceOptions {
  double quad_step = 1e-3;
  unsigned threads = 1;
  double z_threshold = 4.0;
  SimulationOptions simulation{};
};

/// Step-1 bound along one history: int_0^T second_moment_deficit dt.
inline double deficit_bound(const WakaraseMeasure& mu, const MarkGrid& grid,
                            const HistoryView& history, double horizon,
                            double quad_step) {
  std::vector<double> breaks;
  if (const auto* d = std::get_if<DensityForm>(&mu)) {
    breaks = detail::compensator_breaks(d->total_rate);
  }
  return integrate_along_path(
      history, horizon, quad_step,
      [&](double s, const HistoryView& past) {
        return second_moment_deficit(mu, grid, s, past);
      },
      breaks);
}

/// Coupled families for path i use derive_stream(master_seed, i).
inline ConvergenceReport diagnose_convergence(const WakaraseMeasure& mu,
                                              std::vector<int> depths,
                                              double horizon, std::size_t n_paths,
                                              std::uint64_t master_seed,
                                              const ConvergenceOptions& options = {}) {
  if (depths.size() < 2) throw DomainError("need at least two depths");
  if (!std::is_sorted(depths.begin(), depths.end()) ||
      std::adjacent_find(depths.begin(), depths.end()) != depths.end()) {
    throw DomainError("depths must be strictly increasing");
  }
  if (depths.front() < 1) throw DomainError("depths start at level 1");
  if (n_paths < 2) throw DomainError("need at least two paths");
  const int K = std::max(2, depths.back());
  const std::size_t pairs = depths.size() - 1;
  const bool history_free = is_history_free(mu);

  struct PathResult {
    std::vector<double> diff, large, small, bound;
    std::vector<std::size_t> stable, next_same;
    std::vector<double> increment;
    std::size_t large_events = 0;
  };

  std::vector<MarkGrid> grids;
  for (int n : depths) grids.push_back(grid_at_level(n));

  auto safe_bound = [&](const MarkGrid& g, const HistoryView& h) {
    try {
      return deficit_bound(mu, g, h, horizon, options.quad_step);
    } catch (const IntegrabilityError&) {
      return kInf;
    }
  };
  std::vector<double> fixed_bound(pairs, 0.0);
  if (history_free) {
    for (std::size_t k = 0; k < pairs; ++k) fixed_bound[k] = safe_bound(grids[k], {});
  }

  const auto results = parallel_map(n_paths, options.threads, [&](std::size_t i) {
    const auto family =
        simulate_coupled(mu, K, horizon, derive_stream(master_seed, i), options.simulation);
    PathResult r;
    for (std::size_t k = 0; k < pairs; ++k) {
      const int n = depths[k];
      const int m = depths[k + 1];
      double d = 0.0, dl = 0.0, ds = 0.0;
      for (const auto& e : family.events) {
        const double inc = e.mark_at(m) - e.mark_at(n);
        d += inc;
        (e.origin == 1 ? dl : ds) += inc;
      }
      r.diff.push_back(d);
      r.large.push_back(dl);
      r.small.push_back(ds);
      if (!history_free) {
        std::vector<JumpEvent> finest;
        for (const auto& e : family.events) finest.push_back({e.time, e.mark_at(K)});
        r.bound.push_back(safe_bound(
            grids[k], HistoryView{std::span<const JumpEvent>(finest), nullptr, 0.0}));
      }
    }
    r.stable.assign(depths.size(), 0);
    r.next_same.assign(depths.size(), 0);
    r.increment.assign(depths.size(), 0.0);
    for (const auto& e : family.events) {
      if (e.origin != 1) continue;
      ++r.large_events;
      for (std::size_t k = 0; k < depths.size(); ++k) {
        const int n = depths[k];
        if (e.mark_at(n) == e.mark_at(K)) ++r.stable[k];
        if (n >= K || e.mark_at(n) == e.mark_at(n + 1)) ++r.next_same[k];
        r.increment[k] += e.mark_at(K) - e.mark_at(n);
      }
    }
    return r;
  });

  ConvergenceReport report;
  report.horizon = horizon;
  report.paths = n_paths;
  report.depth = K;
  report.depths = depths;
  const auto N = static_cast<double>(n_paths);
  for (std::size_t k = 0; k < pairs; ++k) {
    LevelPairStats s;
    s.n = depths[k];
    s.m = depths[k + 1];
    double sum = 0.0, sum2 = 0.0, large = 0.0, small = 0.0, bound = 0.0;
    std::vector<double> sup;
    sup.reserve(n_paths);
    for (const auto& r : results) {
      const double d2 = r.diff[k] * r.diff[k];
      sum += d2;
      sum2 += d2 * d2;
      large += r.large[k] * r.large[k];
      small += r.small[k] * r.small[k];
      if (!history_free) bound += r.bound[k];
      sup.push_back(std::abs(r.diff[k]));
    }
    s.empirical_l2 = sum / N;
    s.standard_error =
        std::sqrt(std::max(0.0, (sum2 - N * s.empirical_l2 * s.empirical_l2) / (N - 1)) / N);
    s.large_l2 = large / N;
    s.small_l2 = small / N;
    s.bound = history_free ? fixed_bound[k] : bound / N;
    s.violation = s.empirical_l2 > s.bound + options.z_threshold * s.standard_error;
    std::nth_element(sup.begin(), sup.begin() + static_cast<std::ptrdiff_t>(sup.size() / 2),
                     sup.end());
    s.median_sup_distance = sup[sup.size() / 2];
    report.any_violation = report.any_violation || s.violation;
    report.pairs.push_back(s);
  }
  for (std::size_t k = 0; k < depths.size(); ++k) {
    StabilizationStats s;
    s.level = depths[k];
    std::size_t stable = 0, next_same = 0;
    double increment = 0.0;
    for (const auto& r : results) {
      s.large_events += r.large_events;
      stable += r.stable[k];
      next_same += r.next_same[k];
      increment += r.increment[k];
    }
    if (s.large_events > 0) {
      const auto L = static_cast<double>(s.large_events);
      s.stable_fraction = static_cast<double>(stable) / L;
      s.next_unchanged = static_cast<double>(next_same) / L;
      s.mean_increment = increment / L;
    }
    report.stabilization.push_back(s);
  }
  return report;
}

}  // namespace mesugaki
