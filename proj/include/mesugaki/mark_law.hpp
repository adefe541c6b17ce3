#pragma once

// Mark measures p(dz) on R \ {0}. These are the jump-size part of a
// density-form Wakarase measure. They need not be normalized: the total mass
// may be any positive number, or infinite for Levy-type small-jump densities.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <utility>
#include <variant>
#include <vector>

#include "mesugaki/core.hpp"
#include "mesugaki/quadrature.hpp"
#include "mesugaki/rng.hpp"

namespace mesugaki {

//---------------------------------------------------------------------------//
// Intervals
//---------------------------------------------------------------------------//

struct Interval {
  double lo = 0.0;
  double hi = kInf;
  bool lo_closed = false;
  bool hi_closed = false;

  static Interval open(double a, double b) { return {a, b, false, false}; }
  static Interval closed(double a, double b) { return {a, b, true, true}; }
  /// [a, b)
  static Interval right_open(double a, double b) { return {a, b, true, false}; }
  /// (a, b]
  static Interval left_open(double a, double b) { return {a, b, false, true}; }

  bool contains(double z) const {
    const bool above = lo_closed ? z >= lo : z > lo;
    const bool below = hi_closed ? z <= hi : z < hi;
    return above && below;
  }

  bool empty() const {
    return hi < lo || (hi == lo && !(lo_closed && hi_closed));
  }

  /// Image under z -> -z.
  Interval mirrored() const { return {-hi, -lo, hi_closed, lo_closed}; }
};

/// Finite union of disjoint intervals.
using IntervalSet = std::vector<Interval>;

inline bool contains(const IntervalSet& set, double z) {
  return std::any_of(set.begin(), set.end(),
                     [z](const Interval& i) { return i.contains(z); });
}

/// Positive half-line and negative half-line, i.e. R \ {0}.
inline IntervalSet whole_line() {
  return {Interval::open(-kInf, 0.0), Interval::open(0.0, kInf)};
}

//---------------------------------------------------------------------------//
// Built-in mark measures
//---------------------------------------------------------------------------//

/// weight * delta_z
struct PointMass {
  double z = 1.0;
  double weight = 1.0;
};

/// sum_i w_i delta_{z_i}
struct FiniteAtoms {
  std::vector<std::pair<double, double>> atoms;  // (z, weight)
};

/// Density weight / (hi - lo) on (lo, hi].
struct UniformLaw {
  double lo = 0.0;
  double hi = 1.0;
  double weight = 1.0;
};

/// Density coeff * z^(-exponent) on (0, hi]. Finite mass iff exponent < 1.
struct PowerLaw {
  double coeff = 1.0;
  double exponent = 0.5;
  double hi = 1.0;
};

/// Density weight * rate * exp(-rate z) on (0, inf).
struct ExponentialLaw {
  double rate = 1.0;
  double weight = 1.0;
};

/// Arbitrary nonnegative density on [lo, hi] (finite bounds). Masses use
/// adaptive Simpson; sampling inverts the numeric CDF unless `sampler` is set.
struct DensityLaw {
  std::function<double(double)> density;
  double lo = 0.0;
  double hi = 1.0;
  std::function<double(RngStream&)> sampler;
};

class MarkLaw;

/// Mark law that depends on (t, F_t). The selected law must be a
/// probability law.
struct ConditionalLaw {
  std::function<std::shared_ptr<const MarkLaw>(double, const HistoryView&)> select;
};

class MarkLaw {
 public:
  using Variant = std::variant<PointMass, FiniteAtoms, UniformLaw, PowerLaw,
                               ExponentialLaw, DensityLaw, ConditionalLaw>;

  template <class T>
    requires std::is_constructible_v<Variant, T&&>
  MarkLaw(T&& law) : law_(std::forward<T>(law)) {}  // NOLINT(google-explicit-constructor)

  const Variant& variant() const { return law_; }

  bool history_dependent() const {
    return std::holds_alternative<ConditionalLaw>(law_);
  }

 private:
  Variant law_;
};

namespace detail {

inline double clip_length(double a, double b, const Interval& i) {
  const double lo = std::max(a, i.lo);
  const double hi = std::min(b, i.hi);
  return hi > lo ? hi - lo : 0.0;
}

/// Antiderivative of z^(-p) between a and b (0 <= a < b).
inline double power_integral(double p, double a, double b) {
  if (p == 1.0) return a == 0.0 ? kInf : std::log(b / a);
  if (a == 0.0 && p > 1.0) return kInf;
  return (std::pow(b, 1.0 - p) - std::pow(a, 1.0 - p)) / (1.0 - p);
}

/// int_a^b f(z) z^(-p) dz, 0 <= a < b < inf.
template <class F>
double power_weighted_integral(F& f, double p, double a, double b) {
  if (p < 1.0) {
    // u = z^(1-p): z^(-p) dz = du / (1 - p)
    const double q = 1.0 - p;
    auto g = [&](double u) { return f(std::pow(u, 1.0 / q)); };
    return adaptive_simpson(g, std::pow(a, q), std::pow(b, q), 1e-12) / q;
  }
  // z = e^v: z^(-p) dz = e^((1-p) v) dv
  auto g = [&](double v) {
    const double z = std::exp(v);
    return f(z) * std::exp((1.0 - p) * v);
  };
  if (a > 0.0) return adaptive_simpson(g, std::log(a), std::log(b), 1e-12);
  // Lower limit 0: add shells down to 1e-32 * b and require the last one to
  // be negligible.
  double total = 0.0;
  double upper = std::log(b);
  double shell = 0.0;
  for (int k = 1; k <= 8; ++k) {
    const double lower = std::log(b) - 4.0 * k * std::log(10.0);
    shell = adaptive_simpson(g, lower, upper, 1e-14);
    total += shell;
    upper = lower;
  }
  if (!std::isfinite(total) || std::abs(shell) > 1e-8 * (1.0 + std::abs(total))) {
    throw IntegrabilityError("mark integral diverges near z = 0");
  }
  return total;
}

inline double law_mass(const MarkLaw& law, const Interval& set, double t,
                       const HistoryView& h);

inline double law_mass(const MarkLaw& law, const Interval& set, double t,
                       const HistoryView& h) {
  if (set.empty()) return 0.0;
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, PointMass>) {
          return set.contains(m.z) ? m.weight : 0.0;
        } else if constexpr (std::is_same_v<M, FiniteAtoms>) {
          double s = 0.0;
          for (const auto& [z, w] : m.atoms) {
            if (set.contains(z)) s += w;
          }
          return s;
        } else if constexpr (std::is_same_v<M, UniformLaw>) {
          return m.weight * clip_length(m.lo, m.hi, set) / (m.hi - m.lo);
        } else if constexpr (std::is_same_v<M, PowerLaw>) {
          const double a = std::max(0.0, set.lo);
          const double b = std::min(m.hi, set.hi);
          if (!(b > a)) return 0.0;
          return m.coeff * power_integral(m.exponent, a, b);
        } else if constexpr (std::is_same_v<M, ExponentialLaw>) {
          const double a = std::max(0.0, set.lo);
          const double b = set.hi;
          if (!(b > a)) return 0.0;
          return m.weight * (std::exp(-m.rate * a) - std::exp(-m.rate * b));
        } else if constexpr (std::is_same_v<M, DensityLaw>) {
          const double a = std::max(m.lo, set.lo);
          const double b = std::min(m.hi, set.hi);
          if (!(b > a)) return 0.0;
          return adaptive_simpson(m.density, a, b, 1e-10);
        } else {
          return law_mass(*m.select(t, h), set, t, h);
        }
      },
      law.variant());
}

}  // namespace detail

/// p(A) for A a finite union of intervals. Zero carries no mass.
inline double mass(const MarkLaw& law, const IntervalSet& set, double t = 0.0,
                   const HistoryView& h = {}) {
  double s = 0.0;
  for (const auto& i : set) s += detail::law_mass(law, i, t, h);
  return s;
}

inline double mass(const MarkLaw& law, const Interval& set, double t = 0.0,
                   const HistoryView& h = {}) {
  return detail::law_mass(law, set, t, h);
}

inline double total_mass(const MarkLaw& law, double t = 0.0,
                         const HistoryView& h = {}) {
  return mass(law, whole_line(), t, h);
}

/// int_A f(z) p(dz).
template <class F>
double integrate(const MarkLaw& law, F&& f, const IntervalSet& set,
                 double t = 0.0, const HistoryView& h = {}) {
  double total = 0.0;
  for (const auto& i : set) {
    if (i.empty()) continue;
    total += std::visit(
        [&](const auto& m) -> double {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, PointMass>) {
            return i.contains(m.z) ? m.weight * f(m.z) : 0.0;
          } else if constexpr (std::is_same_v<M, FiniteAtoms>) {
            double s = 0.0;
            for (const auto& [z, w] : m.atoms) {
              if (i.contains(z)) s += w * f(z);
            }
            return s;
          } else if constexpr (std::is_same_v<M, UniformLaw>) {
            const double a = std::max(m.lo, i.lo);
            const double b = std::min(m.hi, i.hi);
            if (!(b > a)) return 0.0;
            // Split at zero so sign-dependent integrands stay smooth.
            double s = 0.0;
            if (a < 0.0 && b > 0.0) {
              s = adaptive_simpson(f, a, 0.0, 1e-12) +
                  adaptive_simpson(f, 0.0, b, 1e-12);
            } else {
              s = adaptive_simpson(f, a, b, 1e-12);
            }
            return m.weight / (m.hi - m.lo) * s;
          } else if constexpr (std::is_same_v<M, PowerLaw>) {
            const double a = std::max(0.0, i.lo);
            const double b = std::min(m.hi, i.hi);
            if (!(b > a)) return 0.0;
            return m.coeff * detail::power_weighted_integral(f, m.exponent, a, b);
          } else if constexpr (std::is_same_v<M, ExponentialLaw>) {
            const double a = std::max(0.0, i.lo);
            if (!(i.hi > a)) return 0.0;
            // u = exp(-rate z); the far tail is cut where u < 1e-300.
            const double ua = std::exp(-m.rate * a);
            const double ub = std::max(std::exp(-m.rate * i.hi), 1e-300);
            if (!(ua > ub)) return 0.0;
            auto g = [&](double u) { return f(-std::log(u) / m.rate); };
            return m.weight * adaptive_simpson(g, ub, ua, 1e-12);
          } else if constexpr (std::is_same_v<M, DensityLaw>) {
            const double a = std::max(m.lo, i.lo);
            const double b = std::min(m.hi, i.hi);
            if (!(b > a)) return 0.0;
            auto g = [&](double z) { return f(z) * m.density(z); };
            return adaptive_simpson(g, a, b, 1e-12);
          } else {
            return integrate(*m.select(t, h), f, IntervalSet{i}, t, h);
          }
        },
        law.variant());
  }
  return total;
}

/// Draw a mark from the normalized law.
inline double sample(const MarkLaw& law, RngStream& rng, double t = 0.0,
                     const HistoryView& h = {}) {
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, PointMass>) {
          return m.z;
        } else if constexpr (std::is_same_v<M, FiniteAtoms>) {
          double total = 0.0;
          for (const auto& a : m.atoms) total += a.second;
          double u = rng.uniform() * total;
          for (const auto& [z, w] : m.atoms) {
            if (u < w) return z;
            u -= w;
          }
          return m.atoms.back().first;
        } else if constexpr (std::is_same_v<M, UniformLaw>) {
          return m.hi - (m.hi - m.lo) * rng.uniform();
        } else if constexpr (std::is_same_v<M, PowerLaw>) {
          if (!(m.exponent < 1.0)) {
            throw UnsupportedError(
                "power-law mark density has infinite mass; truncate small "
                "jumps before direct simulation");
          }
          return m.hi * std::pow(rng.uniform(), 1.0 / (1.0 - m.exponent));
        } else if constexpr (std::is_same_v<M, ExponentialLaw>) {
          return rng.exponential(m.rate);
        } else if constexpr (std::is_same_v<M, DensityLaw>) {
          if (m.sampler) return m.sampler(rng);
          const double total = adaptive_simpson(m.density, m.lo, m.hi, 1e-12);
          const double target = rng.uniform() * total;
          double lo = m.lo;
          double hi = m.hi;
          for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (adaptive_simpson(m.density, m.lo, mid, 1e-12) < target) {
              lo = mid;
            } else {
              hi = mid;
            }
          }
          return 0.5 * (lo + hi);
        } else {
          return sample(*m.select(t, h), rng, t, h);
        }
      },
      law.variant());
}

inline void validate_law(const MarkLaw& law) {
  std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, PointMass>) {
          if (m.z == 0.0 || !std::isfinite(m.z)) {
            throw DomainError("point mass must sit at a finite nonzero mark");
          }
          if (!(m.weight >= 0.0)) throw DomainError("point mass weight < 0");
        } else if constexpr (std::is_same_v<M, FiniteAtoms>) {
          if (m.atoms.empty()) throw DomainError("atom list is empty");
          std::vector<double> zs;
          for (const auto& [z, w] : m.atoms) {
            if (z == 0.0 || !std::isfinite(z)) throw DomainError("atom at zero");
            if (!(w >= 0.0)) throw DomainError("atom weight < 0");
            zs.push_back(z);
          }
          std::sort(zs.begin(), zs.end());
          if (std::adjacent_find(zs.begin(), zs.end()) != zs.end()) {
            throw DomainError("atom marks must be distinct");
          }
        } else if constexpr (std::is_same_v<M, UniformLaw>) {
          if (!(m.hi > m.lo)) throw DomainError("uniform law needs lo < hi");
          if (!(m.weight >= 0.0)) throw DomainError("uniform weight < 0");
        } else if constexpr (std::is_same_v<M, PowerLaw>) {
          if (!(m.hi > 0.0) || !(m.coeff >= 0.0)) {
            throw DomainError("power law needs hi > 0 and coeff >= 0");
          }
        } else if constexpr (std::is_same_v<M, ExponentialLaw>) {
          if (!(m.rate > 0.0)) throw DomainError("exponential law rate <= 0");
        } else if constexpr (std::is_same_v<M, DensityLaw>) {
          if (!m.density || !(m.hi > m.lo) || !std::isfinite(m.lo) ||
              !std::isfinite(m.hi)) {
            throw DomainError("density law needs a density on finite [lo, hi]");
          }
        } else {
          if (!m.select) throw DomainError("conditional law selector missing");
        }
      },
      law.variant());
}

}  // namespace mesugaki
