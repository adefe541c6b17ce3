#pragma once

// Ensemble statistics used to check the martingale and convergence claims:
// z-score martingale tests, Kolmogorov-Smirnov tests, Poisson chi-square
// goodness of fit, the mean identity, time-change residuals, and the sup
// distance between step paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "mesugaki/core.hpp"

namespace mesugaki {

struct EnsembleSummary {
  std::vector<double> times;
  std::vector<double> means;
  std::vector<double> standard_errors;
  std::vector<double> z_scores;
  std::size_t count = 0;
  double threshold = 4.0;
  bool pass = true;
};

struct MeanStats {
  double mean = 0.0;
  double standard_error = 0.0;
  double variance = 0.0;  // sample variance (n - 1)
  std::size_t count = 0;
};

/// Two-pass mean and variance.
inline MeanStats mean_stats(std::span<const double> xs) {
  MeanStats s;
  s.count = xs.size();
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.variance = ss / static_cast<double>(xs.size() - 1);
    s.standard_error = std::sqrt(s.variance / static_cast<double>(xs.size()));
  }
  return s;
}

inline double z_score(double mean, double se) {
  if (se > 0.0) return mean / se;
  if (mean == 0.0) return 0.0;
  return std::copysign(kInf, mean);
}

/// samples[i][c] is path i's value at checkpoint c. Passes iff every
/// |z| <= threshold.
inline EnsembleSummary martingale_test(const std::vector<std::vector<double>>& samples,
                                       std::vector<double> times,
                                       double threshold = 4.0) {
  if (samples.size() < 100) throw DomainError("martingale_test needs n >= 100");
  const std::size_t C = times.size();
  for (const auto& row : samples) {
    if (row.size() != C) throw DomainError("checkpoint count mismatch");
  }
  EnsembleSummary out;
  out.times = std::move(times);
  out.count = samples.size();
  out.threshold = threshold;
  std::vector<double> column(samples.size());
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < samples.size(); ++i) column[i] = samples[i][c];
    const auto s = mean_stats(column);
    out.means.push_back(s.mean);
    out.standard_errors.push_back(s.standard_error);
    out.z_scores.push_back(z_score(s.mean, s.standard_error));
    out.pass = out.pass && std::abs(out.z_scores.back()) <= threshold;
  }
  return out;
}

//---------------------------------------------------------------------------//
// Kolmogorov-Smirnov
//---------------------------------------------------------------------------//

struct KSReport {
  double statistic = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;  // second sample size (two-sample test only)
  double p_value = 1.0;
  double level = 0.01;
  bool pass = true;
  bool inconclusive = false;
};

/// Q_KS(x) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2), 100 terms.
inline double kolmogorov_survival(double x) {
  if (x < 0.2) return 1.0;  // 1 - Q(0.2) < 1e-12
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Asymptotic p-value with the small-sample correction
/// (sqrt(n) + 0.12 + 0.11 / sqrt(n)) D.
inline double ks_p_value(double d, double n_eff) {
  const double r = std::sqrt(n_eff);
  return kolmogorov_survival((r + 0.12 + 0.11 / r) * d);
}

/// sup_x |F_n(x) - F(x)| from sorted data.
template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf&& cdf) {
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

template <class Cdf>
KSReport ks_one_sample(std::vector<double> xs, Cdf&& cdf, double level = 0.01) {
  KSReport r;
  r.n = xs.size();
  r.level = level;
  if (xs.empty()) {
    r.inconclusive = true;
    return r;
  }
  r.statistic = ks_statistic(std::move(xs), cdf);
  r.p_value = ks_p_value(r.statistic, static_cast<double>(r.n));
  r.pass = r.p_value > level;
  return r;
}

inline KSReport ks_exponential(std::vector<double> xs, double rate = 1.0,
                               double level = 0.01) {
  return ks_one_sample(
      std::move(xs),
      [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); }, level);
}

/// Two-sample statistic sup |F_a - F_b| over the pooled sample, with ties
/// handled by stepping through equal values together.
inline double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

inline KSReport ks_two_sample(std::vector<double> a, std::vector<double> b,
                              double level = 0.01) {
  KSReport r;
  r.n = a.size();
  r.m = b.size();
  r.level = level;
  if (a.empty() || b.empty()) {
    r.inconclusive = true;
    return r;
  }
  const double n_eff = static_cast<double>(r.n) * static_cast<double>(r.m) /
                       static_cast<double>(r.n + r.m);
  r.statistic = ks_two_sample_statistic(std::move(a), std::move(b));
  r.p_value = ks_p_value(r.statistic, n_eff);
  r.pass = r.p_value > level;
  return r;
}

//---------------------------------------------------------------------------//
// Chi-square goodness of fit against Poisson(mean)
//---------------------------------------------------------------------------//

struct ChiSquareReport {
  double statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  bool pass = true;
  std::vector<double> observed;
  std::vector<double> expected;
};

/// Bins 0, 1, ..., k_max - 1 and a pooled tail [k_max, inf); adjacent bins
/// are merged until each expects at least 5 counts.
inline ChiSquareReport chi_square_poisson(std::span<const std::size_t> counts,
                                          double mean, double level = 0.01) {
  if (counts.empty()) throw DomainError("chi_square_poisson: no samples");
  if (!(mean > 0.0)) throw DomainError("chi_square_poisson: mean must be positive");
  const auto n = static_cast<double>(counts.size());
  const std::size_t top = *std::max_element(counts.begin(), counts.end());
  std::vector<double> pmf;
  double p = std::exp(-mean);
  for (std::size_t k = 0; k <= top; ++k) {
    pmf.push_back(p);
    p *= mean / static_cast<double>(k + 1);
  }
  std::vector<double> obs(top + 1, 0.0);
  for (auto c : counts) obs[c] += 1.0;

  ChiSquareReport r;
  double exp_acc = 0.0, obs_acc = 0.0, cdf = 0.0;
  for (std::size_t k = 0; k <= top; ++k) {
    exp_acc += n * pmf[k];
    obs_acc += obs[k];
    cdf += pmf[k];
    if (exp_acc >= 5.0 && n * (1.0 - cdf) >= 5.0) {
      r.expected.push_back(exp_acc);
      r.observed.push_back(obs_acc);
      exp_acc = obs_acc = 0.0;
    }
  }
  // Pooled tail: everything not yet assigned, including k > top.
  const double tail_expected = exp_acc + n * std::max(0.0, 1.0 - cdf);
  if (r.expected.empty() || tail_expected >= 5.0) {
    r.expected.push_back(tail_expected);
    r.observed.push_back(obs_acc);
  } else {
    r.expected.back() += tail_expected;
    r.observed.back() += obs_acc;
  }
  for (std::size_t b = 0; b < r.expected.size(); ++b) {
    const double d = r.observed[b] - r.expected[b];
    r.statistic += d * d / r.expected[b];
  }
  r.degrees_of_freedom = static_cast<int>(r.expected.size()) - 1;
  r.p_value = r.degrees_of_freedom > 0
                  ? boost::math::gamma_q(0.5 * r.degrees_of_freedom, 0.5 * r.statistic)
                  : 1.0;
  r.pass = r.p_value > level;
  return r;
}

//---------------------------------------------------------------------------//
// Mean identity E[N_t] = E[Lambda_t]
//---------------------------------------------------------------------------//

struct MeanIdentityReport {
  double lhs_mean = 0.0;
  double rhs_mean = 0.0;
  double combined_se = 0.0;
  double z = 0.0;
  bool pass = true;
};

inline MeanIdentityReport mean_identity(std::span<const double> lhs,
                                        std::span<const double> rhs,
                                        double threshold = 4.0) {
  const auto a = mean_stats(lhs);
  const auto b = mean_stats(rhs);
  MeanIdentityReport r;
  r.lhs_mean = a.mean;
  r.rhs_mean = b.mean;
  r.combined_se = std::hypot(a.standard_error, b.standard_error);
  r.z = z_score(a.mean - b.mean, r.combined_se);
  r.pass = std::abs(r.z) <= threshold;
  return r;
}

//---------------------------------------------------------------------------//
// Random time change
//---------------------------------------------------------------------------//

/// Lambda(tau_k) - Lambda(tau_{k-1}) with Lambda(tau_0) = 0, given the
/// compensator at each event time of one path.
inline std::vector<double> time_change_increments(std::span<const double> lambda_at_events) {
  std::vector<double> out;
  out.reserve(lambda_at_events.size());
  double prev = 0.0;
  for (double v : lambda_at_events) {
    out.push_back(v - prev);
    prev = v;
  }
  return out;
}

/// Compensator of one path at its event times and at the horizon.
struct TimeChangePath {
  std::vector<double> at_events;
  double at_horizon = 0.0;
};

/// KS test of pooled residuals against Exp(1). `compensator(i)` returns the
/// TimeChangePath of path i. Paths are laid end to end on the rescaled time
/// axis, so only the tail after the last event of the last path is censored.
template <class Compensator>
KSReport time_change_residuals(std::size_t n_paths, Compensator&& compensator,
                               double level = 0.01) {
  std::vector<double> pooled;
  double offset = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < n_paths; ++i) {
    const TimeChangePath p = compensator(i);
    for (double v : p.at_events) {
      pooled.push_back(offset + v - prev);
      prev = offset + v;
    }
    offset += p.at_horizon;
  }
  if (pooled.size() < 100) {
    KSReport r;
    r.n = pooled.size();
    r.level = level;
    r.inconclusive = true;
    r.pass = false;
    return r;
  }
  return ks_exponential(std::move(pooled), 1.0, level);
}

//---------------------------------------------------------------------------//
// ucp distance
//---------------------------------------------------------------------------//

/// Right-continuous step path: value[k] holds on [time[k], time[k+1]).
struct SampledPath {
  std::vector<double> times;
  std::vector<double> values;

  double value_at(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return values.empty() ? 0.0 : values.front();
    return values[static_cast<std::size_t>(it - times.begin()) - 1];
  }
};

/// Step path t -> x0 + sum_{tau_k <= t} z_k.
inline SampledPath step_path(std::span<const JumpEvent> events, double x0 = 0.0) {
  SampledPath p;
  p.times.push_back(0.0);
  p.values.push_back(x0);
  double x = x0;
  for (const auto& e : events) {
    x += e.mark;
    if (e.time == p.times.back()) {
      p.values.back() = x;
    } else {
      p.times.push_back(e.time);
      p.values.push_back(x);
    }
  }
  return p;
}

/// sup_{t <= T} |X_t - Y_t| over the union of both paths' knots.
inline double ucp_distance(const SampledPath& x, const SampledPath& y,
                           double horizon) {
  std::vector<double> knots{0.0};
  for (double t : x.times) {
    if (t <= horizon) knots.push_back(t);
  }
  for (double t : y.times) {
    if (t <= horizon) knots.push_back(t);
  }
  double sup = 0.0;
  for (double t : knots) sup = std::max(sup, std::abs(x.value_at(t) - y.value_at(t)));
  return sup;
}

inline std::vector<double> ucp_distance(const std::vector<SampledPath>& xs,
                                        const std::vector<SampledPath>& ys,
                                        double horizon) {
  if (xs.size() != ys.size()) throw DomainError("ucp_distance: size mismatch");
  std::vector<double> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out.push_back(ucp_distance(xs[i], ys[i], horizon));
  }
  return out;
}

}  // namespace mesugaki
