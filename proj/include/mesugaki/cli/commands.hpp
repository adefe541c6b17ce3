#pragma once

// The four CLI commands. Each returns an exit code (0 pass, 1 check failure)
// and writes its files under the output directory; configuration problems
// surface as ConfigError before any simulation starts.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "mesugaki/cli/config.hpp"
#include "mesugaki/io.hpp"
#include "mesugaki/mesugaki.hpp"

namespace mesugaki::cli {

inline constexpr double kPureJumpTolerance = 1e-10;
inline constexpr double kQuadratureTolerance = 1e-9;
inline constexpr double kHalvingFactor = 1.3;
inline constexpr double kBrokenCompensatorScale = 1.5;

struct RunContext {
  ScenarioConfig config;
  std::filesystem::path out;
  unsigned threads = 1;
};

namespace detail {

inline void write_json(const std::filesystem::path& file, const nlohmann::json& j) {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + file.string());
  f << j.dump(2) << '\n';
}

inline std::ofstream open_csv(const std::filesystem::path& file) {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + file.string());
  return f;
}

inline nlohmann::json describe(const MeanStats& s) {
  return {{"mean", s.mean},
          {"standard_error", s.standard_error},
          {"variance", s.variance},
          {"count", s.count}};
}

inline Integrand make_integrand(const std::string& name) {
  if (name == "one") return mark_integrand([](double) { return 1.0; });
  if (name == "mark_squared") return mark_integrand([](double z) { return z * z; });
  return mark_integrand([](double z) { return z; });
}

inline std::shared_ptr<const DrivingPath> driving_of(const WakaraseMeasure& mu) {
  if (const auto* d = std::get_if<DensityForm>(&mu)) {
    if (const auto* c = std::get_if<Cox>(&d->total_rate)) return c->driving;
  }
  return nullptr;
}

inline void require_point_process(const ProcessConfig& p, const std::string& command) {
  if (!p.is_counting() && !p.is_compound()) {
    throw ConfigError("process.type", command + " needs a counting or compound process, got " +
                                          p.type);
  }
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  const auto mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
  const double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  return 0.5 * (*std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid)) + hi);
}

}  // namespace detail

//---------------------------------------------------------------------------//
// simulate
//---------------------------------------------------------------------------//

inline int cmd_simulate(const RunContext& ctx) {
  const auto& c = ctx.config;
  const auto& p = c.process;
  std::vector<double> terminal(c.paths);
  std::size_t total_events = 0;
  const bool csv = c.output.wants("csv");

  if (p.is_state_process()) {
    const auto spec = make_semimartingale(p);
    const TimeGrid grid(c.horizon, c.step);
    auto paths = parallel_map(c.paths, ctx.threads, [&](std::size_t i) {
      auto rng = derive_stream(c.seed, i);
      return simulate_semimartingale(spec, grid, rng);
    });
    for (std::size_t i = 0; i < paths.size(); ++i) {
      terminal[i] = paths[i].final_value;
      total_events += paths[i].jumps.size();
    }
    if (csv) {
      auto f = detail::open_csv(ctx.out / "paths.csv");
      write_semimartingale_csv(f, paths);
    }
  } else {
    const WakaraseMeasure mu = make_measure(p, c.horizon);
    const auto driving = detail::driving_of(mu);
    auto paths = parallel_map(c.paths, ctx.threads, [&](std::size_t i) {
      auto rng = derive_stream(c.seed, i);
      return simulate_mesugaki(mu, c.horizon, rng, {}, driving).events;
    });
    for (std::size_t i = 0; i < paths.size(); ++i) {
      double x = 0.0;
      for (const auto& e : paths[i]) x += e.mark;
      terminal[i] = x;
      total_events += paths[i].size();
    }
    if (csv) {
      auto f = detail::open_csv(ctx.out / "paths.csv");
      write_counting_csv(f, paths);
    }
  }

  if (c.output.wants("json")) {
    const auto s = mean_stats(terminal);
    nlohmann::json j;
    j["scenario"] = c.scenario;
    j["config"] = to_json(c);
    j["config"].erase("output");
    j["terminal_value"] = detail::describe(s);
    j["terminal_value"]["min"] = *std::min_element(terminal.begin(), terminal.end());
    j["terminal_value"]["max"] = *std::max_element(terminal.begin(), terminal.end());
    j["events"] = {{"total", total_events},
                   {"mean_per_path",
                    static_cast<double>(total_events) / static_cast<double>(c.paths)}};
    detail::write_json(ctx.out / "summary.json", j);
  }
  return 0;
}

//---------------------------------------------------------------------------//
// converge
//---------------------------------------------------------------------------//

inline int cmd_converge(const RunContext& ctx) {
  const auto& c = ctx.config;
  detail::require_point_process(c.process, "converge");
  const WakaraseMeasure mu = make_measure(c.process, c.horizon);
  if (c.paths < 2) throw ConfigError("paths", "converge needs at least two paths");

  std::vector<int> depths;
  for (int n = 1; n <= c.grid_depth; ++n) depths.push_back(n);
  ConvergenceOptions opts;
  opts.threads = ctx.threads;
  const auto report = diagnose_convergence(mu, depths, c.horizon, c.paths, c.seed, opts);

  OrderConditionOptions oc;
  oc.threads = ctx.threads;
  const auto order = check_order_condition(mu, c.horizon, c.paths, c.seed, oc);

  nlohmann::json j;
  j["scenario"] = c.scenario;
  j["convergence"] = to_json(report);
  j["order_condition"] = to_json(order);
  bool fail = report.any_violation || order.violated;
  if (!c.integrand.windows.empty()) {
    SweepOptions so;
    so.threads = ctx.threads;
    const auto sweep = truncation_sweep(detail::make_integrand(c.integrand.name), mu,
                                        c.horizon, c.paths, c.seed, c.integrand.windows, so);
    j["truncation_sweep"] = to_json(sweep);
    fail = fail || sweep.any_flag;
  }
  j["pass"] = !fail;
  if (c.output.wants("json")) detail::write_json(ctx.out / "convergence.json", j);
  return fail ? 1 : 0;
}

//---------------------------------------------------------------------------//
// ito-check
//---------------------------------------------------------------------------//

inline int cmd_ito_check(const RunContext& ctx) {
  const auto& c = ctx.config;
  if (!c.process.is_state_process()) {
    throw ConfigError("process.type", "ito-check needs an sde or discrete_state process, got " +
                                          c.process.type);
  }
  const auto spec = make_semimartingale(c.process);
  const auto fn = make_test_function(c.ito.test_function);
  const std::vector<double> steps = c.ito.steps.empty() ? std::vector<double>{c.step}
                                                        : c.ito.steps;
  const bool linear = c.ito.test_function == "identity";

  struct PathOutcome {
    ItoResidual residual;
    bool continuous = false;  // any drift, diffusion or compensator drift
  };

  nlohmann::json per_step = nlohmann::json::array();
  std::vector<double> medians;
  bool pure_jump = true;
  bool ok = true;
  nlohmann::json first_paths = nlohmann::json::array();
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const TimeGrid grid(c.horizon, steps[k]);
    auto outcomes = parallel_map(c.paths, ctx.threads, [&](std::size_t i) {
      auto rng = derive_stream(c.seed, i);
      const auto path = simulate_semimartingale(spec, grid, rng);
      PathOutcome o;
      o.residual = ito_residual(spec, fn, path);
      for (const auto& s : path.segments) {
        if (s.drift != 0.0 || s.diffusion != 0.0 || s.compensator_drift != 0.0) {
          o.continuous = true;
          break;
        }
      }
      return o;
    });
    std::vector<double> res;
    double worst = 0.0, worst_gap = 0.0, worst_scaled = 0.0;
    for (const auto& o : outcomes) {
      res.push_back(o.residual.residual);
      worst = std::max(worst, o.residual.residual);
      worst_gap = std::max(worst_gap, o.residual.assembly_gap);
      worst_scaled = std::max(worst_scaled, o.residual.residual /
                                                std::max(1.0, std::abs(o.residual.lhs)));
      pure_jump = pure_jump && !o.continuous;
      if (k == 0) first_paths.push_back(to_json(o.residual));
    }
    medians.push_back(detail::median(res));
    per_step.push_back({{"dt", steps[k]},
                        {"median_residual", medians.back()},
                        {"max_residual", worst},
                        {"max_scaled_residual", worst_scaled},
                        {"max_assembly_gap", worst_gap}});
    if (linear && worst_scaled > kQuadratureTolerance) ok = false;
  }

  nlohmann::json j;
  j["scenario"] = c.scenario;
  j["test_function"] = c.ito.test_function;
  j["steps"] = per_step;
  j["pure_jump"] = pure_jump;
  if (pure_jump) {
    double worst = 0.0;
    for (const auto& s : per_step) worst = std::max(worst, s["max_residual"].get<double>());
    j["pure_jump_max_residual"] = worst;
    j["pure_jump_tolerance"] = kPureJumpTolerance;
    if (worst > kPureJumpTolerance) ok = false;
  } else if (!linear && steps.size() >= 2) {
    nlohmann::json ratios = nlohmann::json::array();
    for (std::size_t k = 1; k < steps.size(); ++k) {
      const double halvings = std::log2(steps[k - 1] / steps[k]);
      const double required = std::pow(kHalvingFactor, halvings);
      const double ratio = medians[k] > 0.0 ? medians[k - 1] / medians[k] : kInf;
      const bool pass = ratio >= required;
      ratios.push_back({{"from_dt", steps[k - 1]},
                        {"to_dt", steps[k]},
                        {"ratio", ratio},
                        {"required", required},
                        {"log10_slope", std::log10(ratio) / std::log10(steps[k - 1] / steps[k])},
                        {"pass", pass}});
      ok = ok && pass;
    }
    j["halving"] = ratios;
  }
  j["linear_tolerance"] = kQuadratureTolerance;
  j["paths"] = first_paths;
  j["pass"] = ok;
  if (c.output.wants("json")) detail::write_json(ctx.out / "ito.json", j);
  return ok ? 0 : 1;
}

//---------------------------------------------------------------------------//
// validate
//---------------------------------------------------------------------------//

inline int cmd_validate(const RunContext& ctx) {
  const auto& c = ctx.config;
  detail::require_point_process(c.process, "validate");
  if (c.paths < 100) throw ConfigError("paths", "validate needs at least 100 paths");
  const WakaraseMeasure mu = make_measure(c.process, c.horizon);
  const auto& rate = std::get<DensityForm>(mu).total_rate;
  const auto driving = detail::driving_of(mu);
  const Integrand theta = detail::make_integrand(c.integrand.name);
  const double scale = c.validate.fixture == "broken_compensator" ? kBrokenCompensatorScale : 1.0;

  std::vector<double> times;
  for (double f : c.validate.checkpoints) times.push_back(f * c.horizon);

  struct PathOutcome {
    std::vector<double> martingale;
    double jumps = 0.0;
    double compensator = 0.0;
    TimeChangePath time_change;
    std::size_t count = 0;
  };
  auto outcomes = parallel_map(c.paths, ctx.threads, [&](std::size_t i) {
    auto rng = derive_stream(c.seed, i);
    const auto path = simulate_mesugaki(mu, c.horizon, rng, {}, driving);
    const auto view = path.view();
    PathOutcome o;
    for (double t : times) {
      const double jumps = integrate_jump(theta, view, t);
      const double comp = scale * compensator_integral(theta, mu, view, t);
      o.martingale.push_back(jumps - comp);
      if (t == c.horizon) {
        o.jumps = jumps;
        o.compensator = comp;
      }
    }
    if (times.back() != c.horizon) {
      o.jumps = integrate_jump(theta, view, c.horizon);
      o.compensator = scale * compensator_integral(theta, mu, view, c.horizon);
    }
    std::vector<double> event_times;
    for (const auto& e : path.events) event_times.push_back(e.time);
    o.time_change.at_events = compensator_at(rate, view, event_times);
    for (auto& v : o.time_change.at_events) v *= scale;
    o.time_change.at_horizon = scale * compensator(rate, view, c.horizon);
    o.count = path.events.size();
    return o;
  });

  std::vector<std::vector<double>> samples;
  std::vector<double> lhs, rhs;
  for (auto& o : outcomes) {
    samples.push_back(o.martingale);
    lhs.push_back(o.jumps);
    rhs.push_back(o.compensator);
  }
  const auto martingale = martingale_test(samples, times);
  const auto identity = mean_identity(lhs, rhs);
  const auto time_change = time_change_residuals(
      outcomes.size(), [&](std::size_t i) { return outcomes[i].time_change; });

  nlohmann::json j;
  j["scenario"] = c.scenario;
  j["fixture"] = c.validate.fixture;
  j["martingale"] = to_json(martingale);
  j["mean_identity"] = to_json(identity);
  j["time_change"] = to_json(time_change);
  bool ok = martingale.pass && identity.pass && (time_change.pass || time_change.inconclusive);
  if (c.process.type == "poisson" && scale == 1.0) {
    std::vector<std::size_t> counts;
    for (const auto& o : outcomes) counts.push_back(o.count);
    const auto chi = chi_square_poisson(counts, c.process.rate * c.horizon);
    j["chi_square"] = to_json(chi);
    ok = ok && chi.pass;
  }
  j["pass"] = ok;
  if (c.output.wants("json")) detail::write_json(ctx.out / "validate.json", j);
  return ok ? 0 : 1;
}

}  // namespace mesugaki::cli
