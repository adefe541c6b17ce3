#pragma once

// CSV and JSON emission. Numbers are written in shortest round-trip form so
// reruns produce byte-identical files.

#include <charconv>
#include <cmath>
#include <ostream>
#include <span>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "mesugaki/construction.hpp"
#include "mesugaki/core.hpp"
#include "mesugaki/diagnostics.hpp"
#include "mesugaki/integral.hpp"
#include "mesugaki/ito_check.hpp"
#include "mesugaki/wakarase.hpp"

namespace mesugaki {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

/// path_id,time,mark
inline void write_events_csv(std::ostream& out,
                             const std::vector<std::vector<JumpEvent>>& paths) {
  out << "path_id,time,mark\n";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (const auto& e : paths[i]) {
      out << i << ',' << format_number(e.time) << ',' << format_number(e.mark) << '\n';
    }
  }
}

/// path_id,time,value,mark where value is the running mark sum after the
/// jump.
inline void write_counting_csv(std::ostream& out,
                               const std::vector<std::vector<JumpEvent>>& paths) {
  out << "path_id,time,value,mark\n";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    double x = 0.0;
    for (const auto& e : paths[i]) {
      x += e.mark;
      out << i << ',' << format_number(e.time) << ',' << format_number(x) << ','
          << format_number(e.mark) << '\n';
    }
  }
}

/// path_id,time,value,mark: one row per grid node (empty mark) and one per
/// jump (value after the jump).
inline void write_semimartingale_csv(std::ostream& out,
                                     const std::vector<SemimartingalePath>& paths) {
  out << "path_id,time,value,mark\n";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& p = paths[i];
    std::size_t j = 0;
    for (std::size_t k = 0; k < p.node_times.size(); ++k) {
      while (j < p.jumps.size() && p.jumps[j].time < p.node_times[k]) {
        const auto& r = p.jumps[j++];
        out << i << ',' << format_number(r.time) << ','
            << format_number(r.left_limit + r.increment) << ',' << format_number(r.mark)
            << '\n';
      }
      out << i << ',' << format_number(p.node_times[k]) << ','
          << format_number(p.node_values[k]) << ",\n";
      while (j < p.jumps.size() && p.jumps[j].time == p.node_times[k]) {
        const auto& r = p.jumps[j++];
        out << i << ',' << format_number(r.time) << ','
            << format_number(r.left_limit + r.increment) << ',' << format_number(r.mark)
            << '\n';
      }
    }
  }
}

//---------------------------------------------------------------------------//
// JSON
//---------------------------------------------------------------------------//

inline nlohmann::json to_json(const EnsembleSummary& s) {
  return {{"times", s.times},       {"means", s.means},
          {"standard_errors", s.standard_errors},
          {"z_scores", s.z_scores}, {"count", s.count},
          {"threshold", s.threshold}, {"pass", s.pass}};
}

inline nlohmann::json to_json(const KSReport& r) {
  nlohmann::json j = {{"statistic", r.statistic}, {"n", r.n},
                      {"p_value", r.p_value},     {"level", r.level},
                      {"pass", r.pass},           {"inconclusive", r.inconclusive}};
  if (r.m > 0) j["m"] = r.m;
  return j;
}

inline nlohmann::json to_json(const ChiSquareReport& r) {
  return {{"statistic", r.statistic},
          {"degrees_of_freedom", r.degrees_of_freedom},
          {"p_value", r.p_value},
          {"pass", r.pass}};
}

inline nlohmann::json to_json(const MeanIdentityReport& r) {
  return {{"lhs_mean", r.lhs_mean},
          {"rhs_mean", r.rhs_mean},
          {"combined_se", r.combined_se},
          {"z", r.z},
          {"pass", r.pass}};
}

inline nlohmann::json to_json(const OrderConditionEstimate& e) {
  return {{"mean", e.mean},
          {"standard_error", e.standard_error},
          {"paths", e.paths},
          {"violated", e.violated}};
}

inline nlohmann::json to_json(const ConvergenceReport& r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"n", p.n},
                     {"m", p.m},
                     {"empirical_l2", p.empirical_l2},
                     {"bound", p.bound},
                     {"standard_error", p.standard_error},
                     {"violation_flag", p.violation},
                     {"large_jump_l2", p.large_l2},
                     {"small_jump_l2", p.small_l2},
                     {"median_sup_distance", p.median_sup_distance}});
  }
  nlohmann::json stab = nlohmann::json::array();
  for (const auto& s : r.stabilization) {
    stab.push_back({{"level", s.level},
                    {"large_events", s.large_events},
                    {"stable_fraction", s.stable_fraction},
                    {"next_level_unchanged", s.next_unchanged},
                    {"mean_increment", s.mean_increment}});
  }
  return {{"horizon", r.horizon}, {"paths", r.paths},
          {"depth", r.depth},     {"depths", r.depths},
          {"pairs", pairs},       {"stabilization", stab},
          {"any_violation", r.any_violation}};
}

inline nlohmann::json to_json(const SweepReport& r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"n", p.n},
                     {"m", p.m},
                     {"empirical_l2_diff", p.empirical_l2_diff},
                     {"tail_bound", p.tail_bound},
                     {"se", p.standard_error},
                     {"flag", p.flag}});
  }
  nlohmann::json large = nlohmann::json::array();
  for (const auto& l : r.large) {
    large.push_back({{"n", l.n},
                     {"m", l.m},
                     {"median_sup", l.median_sup},
                     {"max_sup", l.max_sup},
                     {"zero_fraction", l.zero_fraction}});
  }
  return {{"horizon", r.horizon}, {"paths", r.paths}, {"windows", r.windows},
          {"pairs", pairs},       {"large_jump", large}, {"any_flag", r.any_flag}};
}

inline nlohmann::json to_json(const ItoResidual& r) {
  return {{"lhs", r.lhs}, {"rhs", r.rhs}, {"residual", r.residual}};
}

}  // namespace mesugaki
