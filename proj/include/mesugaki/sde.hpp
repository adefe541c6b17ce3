#pragma once

// Mesugaki SDEs
//   dX = f(X) dt + g(X) dB + int_{|z|>=1} h1(z, X-) N(dt dz) + int_{|z|<1} h2(z, X-) (N - mu dt)
// with state-dependent measures, the compound-process factories, and the
// discrete-state (Markov chain) process.

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "mesugaki/core.hpp"
#include "mesugaki/ito_check.hpp"
#include "mesugaki/mark_law.hpp"
#include "mesugaki/point_process.hpp"
#include "mesugaki/wakarase.hpp"

namespace mesugaki {

/// The measure reads X_{t-} from HistoryView::state.
struct MesugakiSDESpec {
  double x0 = 0.0;
  std::function<double(double)> drift;              // f(x)
  std::function<double(double)> diffusion;          // g(x)
  std::function<double(double, double)> h1;        // (z, x)
  std::function<double(double, double)> h2;        // (z, x)
  WakaraseMeasure mu = DiscreteAtoms{};
  bool compensate_small_jumps = true;
};

inline SemimartingaleSpec to_semimartingale(const MesugakiSDESpec& spec) {
  SemimartingaleSpec s;
  s.x0 = spec.x0;
  if (spec.drift) s.drift = [f = spec.drift](double, double x) { return f(x); };
  if (spec.diffusion) {
    s.diffusion = [g = spec.diffusion](double, double x) { return g(x); };
  }
  if (spec.h1) s.h1 = [h = spec.h1](double, double z, double x) { return h(z, x); };
  if (spec.h2) s.h2 = [h = spec.h2](double, double z, double x) { return h(z, x); };
  s.mu = spec.mu;
  s.compensate_small_jumps = spec.compensate_small_jumps;
  return s;
}

inline SemimartingalePath euler_simulate(const MesugakiSDESpec& spec,
                                         const TimeGrid& grid, RngStream& rng,
                                         const EulerOptions& options = {}) {
  return simulate_semimartingale(to_semimartingale(spec), grid, rng, options);
}

//---------------------------------------------------------------------------//
// Compound processes
//---------------------------------------------------------------------------//

inline WakaraseMeasure compound_poisson(double rate, MarkLaw law) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw DomainError("compound_poisson: rate must be positive");
  }
  validate_law(law);
  return DensityForm{Homogeneous{rate}, std::move(law)};
}

inline WakaraseMeasure compound_hawkes(double base, HawkesKernel kernel,
                                       MarkLaw law) {
  IntensityModel rate = Hawkes{base, std::move(kernel)};
  validate_model(rate, true);
  validate_law(law);
  return DensityForm{std::move(rate), std::move(law)};
}

inline WakaraseMeasure compound_cox(std::function<double(double)> phi,
                                    std::shared_ptr<const DrivingPath> driving,
                                    MarkLaw law,
                                    std::optional<double> bound = std::nullopt) {
  if (!phi || !driving) throw DomainError("compound_cox: phi and path required");
  validate_law(law);
  IntensityModel rate = Cox{std::move(phi), std::move(driving), bound};
  validate_model(rate, false);
  return DensityForm{std::move(rate), std::move(law)};
}

//---------------------------------------------------------------------------//
// Discrete-state process
//---------------------------------------------------------------------------//

struct Transition {
  double jump = 1.0;  // target minus current state; nonzero
  double rate = 0.0;
};

using JumpTable = std::function<std::vector<Transition>(double)>;

/// Pure-jump spec whose measure at state x is the atom set jump_table(x):
/// X moves by Delta z at rate lambda. Jumps are applied uncompensated, so X
/// is the continuous-time Markov chain with these transitions.
inline MesugakiSDESpec discrete_state_process(JumpTable jump_table,
                                              double x0 = 0.0) {
  if (!jump_table) throw DomainError("jump table missing");
  MesugakiSDESpec spec;
  spec.x0 = x0;
  spec.mu = DynamicAtoms{[table = std::move(jump_table)](double, const HistoryView& h) {
    if (!h.has_state()) throw DomainError("discrete-state measure needs the state");
    std::vector<AtomRate> atoms;
    for (const auto& tr : table(h.state)) {
      if (tr.jump == 0.0 || !std::isfinite(tr.jump)) {
        throw DomainError("transition jump must be nonzero (no self-loops)");
      }
      if (!(tr.rate >= 0.0) || !std::isfinite(tr.rate)) {
        throw DomainError("transition rate must be finite and >= 0");
      }
      atoms.push_back({tr.jump, tr.rate});
    }
    return atoms;
  }};
  spec.h1 = [](double z, double) { return z; };
  spec.h2 = [](double z, double) { return z; };
  spec.compensate_small_jumps = false;
  return spec;
}

}  // namespace mesugaki
