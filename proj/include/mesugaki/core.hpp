#pragma once

// Shared domain types: jump events, path histories with strict left-limit
// queries, driving paths for Cox-type intensities, and time grids.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mesugaki {

//---------------------------------------------------------------------------//
// Error types
//---------------------------------------------------------------------------//

/// Argument outside the domain of an operation (bad parameter, bad time).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A model broke its declared contract (negative rate, bound exceeded).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A simulation exceeded its event cap.
class RunawayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested operation is not available for this model.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A mark integral did not converge.
class IntegrabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

//---------------------------------------------------------------------------//
// Events and histories
//---------------------------------------------------------------------------//

/// A jump at `time` with size `mark` (1 for plain counting processes).
struct JumpEvent {
  double time = 0.0;
  double mark = 1.0;

  friend bool operator==(const JumpEvent&, const JumpEvent&) = default;
};

inline JumpEvent make_event(double time, double mark = 1.0) {
  if (!(time >= 0.0) || !std::isfinite(time)) {
    throw DomainError("jump time must be finite and nonnegative");
  }
  if (mark == 0.0 || !std::isfinite(mark)) {
    throw DomainError("jump mark must be finite and nonzero");
  }
  return {time, mark};
}

/// Piecewise-linear record of an auxiliary adapted process X_t.
///
/// Outside the recorded knots the value is held constant.
class DrivingPath {
 public:
  DrivingPath(std::vector<double> times, std::vector<double> values)
      : times_(std::move(times)), values_(std::move(values)) {
    if (times_.empty() || times_.size() != values_.size()) {
      throw DomainError("driving path needs matching, nonempty knots");
    }
    if (!std::is_sorted(times_.begin(), times_.end()) ||
        std::adjacent_find(times_.begin(), times_.end()) != times_.end()) {
      throw DomainError("driving path knots must be strictly increasing");
    }
  }

  /// Sample `fn` on [0, horizon] every `step`.
  template <class Fn>
  static DrivingPath sample(Fn&& fn, double horizon, double step) {
    if (!(horizon > 0.0) || !(step > 0.0)) {
      throw DomainError("driving path sampling needs positive horizon/step");
    }
    const auto n = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
    std::vector<double> t(n + 1), x(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      t[i] = std::min(horizon, static_cast<double>(i) * step);
      x[i] = fn(t[i]);
    }
    return DrivingPath(std::move(t), std::move(x));
  }

  double value_at(double t) const {
    if (t <= times_.front()) return values_.front();
    if (t >= times_.back()) return values_.back();
    auto hi = std::upper_bound(times_.begin(), times_.end(), t);
    auto i = static_cast<std::size_t>(hi - times_.begin());
    const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
    return values_[i - 1] + w * (values_[i] - values_[i - 1]);
  }

  /// Knot times strictly inside (a, b).
  std::vector<double> knots_between(double a, double b) const {
    auto lo = std::upper_bound(times_.begin(), times_.end(), a);
    auto hi = std::lower_bound(times_.begin(), times_.end(), b);
    return lo < hi ? std::vector<double>(lo, hi) : std::vector<double>{};
  }

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
};

/// Non-owning view of the information F_t available to an intensity rule.
///
/// `state` carries the scalar left limit X_{t-} when the view is produced by
/// an SDE driver; it is NaN otherwise.
struct HistoryView {
  std::span<const JumpEvent> events;
  const DrivingPath* driving = nullptr;
  double origin = 0.0;
  double state = std::numeric_limits<double>::quiet_NaN();

  std::size_t count() const { return events.size(); }

  double mark_sum() const {
    double s = 0.0;
    for (const auto& e : events) s += e.mark;
    return s;
  }

  bool has_state() const { return !std::isnan(state); }

  /// Restriction to events strictly before t.
  HistoryView before(double t) const {
    auto it = std::lower_bound(
        events.begin(), events.end(), t,
        [](const JumpEvent& e, double value) { return e.time < value; });
    HistoryView out = *this;
    out.events = events.first(static_cast<std::size_t>(it - events.begin()));
    return out;
  }
};

/// Time-ordered record of jumps plus the optional driving path.
class PathHistory {
 public:
  explicit PathHistory(double origin = 0.0,
                       std::shared_ptr<const DrivingPath> driving = nullptr)
      : origin_(origin), driving_(std::move(driving)) {}

  PathHistory(std::vector<JumpEvent> events, double origin = 0.0,
              std::shared_ptr<const DrivingPath> driving = nullptr)
      : PathHistory(origin, std::move(driving)) {
    events_.reserve(events.size());
    for (const auto& e : events) append(e);
  }

  /// Append an event; times must be strictly increasing and not precede
  /// the origin.
  void append(JumpEvent e) {
    if (e.mark == 0.0) throw DomainError("jump mark must be nonzero");
    if (e.time < origin_) throw DomainError("event precedes history origin");
    if (!events_.empty() && !(e.time > events_.back().time)) {
      throw DomainError("event times must be strictly increasing");
    }
    events_.push_back(e);
  }

  const std::vector<JumpEvent>& events() const { return events_; }
  double origin() const { return origin_; }
  const std::shared_ptr<const DrivingPath>& driving_path() const {
    return driving_;
  }
  bool empty() const { return events_.empty(); }
  std::size_t size() const { return events_.size(); }

  HistoryView view() const {
    return HistoryView{std::span<const JumpEvent>(events_), driving_.get(),
                       origin_};
  }

  HistoryView view_before(double t) const { return view().before(t); }

 private:
  std::vector<JumpEvent> events_;
  double origin_ = 0.0;
  std::shared_ptr<const DrivingPath> driving_;
};

/// Restriction of `history` to events with time strictly less than t.
inline PathHistory history_before(const PathHistory& history, double t) {
  if (t < history.origin()) {
    throw DomainError("history_before: t precedes the history origin");
  }
  auto v = history.view_before(t);
  PathHistory out(history.origin(), history.driving_path());
  for (const auto& e : v.events) out.append(e);
  return out;
}

//---------------------------------------------------------------------------//
// Time grids
//---------------------------------------------------------------------------//

/// Uniform grid on [0, horizon]; the last step is shortened if needed.
class TimeGrid {
 public:
  TimeGrid(double horizon, double step) : horizon_(horizon), step_(step) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      throw DomainError("time grid horizon must be positive");
    }
    if (!(step > 0.0) || step > horizon) {
      throw DomainError("time grid step must lie in (0, horizon]");
    }
    steps_ = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  }

  double horizon() const { return horizon_; }
  double step() const { return step_; }
  std::size_t steps() const { return steps_; }

  double node(std::size_t i) const {
    return i >= steps_ ? horizon_ : static_cast<double>(i) * step_;
  }

 private:
  double horizon_;
  double step_;
  std::size_t steps_ = 0;
};

}  // namespace mesugaki
