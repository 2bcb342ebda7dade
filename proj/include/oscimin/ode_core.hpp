#pragma once

// Euler-Lagrange system of the scaling-invariant fourth-order quotient,
//   u'''' = 2 u u'' + u'^2 - 2 lambda u^3,
// integrated together with the running integrals of u''^2, u'' u^2, u^4
// and u u'^2.

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "oscimin/dopri5.hpp"

namespace oscimin {

/// 4-jet of the unknown at a position x.
struct PhaseState {
  double x = 0.0;
  double u = 0.0;
  double du = 0.0;
  double d2u = 0.0;
  double d3u = 0.0;

  bool finite() const;
};

/// Phase variables plus the running integrals from the launch point.
struct AugmentedState {
  PhaseState phase;
  double acc_A = 0.0;  // int u''^2
  double acc_B = 0.0;  // int u'' u^2
  double acc_C = 0.0;  // int u^4
  double acc_D = 0.0;  // int u u'^2
};

inline constexpr std::size_t kAugmentedDim = 8;
using AugmentedVec = rk::Vec<kAugmentedDim>;

AugmentedVec to_vec(const AugmentedState& s);
AugmentedState from_vec(double x, const AugmentedVec& v);

/// Derivative of the augmented state: (u', u'', u''', u'''') followed by the
/// accumulator rates (u''^2, u'' u^2, u^4, u u'^2).
struct StateDerivative {
  std::array<double, 4> phase{};
  std::array<double, 4> accumulators{};
};

StateDerivative el_rhs(const PhaseState& s, double lambda);

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 1.0;
  double x_max = 50.0;
  double blowup_threshold = 1e8;

  /// Throws std::invalid_argument if any field is out of its domain.
  void validate() const;
};

enum class Termination { horizon, blowup, step_underflow, event };

std::string_view to_string(Termination t);

struct TrajectoryMeta {
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  double min_step = 0.0;
  double max_step = 0.0;
  Termination termination = Termination::horizon;
};

/// Accepted integrator nodes with the continuous extension of every step,
/// so the solution can be evaluated anywhere on [front().x, back().x].
class Trajectory {
 public:
  using Segment = rk::DenseSegment<kAugmentedDim>;

  Trajectory() = default;
  Trajectory(double lambda, AugmentedState start);

  void append(const Segment& segment, const AugmentedState& end);
  /// Drops everything after node i and closes with `segment` ending in `end`.
  void truncate_after(std::size_t i, const Segment& segment, const AugmentedState& end);

  const std::vector<AugmentedState>& states() const { return states_; }
  const std::vector<Segment>& segments() const { return segments_; }
  const AugmentedState& front() const { return states_.front(); }
  const AugmentedState& back() const { return states_.back(); }
  std::size_t size() const { return states_.size(); }

  double x_begin() const { return states_.front().phase.x; }
  double x_end() const { return states_.back().phase.x; }
  double lambda() const { return lambda_; }

  TrajectoryMeta& meta() { return meta_; }
  const TrajectoryMeta& meta() const { return meta_; }

  /// Dense-output evaluation; throws std::out_of_range outside the span.
  AugmentedState at(double x) const;

 private:
  double lambda_ = 0.0;
  std::vector<AugmentedState> states_;
  std::vector<Segment> segments_;
  TrajectoryMeta meta_;
};

/// Integrates from `init` (accumulators start at zero) until cfg.x_max or
/// until |u| exceeds cfg.blowup_threshold. A step-size underflow ends the
/// run with Termination::step_underflow and the last good state.
Trajectory integrate(const PhaseState& init, double lambda, const IntegratorConfig& cfg);

/// Launch state of the shooting problem: u = 1, u' = u''' = 0, u'' = -a.
PhaseState shooting_launch(double a);

struct CriticalPoint {
  std::optional<double> T;  // first x > 0 with u'(x) = 0, if any
  Trajectory trajectory;    // truncated at T when found
  Termination reason = Termination::horizon;
};

/// Sign changes of u' closer than this to the launch point are ignored.
inline constexpr double kEventIgnoreBelow = 1e-8;
/// Bisection tolerance in x for event localization.
inline constexpr double kEventXTol = 1e-12;

/// First positive zero of u' for the launch (1, 0, -a, 0). Throws
/// std::invalid_argument for a <= 0 or a non-finite lambda.
CriticalPoint first_critical_point(double a, double lambda, const IntegratorConfig& cfg);

}  // namespace oscimin
