#include "oscimin/ode_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace oscimin {

bool PhaseState::finite() const {
  return std::isfinite(x) && std::isfinite(u) && std::isfinite(du) && std::isfinite(d2u) &&
         std::isfinite(d3u);
}

AugmentedVec to_vec(const AugmentedState& s) {
  const auto& p = s.phase;
  return {p.u, p.du, p.d2u, p.d3u, s.acc_A, s.acc_B, s.acc_C, s.acc_D};
}

AugmentedState from_vec(double x, const AugmentedVec& v) {
  AugmentedState s;
  s.phase = {x, v[0], v[1], v[2], v[3]};
  s.acc_A = v[4];
  s.acc_B = v[5];
  s.acc_C = v[6];
  s.acc_D = v[7];
  return s;
}

StateDerivative el_rhs(const PhaseState& s, double lambda) {
  const double u = s.u, du = s.du, d2u = s.d2u;
  const double u2 = u * u;
  StateDerivative d;
  d.phase = {du, d2u, s.d3u, 2.0 * u * d2u + du * du - 2.0 * lambda * std::abs(u) * std::abs(u) * u};
  d.accumulators = {d2u * d2u, d2u * u2, u2 * u2, u * du * du};
  return d;
}

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw std::invalid_argument("integrator tolerances must be positive");
  if (!(x_max > 0.0)) throw std::invalid_argument("x_max must be positive");
  if (!(max_step > 0.0)) throw std::invalid_argument("max_step must be positive");
  if (!(blowup_threshold > 1.0)) throw std::invalid_argument("blowup_threshold must exceed 1");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::horizon: return "horizon";
    case Termination::blowup: return "blowup";
    case Termination::step_underflow: return "step_underflow";
    case Termination::event: return "event";
  }
  return "unknown";
}

Trajectory::Trajectory(double lambda, AugmentedState start) : lambda_(lambda) {
  states_.push_back(start);
}

void Trajectory::append(const Segment& segment, const AugmentedState& end) {
  segments_.push_back(segment);
  states_.push_back(end);
}

void Trajectory::truncate_after(std::size_t i, const Segment& segment, const AugmentedState& end) {
  states_.resize(i + 1);
  segments_.resize(i);
  append(segment, end);
}

AugmentedState Trajectory::at(double x) const {
  if (states_.empty() || x < x_begin() || x > x_end())
    throw std::out_of_range("position outside the trajectory span");
  if (x == x_end()) return states_.back();
  // first node strictly greater than x
  const auto it = std::upper_bound(states_.begin(), states_.end(), x,
                                   [](double v, const AugmentedState& s) { return v < s.phase.x; });
  const auto k = static_cast<std::size_t>(it - states_.begin()) - 1;
  if (x == states_[k].phase.x) return states_[k];
  return from_vec(x, segments_[k].eval(x));
}

namespace {

auto make_rhs(double lambda) {
  return [lambda](double, const AugmentedVec& v) {
    const PhaseState p{0.0, v[0], v[1], v[2], v[3]};
    const StateDerivative d = el_rhs(p, lambda);
    return AugmentedVec{d.phase[0], d.phase[1], d.phase[2], d.phase[3],
                        d.accumulators[0], d.accumulators[1], d.accumulators[2],
                        d.accumulators[3]};
  };
}

void validate_launch(const PhaseState& init, double lambda) {
  if (!init.finite()) throw std::invalid_argument("initial state must be finite");
  if (!std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite");
}

bool blown_up(const AugmentedVec& y, double threshold) {
  for (double v : y)
    if (!std::isfinite(v)) return true;
  return std::abs(y[0]) > threshold;
}

void record_step(TrajectoryMeta& meta, double h) {
  if (meta.accepted_steps == 0) {
    meta.min_step = meta.max_step = h;
  } else {
    meta.min_step = std::min(meta.min_step, h);
    meta.max_step = std::max(meta.max_step, h);
  }
  ++meta.accepted_steps;
}

// Runs the integration, calling `on_step(traj, seg, start_index)` after every
// accepted step that passed the blow-up check; it returns true to stop.
template <class OnStep>
Trajectory run(const PhaseState& init, double lambda, const IntegratorConfig& cfg,
               OnStep&& on_step) {
  cfg.validate();
  validate_launch(init, lambda);

  AugmentedState start;
  start.phase = init;
  Trajectory traj(lambda, start);
  const auto rhs = make_rhs(lambda);
  const rk::Tolerances tol{cfg.rel_tol, cfg.abs_tol};
  const double x_end = init.x + cfg.x_max;

  traj.meta().termination = Termination::horizon;
  const rk::DriveResult res = rk::drive<kAugmentedDim>(
      rhs, init.x, to_vec(start), x_end, tol, cfg.max_step,
      [&](const rk::StepOutcome<kAugmentedDim>& st) {
        const std::size_t start_index = traj.size() - 1;
        if (blown_up(st.y1, cfg.blowup_threshold)) {
          // keep the last good state; the blown-up one may be non-finite
          traj.meta().termination = Termination::blowup;
          return true;
        }
        record_step(traj.meta(), st.dense.h);
        traj.append(st.dense, from_vec(st.dense.x1(), st.y1));
        return on_step(traj, st.dense, start_index);
      });
  traj.meta().rejected_steps = res.rejected;
  if (res.status == rk::DriveStatus::step_underflow)
    traj.meta().termination = Termination::step_underflow;
  return traj;
}

}  // namespace

Trajectory integrate(const PhaseState& init, double lambda, const IntegratorConfig& cfg) {
  return run(init, lambda, cfg,
             [](Trajectory&, const Trajectory::Segment&, std::size_t) { return false; });
}

PhaseState shooting_launch(double a) { return {0.0, 1.0, 0.0, -a, 0.0}; }

CriticalPoint first_critical_point(double a, double lambda, const IntegratorConfig& cfg) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw std::invalid_argument("shooting parameter a must be positive");

  const auto rhs = make_rhs(lambda);
  const rk::Tolerances tol{cfg.rel_tol, cfg.abs_tol};
  std::optional<double> event_x;

  Trajectory traj = run(
      shooting_launch(a), lambda, cfg,
      [&](Trajectory& tr, const Trajectory::Segment& seg, std::size_t i) {
        const AugmentedState& prev = tr.states()[i];
        const AugmentedState& cur = tr.back();
        if (cur.phase.x <= kEventIgnoreBelow || cur.phase.du < 0.0) return false;
        // u'' (0) = -a < 0, so u' is negative just after the launch point
        if (!(prev.phase.du < 0.0 || prev.phase.x < kEventIgnoreBelow)) return false;

        double lo = std::max(seg.x0, kEventIgnoreBelow);
        if (seg.eval(lo, 1) >= 0.0) lo = seg.x0;
        double T = rk::bisect_dense(seg, 1, lo, seg.x1(), kEventXTol);

        // Close the trajectory with a genuine step from node i to T, then
        // polish T with Newton on u' (u'' is its derivative).
        const AugmentedVec y0 = to_vec(prev);
        const AugmentedVec f0 = rhs(prev.phase.x, y0);
        auto exact = rk::dopri5_step<kAugmentedDim>(rhs, prev.phase.x, y0, f0, T - prev.phase.x, tol);
        for (int it = 0; it < 4 && std::abs(exact.y1[1]) > 1e-3 * cfg.abs_tol; ++it) {
          const double step = exact.y1[1] / exact.y1[2];
          const double T_new = T - step;
          if (!(T_new > prev.phase.x) || !(T_new <= seg.x1() + (seg.x1() - prev.phase.x))) break;
          T = T_new;
          exact = rk::dopri5_step<kAugmentedDim>(rhs, prev.phase.x, y0, f0, T - prev.phase.x, tol);
        }
        tr.truncate_after(i, exact.dense, from_vec(T, exact.y1));
        event_x = T;
        return true;
      });

  CriticalPoint out;
  if (event_x) {
    traj.meta().termination = Termination::event;
    out.T = event_x;
  }
  out.reason = traj.meta().termination;
  out.trajectory = std::move(traj);
  return out;
}

}  // namespace oscimin
