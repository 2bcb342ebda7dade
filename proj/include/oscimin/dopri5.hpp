#pragma once

// Dormand-Prince 5(4) embedded Runge-Kutta pair with PI step control and
// 4th-order continuous extension. Fixed-size state, header-only so the
// Euler-Lagrange system and the auxiliary ODEs share one stepper.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace oscimin::rk {

template <std::size_t N>
using Vec = std::array<double, N>;

/// Continuous extension of one accepted step on [x0, x0 + h].
template <std::size_t N>
struct DenseSegment {
  double x0 = 0.0;
  double h = 0.0;
  std::array<Vec<N>, 5> r{};

  double x1() const { return x0 + h; }

  Vec<N> eval(double x) const {
    const double theta = (x - x0) / h;
    const double theta1 = 1.0 - theta;
    Vec<N> y;
    for (std::size_t i = 0; i < N; ++i) {
      y[i] = r[0][i] +
             theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
    }
    return y;
  }

  double eval(double x, std::size_t component) const {
    const double theta = (x - x0) / h;
    const double theta1 = 1.0 - theta;
    const std::size_t i = component;
    return r[0][i] +
           theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
  }
};

template <std::size_t N>
struct StepOutcome {
  Vec<N> y1{};
  Vec<N> f1{};  // rhs at (x0 + h, y1), reused as the next step's first stage
  double error_norm = 0.0;
  DenseSegment<N> dense;
};

struct Tolerances {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
};

namespace detail {
// Butcher tableau (Hairer, Norsett & Wanner, DOPRI5).
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                        a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0,
                        d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0,
                        d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace detail

/// One trial step from (x0, y0) with first stage f0 = rhs(x0, y0).
template <std::size_t N, class Rhs>
StepOutcome<N> dopri5_step(const Rhs& rhs, double x0, const Vec<N>& y0, const Vec<N>& f0,
                           double h, const Tolerances& tol) {
  using namespace detail;
  Vec<N> k2, k3, k4, k5, k6, tmp;
  const Vec<N>& k1 = f0;

  for (std::size_t i = 0; i < N; ++i) tmp[i] = y0[i] + h * a21 * k1[i];
  k2 = rhs(x0 + c2 * h, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y0[i] + h * (a31 * k1[i] + a32 * k2[i]);
  k3 = rhs(x0 + c3 * h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y0[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  k4 = rhs(x0 + c4 * h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y0[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  k5 = rhs(x0 + c5 * h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y0[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
  k6 = rhs(x0 + h, tmp);

  StepOutcome<N> out;
  for (std::size_t i = 0; i < N; ++i)
    out.y1[i] = y0[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
  out.f1 = rhs(x0 + h, out.y1);
  const Vec<N>& k7 = out.f1;

  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double err =
        h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double scale = tol.abs_tol + tol.rel_tol * std::max(std::abs(y0[i]), std::abs(out.y1[i]));
    sum += (err / scale) * (err / scale);
  }
  out.error_norm = std::sqrt(sum / static_cast<double>(N));

  auto& d = out.dense;
  d.x0 = x0;
  d.h = h;
  for (std::size_t i = 0; i < N; ++i) {
    const double ydiff = out.y1[i] - y0[i];
    const double bspl = h * k1[i] - ydiff;
    d.r[0][i] = y0[i];
    d.r[1][i] = ydiff;
    d.r[2][i] = bspl;
    d.r[3][i] = ydiff - h * k7[i] - bspl;
    d.r[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
  }
  return out;
}

/// Starting step size heuristic (Hairer & Wanner, II.4).
template <std::size_t N, class Rhs>
double initial_step(const Rhs& rhs, double x0, const Vec<N>& y0, const Vec<N>& f0,
                    const Tolerances& tol, double max_step) {
  double dnf = 0.0, dny = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sk = tol.abs_tol + tol.rel_tol * std::abs(y0[i]);
    dnf += (f0[i] / sk) * (f0[i] / sk);
    dny += (y0[i] / sk) * (y0[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
  h = std::min(h, max_step);

  Vec<N> y1;
  for (std::size_t i = 0; i < N; ++i) y1[i] = y0[i] + h * f0[i];
  const Vec<N> f1 = rhs(x0 + h, y1);
  double der2 = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sk = tol.abs_tol + tol.rel_tol * std::abs(y0[i]);
    const double v = (f1[i] - f0[i]) / sk;
    der2 += v * v;
  }
  der2 = std::sqrt(der2) / h;
  const double der12 = std::max(der2, std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, max_step});
}

/// PI step-size controller state (Gustafsson-type, as in DOPRI5).
class PiController {
 public:
  /// Factor by which to divide h after a step with the given error norm.
  double divisor(double err) const {
    const double fac11 = std::pow(err, kExpo);
    double fac = fac11 / std::pow(err_old_, kBeta);
    fac = std::max(kFacMaxInv, std::min(kFacMinInv, fac / kSafe));
    return fac;
  }
  double rejection_divisor(double err) const {
    const double fac11 = std::pow(err, kExpo);
    return std::min(kFacMinInv, fac11 / kSafe);
  }
  void accept(double err) { err_old_ = std::max(err, 1e-4); }

 private:
  static constexpr double kBeta = 0.04;
  static constexpr double kExpo = 0.2 - kBeta * 0.75;
  static constexpr double kSafe = 0.9;
  static constexpr double kFacMinInv = 5.0;   // h shrinks at most 5x per step
  static constexpr double kFacMaxInv = 0.1;   // h grows at most 10x per step
  double err_old_ = 1e-4;
};

/// Locates a sign change of component `c` of the dense output on
/// [lo, hi] by bisection. Requires opposite (or zero) signs at the ends.
template <std::size_t N>
double bisect_dense(const DenseSegment<N>& seg, std::size_t c, double lo, double hi,
                    double x_tol) {
  double f_lo = seg.eval(lo, c);
  for (int it = 0; it < 200 && hi - lo > x_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = seg.eval(mid, c);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

enum class DriveStatus { horizon, stopped, step_underflow };

struct DriveResult {
  DriveStatus status = DriveStatus::horizon;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

/// Adaptive integration from x0 towards x_end. `on_step(const StepOutcome&)`
/// is called after every accepted step and returns true to stop.
template <std::size_t N, class Rhs, class OnStep>
DriveResult drive(const Rhs& rhs, double x0, Vec<N> y, double x_end, const Tolerances& tol,
                  double max_step, OnStep&& on_step) {
  Vec<N> f = rhs(x0, y);
  double h = initial_step<N>(rhs, x0, y, f, tol, max_step);
  PiController pi;
  double x = x0;
  bool last_rejected = false;
  DriveResult result;
  constexpr double eps = std::numeric_limits<double>::epsilon();

  while (x < x_end) {
    bool reaches_end = false;
    if (x + 1.01 * h >= x_end) {
      h = x_end - x;
      reaches_end = true;
    }
    if (h <= 16.0 * eps * std::max(1.0, std::abs(x))) {
      result.status = DriveStatus::step_underflow;
      return result;
    }

    StepOutcome<N> st = dopri5_step<N>(rhs, x, y, f, h, tol);
    if (!std::isfinite(st.error_norm)) {
      h *= 0.2;
      last_rejected = true;
      ++result.rejected;
      continue;
    }
    if (st.error_norm <= 1.0) {
      pi.accept(st.error_norm);
      ++result.accepted;
      const double x_next = reaches_end ? x_end : x + h;
      const bool stop = on_step(static_cast<const StepOutcome<N>&>(st));
      double h_next = std::min(h / pi.divisor(st.error_norm), max_step);
      if (last_rejected) h_next = std::min(h_next, h);
      last_rejected = false;
      x = x_next;
      y = st.y1;
      f = st.f1;
      h = h_next;
      if (stop) {
        result.status = DriveStatus::stopped;
        return result;
      }
    } else {
      h /= pi.rejection_divisor(st.error_norm);
      last_rejected = true;
      ++result.rejected;
    }
  }
  return result;
}

}  // namespace oscimin::rk
