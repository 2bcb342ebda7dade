#include "oscimin/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "oscimin/dopri5.hpp"
#include "oscimin/errors.hpp"

namespace oscimin {

namespace {

OracleReport make(std::string name, Relation rel, double expected, double observed) {
  OracleReport r;
  r.name = std::move(name);
  r.relation = rel;
  r.expected = expected;
  r.observed = observed;
  return r;
}

}  // namespace

OracleReport report_within(std::string name, double expected, double observed, double tolerance) {
  OracleReport r = make(std::move(name), Relation::within, expected, observed);
  r.tolerance = tolerance;
  r.passed = std::abs(observed - expected) <= tolerance;
  return r;
}

OracleReport report_at_least(std::string name, double bound, double observed) {
  OracleReport r = make(std::move(name), Relation::at_least, bound, observed);
  r.passed = observed >= bound;
  return r;
}

OracleReport report_at_most(std::string name, double bound, double observed) {
  OracleReport r = make(std::move(name), Relation::at_most, bound, observed);
  r.passed = observed <= bound;
  return r;
}

OracleReport report_exceeds(std::string name, double bound, double observed) {
  OracleReport r = make(std::move(name), Relation::exceeds, bound, observed);
  r.passed = observed > bound;
  return r;
}

OracleReport report_inside(std::string name, double lo, double hi, double observed) {
  OracleReport r = make(std::move(name), Relation::inside, lo, observed);
  r.upper = hi;
  r.passed = lo < observed && observed < hi;
  return r;
}

const char* to_string(Relation r) {
  switch (r) {
    case Relation::within: return "within";
    case Relation::at_least: return "at_least";
    case Relation::at_most: return "at_most";
    case Relation::exceeds: return "exceeds";
    case Relation::inside: return "inside";
  }
  return "unknown";
}

double first_integral_residual(const PhaseState& s, double I_value) {
  const double u2 = s.u * s.u;
  return s.du * s.d3u - 0.5 * s.d2u * s.d2u - s.du * s.du * s.u - 0.5 * I_value * u2 * u2;
}

namespace {

// (y, y', int ubar''^2, int ubar'' ubar^2, int ubar^4) for ubar = y^3
constexpr std::size_t kBarDim = 5;
using BarVec = rk::Vec<kBarDim>;

double bar_d2(double y, double dy) {
  const double y2 = y * y;
  return 6.0 * y * dy * dy + 0.375 * y2 * y2 * y2;
}

BarVec bar_rhs(double, const BarVec& v) {
  const double y = v[0], dy = v[1];
  const double y2 = y * y;
  const double ub = y2 * y;
  const double d2 = bar_d2(y, dy);
  return {dy, 0.125 * y2 * y2, d2 * d2, d2 * ub * ub, ub * ub * ub * ub};
}

}  // namespace

BarU bar_u_construction(double y0, const IntegratorConfig& cfg, std::size_t n_samples) {
  if (!(y0 < 0.0) || !std::isfinite(y0)) throw std::invalid_argument("bar_u: y0 must be negative");
  if (n_samples < 5) throw std::invalid_argument("bar_u: need at least 5 samples");
  cfg.validate();

  const rk::Tolerances tol{cfg.rel_tol, cfg.abs_tol};
  std::vector<BarVec> nodes{BarVec{y0, 0.0, 0.0, 0.0, 0.0}};
  std::vector<double> xs{0.0};
  std::vector<rk::DenseSegment<kBarDim>> segs;
  std::optional<double> x1;

  rk::drive<kBarDim>(bar_rhs, 0.0, nodes.front(), cfg.x_max, tol, cfg.max_step,
                     [&](const rk::StepOutcome<kBarDim>& st) {
                       const BarVec& prev = nodes.back();
                       const double x0 = st.dense.x0;
                       if (st.y1[0] < 0.0) {
                         nodes.push_back(st.y1);
                         xs.push_back(st.dense.x1());
                         segs.push_back(st.dense);
                         return false;
                       }
                       double x = rk::bisect_dense(st.dense, 0, x0, st.dense.x1(), 1e-13);
                       const BarVec f0 = bar_rhs(x0, prev);
                       auto exact = rk::dopri5_step<kBarDim>(bar_rhs, x0, prev, f0, x - x0, tol);
                       for (int it = 0; it < 4 && exact.y1[0] != 0.0 && exact.y1[1] > 0.0; ++it) {
                         const double x_new = x - exact.y1[0] / exact.y1[1];
                         if (!(x_new > x0)) break;
                         x = x_new;
                         exact = rk::dopri5_step<kBarDim>(bar_rhs, x0, prev, f0, x - x0, tol);
                       }
                       nodes.push_back(exact.y1);
                       xs.push_back(x);
                       segs.push_back(exact.dense);
                       x1 = x;
                       return true;
                     });
  if (!x1) {
    throw Error(Errc::construction_failed,
                "construction failed: y did not reach 0 before x_max");
  }

  const BarVec& end = nodes.back();
  BarU out{SampledFunction{}, {}, *x1,
           FunctionalBreakdown(2.0 * end[2], 2.0 * end[3], 2.0 * end[4], -*x1, *x1)};

  const double delta = 0.25 * *x1;
  const double lo = -*x1 - delta, hi = *x1 + delta;
  std::vector<double> d2;
  d2.reserve(n_samples);
  out.samples.grid.reserve(n_samples);
  out.samples.values.reserve(n_samples);
  out.d1.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    const double r = std::abs(x);
    double u = 0.0, du = 0.0, ddu = 0.0;
    if (r < *x1) {
      const auto it = std::upper_bound(xs.begin(), xs.end(), r);
      const auto k = static_cast<std::size_t>(it - xs.begin()) - 1;
      const BarVec v = segs[k].eval(r);
      const double y = std::min(v[0], 0.0), dy = v[1];
      u = y * y * y;
      du = 3.0 * y * y * dy * (x < 0.0 ? -1.0 : 1.0);
      ddu = bar_d2(y, dy);
    }
    out.samples.grid.push_back(x);
    out.samples.values.push_back(u);
    out.d1.push_back(du);
    d2.push_back(ddu);
  }
  out.samples.d2 = std::move(d2);
  return out;
}

double bar_u_ode_residual(const BarU& bar, double margin) {
  const auto& g = bar.samples.grid;
  const auto& u = bar.samples.values;
  const std::vector<double> d1 = numerics::differentiate(g, u, 1, false);
  const std::vector<double> d2 = numerics::differentiate(g, u, 2, false);
  // the stencil must not straddle the kink of ubar'' at the support edge
  const double spacing = (g.back() - g.front()) / static_cast<double>(g.size() - 1);
  const double keep_out = std::max(margin, 3.0 * spacing);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(g[i]) > bar.support_edge - keep_out) continue;
    const double res = d2[i] - 0.375 * u[i] * u[i] - (2.0 / 3.0) * d1[i] * d1[i] / u[i];
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

IdentityResiduals infimum_identities(const ShotResult& shot, std::optional<double> lambda) {
  if (!shot.found()) throw std::invalid_argument("infimum_identities: shot has no critical point");
  const AugmentedState& end = shot.trajectory.back();
  IdentityResiduals r;
  r.lambda = lambda.value_or(-shot.Q());
  r.a = shot.a;
  r.T = *shot.T;
  const double A = 2.0 * end.acc_A;
  const double C = 2.0 * end.acc_C;
  const double D = 2.0 * end.acc_D;
  const double lam = r.lambda;
  r.full_C = C;
  r.r1 = A + 3.0 * D + 2.0 * lam * C;
  r.r2 = r.T * (lam - r.a * r.a) + 1.5 * A + D - 0.5 * lam * C;
  r.r3 = A + 2.0 * D + lam * C;
  return r;
}

double period_lower_bound(double I_value) { return std::pow(std::abs(I_value) / 2.0, -2.0 / 7.0); }

double l4_normalized_period(double T, double half_period_C) {
  if (!(half_period_C > 0.0)) throw std::invalid_argument("l4_normalized_period: C must be positive");
  return T * std::pow(half_period_C, 1.0 / 7.0);
}

OracleReport period_bound_check(double I_value, double T) {
  if (!(I_value < 0.0)) throw std::invalid_argument("period_bound_check: I must be negative");
  if (!(T > 0.0)) throw std::invalid_argument("period_bound_check: T must be positive");
  OracleReport r = report_at_least("period_bound", period_lower_bound(I_value), T);
  r.note = "bound derived for the normalization int_0^T u^4 = 1";
  return r;
}

OracleReport bounds_check(double I_value) {
  return report_inside("interval_bounds", -0.25, -9.0 / 64.0, I_value);
}

}  // namespace oscimin
