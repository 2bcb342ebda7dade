#pragma once

// Analytic checks that do not go through the shooting pipeline: the
// compactly supported test function with Q = -9/64, the first integral of
// the Euler-Lagrange equation, the integral identities satisfied by a
// periodic solution, and the interval and period bounds on I.

#include <optional>
#include <string>
#include <vector>

#include "oscimin/functionals.hpp"
#include "oscimin/ode_core.hpp"
#include "oscimin/shooting.hpp"

namespace oscimin {

enum class Relation {
  within,    // |observed - expected| <= tolerance
  at_least,  // observed >= expected
  at_most,   // observed <= expected
  exceeds,   // observed > expected
  inside,    // expected < observed < upper
};

struct OracleReport {
  std::string name;
  Relation relation = Relation::within;
  double expected = 0.0;
  double upper = 0.0;  // only for Relation::inside
  double observed = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string note;
};

OracleReport report_within(std::string name, double expected, double observed, double tolerance);
OracleReport report_at_least(std::string name, double bound, double observed);
OracleReport report_at_most(std::string name, double bound, double observed);
OracleReport report_exceeds(std::string name, double bound, double observed);
OracleReport report_inside(std::string name, double lo, double hi, double observed);

const char* to_string(Relation r);

/// H = u' u''' - u''^2 / 2 - u'^2 u - I u^4 / 2, conserved along solutions of
/// the Euler-Lagrange equation with lambda = -I.
double first_integral_residual(const PhaseState& s, double I_value);

/// ubar = y^3 on the support of the solution of y'' = y^4 / 8,
/// y(0) = y0 < 0, y'(0) = 0, extended evenly and by zero.
struct BarU {
  SampledFunction samples;  // on [-x1 - x1/4, x1 + x1/4], exact u'' attached
  std::vector<double> d1;   // exact u' at the samples
  double support_edge = 0.0;  // x1, first zero of y
  /// The three integrals over (-x1, x1) carried as extra integrator
  /// components, independent of the sample quadrature.
  FunctionalBreakdown integrated;
};

/// Throws std::invalid_argument for y0 >= 0 and Error(construction_failed)
/// when y does not reach 0 within cfg.x_max.
BarU bar_u_construction(double y0, const IntegratorConfig& cfg, std::size_t n_samples = 8192);

/// Largest |u'' - 3/8 u^2 - 2/3 u'^2 / u| over samples at distance at least
/// max(margin, 3 grid spacings) from the support boundary, with u', u'' from
/// 5-point stencils on the samples.
double bar_u_ode_residual(const BarU& bar, double margin);

struct IdentityResiduals {
  double lambda = 0.0;     // -Q on (0, T), the multiplier used in all three
  double a = 0.0;          // -u''(0) of the shot
  double T = 0.0;
  double full_C = 0.0;     // int u^4 over (0, 2T)
  double r1 = 0.0;         // int u''^2 + 3 int u u'^2 + 2 lambda int u^4
  double r2 = 0.0;         // T (lambda - u''(0)^2) + 3/2 int u''^2 + int u u'^2 - lambda/2 int u^4
  double r3 = 0.0;         // int u''^2 + 2 int u u'^2 + lambda int u^4

  double rel1() const { return r1 / full_C; }
  double rel2() const { return r2 / full_C; }
  double rel3() const { return r3 / full_C; }
};

/// Residuals of the three identities over (0, 2T), with the half-period
/// integrals of the shot doubled by evenness. Requires a found shot.
/// `lambda` replaces -Q as the multiplier when given.
IdentityResiduals infimum_identities(const ShotResult& shot,
                                     std::optional<double> lambda = std::nullopt);

/// (|I| / 2)^{-2/7}.
double period_lower_bound(double I_value);

/// Period after u -> sigma^2 u(sigma x) with int_0^T u^4 = 1: T C^{1/7}.
double l4_normalized_period(double T, double half_period_C);

/// passed iff T >= (|I| / 2)^{-2/7}. Requires I < 0 and T > 0.
OracleReport period_bound_check(double I_value, double T);

/// passed iff -1/4 < I < -9/64.
OracleReport bounds_check(double I_value);

}  // namespace oscimin
