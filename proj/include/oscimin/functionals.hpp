#pragma once

// The quotient Q(u) = (int u''^2 - int u'' u^2) / int u^4 on an interval,
// evaluated either from integrator accumulators or from sampled data, and
// the two rescalings that act on it.

#include <optional>
#include <vector>

#include "oscimin/ode_core.hpp"

namespace oscimin {

class FunctionalBreakdown {
 public:
  /// Throws Error(undefined_quotient) unless C > 0.
  FunctionalBreakdown(double A, double B, double C, double x_lo, double x_hi);

  double A() const { return A_; }
  double B() const { return B_; }
  double C() const { return C_; }
  double Q() const { return Q_; }
  double x_lo() const { return x_lo_; }
  double x_hi() const { return x_hi_; }

 private:
  double A_, B_, C_, Q_, x_lo_, x_hi_;
};

/// u on a strictly increasing grid, optionally with exact u'' values.
/// For periodic use the grid is closed: the last node is the image of the
/// first one after one period.
struct SampledFunction {
  std::vector<double> grid;
  std::vector<double> values;
  std::optional<std::vector<double>> d2;

  /// Throws std::invalid_argument on mismatched sizes or a non-increasing grid.
  void validate() const;
};

/// Reads A, B, C from the accumulators at x_hi (interpolated when x_hi falls
/// inside a step). Throws std::out_of_range outside the trajectory span.
FunctionalBreakdown breakdown_from_trajectory(const Trajectory& traj, double x_hi);

/// Composite Simpson quadrature of u''^2, u'' u^2 and u^4 on the grid. When
/// u'' is not supplied it is estimated with 5-point stencils (wrapped when
/// periodic, one-sided at the ends otherwise). On a uniform grid the error is
/// O(h^4) with either source of u''; one-sided boundary stencils on open
/// grids lower that to O(h^3).
FunctionalBreakdown q_of_sampled(const SampledFunction& f, bool periodic);

/// x -> sigma^2 u(sigma x): the scaling that leaves Q unchanged.
SampledFunction rescale(const SampledFunction& f, double sigma);

/// x -> mu^{1/4} u(mu x): keeps int u^4 and moves the ratio B / A.
SampledFunction nehari_rescale(const SampledFunction& f, double mu);

/// mu = (B / (2A))^{4/7}, the minimizer of mu^{7/2} A - mu^{7/4} B.
double nehari_optimal_mu(const FunctionalBreakdown& b);

/// |int u'' u^2 + 2 int u u'^2|, the boundary term of one integration by parts.
double parts_identity_residual(const SampledFunction& f, bool periodic);

namespace numerics {

/// Composite Simpson on a possibly non-uniform grid; an odd number of
/// intervals is closed with the three-point end correction.
double simpson(const std::vector<double>& x, const std::vector<double>& y);

/// Stencil derivative of order `order` (1 or 2) at every grid node.
std::vector<double> differentiate(const std::vector<double>& x, const std::vector<double>& y,
                                  int order, bool periodic);

}  // namespace numerics

}  // namespace oscimin
