#pragma once

// Shooting schemes for the sharp constant:
//   method 1, J(lambda): minimize the half-period quotient over a = -u''(0);
//   method 2, J~(lambda): fix a = sqrt(lambda);
// and the root of J~(lambda) + lambda = 0, which gives I = -lambda.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oscimin/functionals.hpp"
#include "oscimin/ode_core.hpp"

namespace oscimin {

enum class ShotStatus { found, no_critical_point, blowup, integrator_failure };

std::string_view to_string(ShotStatus s);

struct ShotResult {
  double a = 0.0;
  double lambda = 0.0;
  ShotStatus status = ShotStatus::no_critical_point;
  std::optional<double> T;                       // set iff found
  std::optional<FunctionalBreakdown> breakdown;  // over (0, T), set iff found
  Trajectory trajectory;                         // truncated at T when found

  bool found() const { return status == ShotStatus::found; }
  /// Quotient on (0, T); only valid when found().
  double Q() const { return breakdown->Q(); }
};

/// Launches (1, 0, -a, 0) and stops at the first critical point.
/// Requires a > 0 and 0 < lambda < 1/4 (std::invalid_argument otherwise).
ShotResult shoot(double a, double lambda, const IntegratorConfig& cfg);

/// Method 2: shoot(sqrt(lambda), lambda).
ShotResult j_tilde(double lambda, const IntegratorConfig& cfg);

struct ScanPoint {
  double a = 0.0;
  std::optional<double> Q;  // empty when the shot has no critical point
};

struct MethodOneResult {
  double a_star = 0.0;
  ShotResult shot;
  std::vector<ScanPoint> scan;  // coarse a-scan kept for audit
};

/// Parameters of the inner minimization over a.
struct InnerSearch {
  double a_lo = 0.05;
  double a_hi = 1.5;
  std::size_t scan_points = 30;  // log-spaced
  double a_tol = 1e-8;
};

/// Method 1: golden-section minimization of a -> Q over the feasible a,
/// started from a log-spaced scan. Requires 9/64 < lambda < 1/4.
/// Throws Error(no_admissible_shot) if no scanned a has a critical point.
MethodOneResult j_of_lambda(double lambda, const IntegratorConfig& cfg,
                            const InnerSearch& search = {});

struct LambdaBracket {
  double lo = 0.141;
  double hi = 0.249;
};

struct InfimumResult {
  double I = 0.0;
  double lambda_root = 0.0;
  ShotResult shot;  // method-2 shot at lambda_root
  double lambda_lo = 0.0, lambda_hi = 0.0;
  double g_lo = 0.0, g_hi = 0.0;  // J~ + lambda at the final bracket ends
  int iterations = 0;
  bool converged = false;  // final bracket width <= root_tol

  MethodOneResult method_one;  // J at lambda_root
  double method_gap = 0.0;     // |J(lambda_root) - J~(lambda_root)|
  bool methods_agree = false;  // method_gap <= 10 root_tol
};

inline constexpr int kMaxRootIterations = 60;
inline constexpr double kRegulaFalsiWidth = 1e-2;
inline constexpr double kFeasibilityRetract = 1e-3;

/// Solves J~(lambda) + lambda = 0 by bisection, switching to safeguarded
/// regula falsi once the bracket is narrower than 1e-2. Throws
/// Error(bracket_invalid) when g has the same sign at both ends and
/// Error(shot_failed) when a probe has no critical point even after one
/// retraction.
InfimumResult find_infimum(const IntegratorConfig& cfg, LambdaBracket bracket = {},
                           double root_tol = 1e-9);

/// Samples one full period [-T, T] of the even extension of a found shot.
struct MinimizerProfile {
  std::vector<PhaseState> samples;
  std::vector<double> first_integral;  // H at every sample, with I = -lambda

  SampledFunction sampled() const;
};

MinimizerProfile minimizer_profile(const ShotResult& shot, std::size_t n_samples = 2001);

struct SweepRow {
  double lambda = 0.0;
  std::optional<double> a_star, T1, J;     // method 1
  std::optional<double> T2, J_tilde, g;    // method 2
  std::string status = "ok";

  bool complete() const { return J && J_tilde; }
};

/// One row per lambda = from + k step up to `to`. Rows are independent and
/// computed on up to `threads` workers; the result is in lambda order.
std::vector<SweepRow> sweep_lambda(const IntegratorConfig& cfg, double from, double to,
                                   double step, unsigned threads = 1);

}  // namespace oscimin
