#include "oscimin/shooting.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "oscimin/errors.hpp"
#include "oscimin/oracles.hpp"

namespace oscimin {

std::string_view to_string(ShotStatus s) {
  switch (s) {
    case ShotStatus::found: return "found";
    case ShotStatus::no_critical_point: return "no_critical_point";
    case ShotStatus::blowup: return "blowup";
    case ShotStatus::integrator_failure: return "integrator_failure";
  }
  return "unknown";
}

ShotResult shoot(double a, double lambda, const IntegratorConfig& cfg) {
  if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("shoot: a must be positive");
  if (!(lambda > 0.0 && lambda < 0.25))
    throw std::invalid_argument("shoot: lambda must lie in (0, 1/4)");

  CriticalPoint cp = first_critical_point(a, lambda, cfg);
  ShotResult r;
  r.a = a;
  r.lambda = lambda;
  if (cp.T) {
    r.status = ShotStatus::found;
    r.T = cp.T;
    r.breakdown = breakdown_from_trajectory(cp.trajectory, *cp.T);
  } else {
    switch (cp.reason) {
      case Termination::blowup: r.status = ShotStatus::blowup; break;
      case Termination::step_underflow: r.status = ShotStatus::integrator_failure; break;
      default: r.status = ShotStatus::no_critical_point; break;
    }
  }
  r.trajectory = std::move(cp.trajectory);
  return r;
}

ShotResult j_tilde(double lambda, const IntegratorConfig& cfg) {
  if (!(lambda > 0.0 && lambda < 0.25))
    throw std::invalid_argument("j_tilde: lambda must lie in (0, 1/4)");
  return shoot(std::sqrt(lambda), lambda, cfg);
}

MethodOneResult j_of_lambda(double lambda, const IntegratorConfig& cfg, const InnerSearch& search) {
  if (!(lambda > 9.0 / 64.0 && lambda < 0.25))
    throw std::invalid_argument("j_of_lambda: lambda must lie in (9/64, 1/4)");
  if (search.scan_points < 3 || !(search.a_lo > 0.0) || !(search.a_hi > search.a_lo))
    throw std::invalid_argument("j_of_lambda: invalid a-scan");

  constexpr double inf = std::numeric_limits<double>::infinity();
  MethodOneResult out;
  std::optional<ShotResult> best;

  // keeps the lowest Q; on ties the smaller a wins
  auto consider = [&](ShotResult&& s) -> double {
    if (!s.found()) return inf;
    const double q = s.Q();
    if (!best || q < best->Q() || (q == best->Q() && s.a < best->a)) best = std::move(s);
    return q;
  };

  const std::size_t n = search.scan_points;
  const double ratio = std::log(search.a_hi / search.a_lo);
  std::vector<double> qs(n, inf);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = search.a_lo * std::exp(ratio * static_cast<double>(k) / static_cast<double>(n - 1));
    qs[k] = consider(shoot(a, lambda, cfg));
    out.scan.push_back({a, std::isfinite(qs[k]) ? std::optional<double>(qs[k]) : std::nullopt});
  }
  if (!best) {
    throw Error(Errc::no_admissible_shot,
                "no admissible shot at lambda = " + std::to_string(lambda));
  }

  const auto k_best = static_cast<std::size_t>(std::min_element(qs.begin(), qs.end()) - qs.begin());
  double lo = out.scan[k_best == 0 ? 0 : k_best - 1].a;
  double hi = out.scan[std::min(k_best + 1, n - 1)].a;

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto objective = [&](double a) { return consider(shoot(a, lambda, cfg)); };
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = objective(c);
  double fd = objective(d);
  while (hi - lo > search.a_tol) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = objective(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = objective(d);
    }
  }

  out.a_star = best->a;
  out.shot = std::move(*best);
  return out;
}

namespace {

struct Probe {
  double lambda;
  double g;
  ShotResult shot;
};

std::optional<Probe> probe(double lambda, const IntegratorConfig& cfg) {
  ShotResult s = j_tilde(lambda, cfg);
  if (!s.found()) return std::nullopt;
  const double g = s.Q() + lambda;
  return Probe{lambda, g, std::move(s)};
}

Probe probe_with_retry(double lambda, double retry_lambda, const IntegratorConfig& cfg) {
  if (auto p = probe(lambda, cfg)) return std::move(*p);
  if (auto p = probe(retry_lambda, cfg)) return std::move(*p);
  std::ostringstream msg;
  msg << "shot failed: no critical point for a = sqrt(lambda) at lambda = " << lambda
      << " and at the retracted lambda = " << retry_lambda;
  throw Error(Errc::shot_failed, msg.str());
}

double interpolate_root(double lo, double g_lo, double hi, double g_hi) {
  if (g_hi == g_lo) return 0.5 * (lo + hi);
  return lo - g_lo * (hi - lo) / (g_hi - g_lo);
}

}  // namespace

InfimumResult find_infimum(const IntegratorConfig& cfg, LambdaBracket bracket, double root_tol) {
  if (!(root_tol > 0.0)) throw std::invalid_argument("find_infimum: root_tol must be positive");
  if (!(bracket.lo < bracket.hi)) throw std::invalid_argument("find_infimum: need lo < hi");

  Probe lo = probe_with_retry(bracket.lo, bracket.lo + kFeasibilityRetract, cfg);
  Probe hi = probe_with_retry(bracket.hi, bracket.hi - kFeasibilityRetract, cfg);
  if ((lo.g > 0.0 && hi.g > 0.0) || (lo.g < 0.0 && hi.g < 0.0)) {
    std::ostringstream msg;
    msg << "bracket invalid: J~(lambda) + lambda has the same sign at lambda = " << lo.lambda
        << " (" << lo.g << ") and lambda = " << hi.lambda << " (" << hi.g << ")";
    throw Error(Errc::bracket_invalid, msg.str());
  }

  InfimumResult res;
  bool exact_hit = lo.g == 0.0 || hi.g == 0.0;
  double exact_lambda = lo.g == 0.0 ? lo.lambda : hi.lambda;
  bool regula_falsi_ok = true;
  int it = 0;
  while (!exact_hit && it < kMaxRootIterations && hi.lambda - lo.lambda > root_tol) {
    ++it;
    const double width = hi.lambda - lo.lambda;
    const bool use_rf = width < kRegulaFalsiWidth && regula_falsi_ok;
    double c = 0.5 * (lo.lambda + hi.lambda);
    if (use_rf) {
      c = interpolate_root(lo.lambda, lo.g, hi.lambda, hi.g);
      // step at least half a tolerance inside so one-sided convergence still
      // closes the bracket
      c = std::clamp(c, lo.lambda + 0.5 * root_tol, hi.lambda - 0.5 * root_tol);
    }
    Probe p = probe_with_retry(c, c - std::min(kFeasibilityRetract, 0.25 * width), cfg);
    if (p.lambda <= lo.lambda || p.lambda >= hi.lambda) {
      throw Error(Errc::shot_failed, "shot failed: retracted probe left the bracket");
    }
    if (p.g == 0.0) {
      exact_hit = true;
      exact_lambda = p.lambda;
      lo = std::move(p);
      break;
    }
    if ((p.g < 0.0) == (lo.g < 0.0)) {
      lo = std::move(p);
    } else {
      hi = std::move(p);
    }
    regula_falsi_ok = !use_rf || (hi.lambda - lo.lambda) <= 0.5 * width;
  }

  res.iterations = it;
  res.lambda_lo = lo.lambda;
  res.lambda_hi = hi.lambda;
  res.g_lo = lo.g;
  res.g_hi = hi.g;
  res.converged = exact_hit || hi.lambda - lo.lambda <= root_tol;
  res.lambda_root = exact_hit ? exact_lambda : interpolate_root(lo.lambda, lo.g, hi.lambda, hi.g);
  res.I = -res.lambda_root;
  res.shot = j_tilde(res.lambda_root, cfg);
  if (!res.shot.found())
    throw Error(Errc::shot_failed, "shot failed at the converged lambda");

  res.method_one = j_of_lambda(res.lambda_root, cfg);
  res.method_gap = std::abs(res.method_one.shot.Q() - res.shot.Q());
  res.methods_agree = res.method_gap <= 10.0 * root_tol;
  return res;
}

SampledFunction MinimizerProfile::sampled() const {
  SampledFunction f;
  f.grid.reserve(samples.size());
  f.values.reserve(samples.size());
  std::vector<double> d2;
  d2.reserve(samples.size());
  for (const auto& s : samples) {
    f.grid.push_back(s.x);
    f.values.push_back(s.u);
    d2.push_back(s.d2u);
  }
  f.d2 = std::move(d2);
  return f;
}

MinimizerProfile minimizer_profile(const ShotResult& shot, std::size_t n_samples) {
  if (!shot.found()) throw std::invalid_argument("minimizer_profile: shot has no critical point");
  if (n_samples < 3) throw std::invalid_argument("minimizer_profile: need at least 3 samples");
  const double T = *shot.T;
  const double I_value = -shot.lambda;
  const double half = 0.5 * static_cast<double>(n_samples - 1);

  MinimizerProfile p;
  p.samples.reserve(n_samples);
  p.first_integral.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    // symmetric index so that x = 0 and x = +-T are hit exactly
    const double k = static_cast<double>(i) - half;
    double x = T * k / half;
    if (i == n_samples - 1) x = T;
    const double r = std::min(std::abs(x), T);
    PhaseState s = shot.trajectory.at(r).phase;
    if (x < 0.0) {
      // even extension: odd derivatives flip sign
      s.du = -s.du;
      s.d3u = -s.d3u;
    }
    s.x = x;
    p.samples.push_back(s);
    p.first_integral.push_back(first_integral_residual(s, I_value));
  }
  return p;
}

std::vector<SweepRow> sweep_lambda(const IntegratorConfig& cfg, double from, double to,
                                   double step, unsigned threads) {
  if (!(step > 0.0)) throw std::invalid_argument("sweep: step must be positive");
  if (!(from > 0.0 && to < 0.25 && from <= to))
    throw std::invalid_argument("sweep: range must lie within (0, 1/4)");

  const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 0.5)) + 1;
  std::vector<SweepRow> rows(n);

  auto compute = [&](std::size_t k) {
    SweepRow row;
    row.lambda = from + static_cast<double>(k) * step;
    std::vector<std::string> issues;
    try {
      ShotResult s2 = j_tilde(row.lambda, cfg);
      if (s2.found()) {
        row.T2 = s2.T;
        row.J_tilde = s2.Q();
        row.g = s2.Q() + row.lambda;
      } else {
        issues.push_back("method2:" + std::string(to_string(s2.status)));
      }
    } catch (const std::exception& e) {
      issues.push_back(std::string("method2:") + e.what());
    }
    if (row.lambda > 9.0 / 64.0) {
      try {
        MethodOneResult m1 = j_of_lambda(row.lambda, cfg);
        row.a_star = m1.a_star;
        row.T1 = m1.shot.T;
        row.J = m1.shot.Q();
      } catch (const Error& e) {
        issues.push_back("method1:" + std::string(to_string(e.code())));
      } catch (const std::exception& e) {
        issues.push_back(std::string("method1:") + e.what());
      }
    } else {
      issues.push_back("method1:lambda_below_9/64");
    }
    if (!issues.empty()) {
      row.status.clear();
      for (std::size_t i = 0; i < issues.size(); ++i) row.status += (i ? ";" : "") + issues[i];
    }
    rows[k] = std::move(row);
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t k = 0; k < n; ++k) compute(k);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) compute(k);
    });
  }
  for (auto& t : pool) t.join();
  return rows;
}

}  // namespace oscimin
