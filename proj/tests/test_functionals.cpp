#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "oscimin/errors.hpp"
#include "oscimin/functionals.hpp"
#include "oscimin/shooting.hpp"

using namespace oscimin;

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
SampledFunction sample(F&& u, double lo, double hi, std::size_t n) {
  SampledFunction f;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    f.grid.push_back(x);
    f.values.push_back(u(x));
  }
  return f;
}

SampledFunction cos_period(std::size_t n) {
  return sample([](double x) { return std::cos(x); }, 0.0, 2.0 * kPi, n);
}

FunctionalBreakdown errc_probe(const SampledFunction& f, bool periodic, Errc& code) {
  try {
    return q_of_sampled(f, periodic);
  } catch (const Error& e) {
    code = e.code();
    throw;
  }
}

}  // namespace

TEST_CASE("breakdown stores Q = (A - B) / C") {
  const FunctionalBreakdown b(3.0, 1.0, 4.0, 0.0, 1.0);
  CHECK(b.Q() == 0.5);
  CHECK(b.Q() * b.C() == b.A() - b.B());
  const FunctionalBreakdown nehari(1.0, 2.0, 5.0, 0.0, 1.0);
  CHECK(nehari.Q() == doctest::Approx(-nehari.A() / nehari.C()));
  CHECK_THROWS_AS(FunctionalBreakdown(1.0, 0.0, 0.0, 0.0, 1.0), Error);
}

TEST_CASE("zero trajectory has an undefined quotient") {
  IntegratorConfig cfg;
  cfg.x_max = 5.0;
  const Trajectory t = integrate({}, 0.2, cfg);
  try {
    breakdown_from_trajectory(t, 5.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::undefined_quotient);
    CHECK(std::string(e.what()).find("undefined quotient") != std::string::npos);
  }
}

TEST_CASE("breakdown of the minimizing shot") {
  const double lambda = 0.1580;
  const CriticalPoint cp = first_critical_point(std::sqrt(lambda), lambda, {});
  REQUIRE(cp.T);
  const FunctionalBreakdown b = breakdown_from_trajectory(cp.trajectory, *cp.T);
  CHECK(b.Q() == doctest::Approx(-0.1580).epsilon(5e-4 / 0.158));
  CHECK(b.x_lo() == 0.0);
  CHECK(b.x_hi() == *cp.T);
  CHECK_THROWS_AS(breakdown_from_trajectory(cp.trajectory, *cp.T + 1.0), std::out_of_range);
  // interpolated inside a step agrees with the node value at the end
  const FunctionalBreakdown mid = breakdown_from_trajectory(cp.trajectory, 0.5 * *cp.T);
  CHECK(mid.C() < b.C());
}

TEST_CASE("cos on one period: A = pi, B = 0, C = 3 pi / 4") {
  const FunctionalBreakdown b = q_of_sampled(cos_period(2048), true);
  CHECK(b.A() == doctest::Approx(kPi).epsilon(1e-9));
  CHECK(std::abs(b.B()) <= 1e-9);
  CHECK(b.C() == doctest::Approx(0.75 * kPi).epsilon(1e-9));
  CHECK(std::abs(b.Q() - 4.0 / 3.0) <= 1e-6);
  CHECK(std::abs(q_of_sampled(cos_period(4096), true).Q() - 4.0 / 3.0) <= 1e-6);
}

TEST_CASE("cos quotient converges at fourth order on a periodic grid") {
  double prev = 0.0;
  for (std::size_t n : {65u, 129u, 257u, 513u}) {
    const double err = std::abs(q_of_sampled(cos_period(n), true).Q() - 4.0 / 3.0);
    if (prev > 0.0) CHECK(std::log2(prev / err) > 3.7);
    prev = err;
  }
}

TEST_CASE("cos quotient on an open grid converges to 4/3") {
  CHECK(std::abs(q_of_sampled(cos_period(129), false).Q() - 4.0 / 3.0) <= 1e-6);
  CHECK(std::abs(q_of_sampled(cos_period(1025), false).Q() - 4.0 / 3.0) <= 1e-9);
}

TEST_CASE("exact second derivative is used when supplied") {
  SampledFunction f = cos_period(257);
  std::vector<double> d2;
  for (double v : f.values) d2.push_back(-v);
  f.d2 = d2;
  CHECK(std::abs(q_of_sampled(f, true).Q() - 4.0 / 3.0) <= 1e-7);
}

TEST_CASE("constant function has Q = 0") {
  const SampledFunction f = sample([](double) { return 2.5; }, 0.0, 3.0, 101);
  const FunctionalBreakdown b = q_of_sampled(f, true);
  // stencil weights cancel only to roundoff, amplified by 1/h^2
  CHECK(std::abs(b.A()) <= 1e-20);
  CHECK(std::abs(b.B()) <= 1e-10);
  CHECK(std::abs(b.Q()) <= 1e-10);
}

TEST_CASE("sampled input validation") {
  Errc code{};
  const SampledFunction short_grid = sample([](double x) { return x; }, 0.0, 1.0, 4);
  CHECK_THROWS_AS(errc_probe(short_grid, false, code), Error);
  CHECK(code == Errc::grid_too_short);

  const SampledFunction zero = sample([](double) { return 0.0; }, 0.0, 1.0, 9);
  CHECK_THROWS_AS(errc_probe(zero, false, code), Error);
  CHECK(code == Errc::undefined_quotient);

  SampledFunction bad = cos_period(9);
  bad.grid[4] = bad.grid[3];
  CHECK_THROWS_AS(q_of_sampled(bad, true), std::invalid_argument);
  SampledFunction mismatch = cos_period(9);
  mismatch.values.pop_back();
  CHECK_THROWS_AS(q_of_sampled(mismatch, true), std::invalid_argument);
}

TEST_CASE("scaling invariance of Q on cos") {
  const SampledFunction f = cos_period(4096);
  const double q = q_of_sampled(f, true).Q();
  for (double sigma : {0.5, 2.0, 3.0}) {
    const SampledFunction g = rescale(f, sigma);
    CHECK(std::abs(q_of_sampled(g, true).Q() - q) <= 1e-6);
    const double len_f = f.grid.back() - f.grid.front();
    const double len_g = g.grid.back() - g.grid.front();
    CHECK(len_g == doctest::Approx(len_f / sigma).epsilon(1e-14));
    CHECK(g.values.front() == doctest::Approx(sigma * sigma * f.values.front()));
  }
  const SampledFunction same = rescale(f, 1.0);
  CHECK(same.grid == f.grid);
  CHECK(same.values == f.values);
  CHECK_THROWS_AS(rescale(f, 0.0), std::invalid_argument);
}

TEST_CASE("rescale maps the half period of a shot") {
  const double lambda = 0.1580;
  const ShotResult shot = j_tilde(lambda, {});
  REQUIRE(shot.found());
  const SampledFunction f = minimizer_profile(shot, 801).sampled();
  const SampledFunction g = rescale(f, 2.0);
  CHECK(g.grid.back() == doctest::Approx(*shot.T / 2.0));
  CHECK(q_of_sampled(g, true).Q() == doctest::Approx(q_of_sampled(f, true).Q()).epsilon(1e-10));
}

TEST_CASE("Nehari exponent") {
  CHECK(nehari_optimal_mu(FunctionalBreakdown(1.0, 2.0, 1.0, 0.0, 1.0)) == doctest::Approx(1.0));
  CHECK(nehari_optimal_mu(FunctionalBreakdown(1.0, 4.0, 1.0, 0.0, 1.0)) ==
        doctest::Approx(std::pow(2.0, 4.0 / 7.0)).epsilon(1e-14));
  CHECK(nehari_optimal_mu(FunctionalBreakdown(1.0, 4.0, 1.0, 0.0, 1.0)) ==
        doctest::Approx(1.48599).epsilon(1e-5));
  CHECK_THROWS_AS(nehari_optimal_mu(FunctionalBreakdown(1.0, 0.0, 1.0, 0.0, 1.0)), Error);
  CHECK_THROWS_AS(nehari_optimal_mu(FunctionalBreakdown(1.0, -1.0, 1.0, 0.0, 1.0)), Error);
  CHECK_THROWS_AS(nehari_optimal_mu(FunctionalBreakdown(0.0, 1.0, 1.0, 0.0, 1.0)), Error);
}

TEST_CASE("Nehari rescale reaches its fixed point") {
  // -(cos x + cos 2x / 2) has int u'' u^2 > 0
  const SampledFunction f =
      sample([](double x) { return -(std::cos(x) + 0.5 * std::cos(2.0 * x)); }, 0.0, 2.0 * kPi, 2049);
  const FunctionalBreakdown b = q_of_sampled(f, true);
  REQUIRE(b.B() > 0.0);
  const double mu = nehari_optimal_mu(b);
  const SampledFunction g = nehari_rescale(f, mu);
  const FunctionalBreakdown bg = q_of_sampled(g, true);
  CHECK(nehari_optimal_mu(bg) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(bg.C() == doctest::Approx(b.C()).epsilon(1e-9));
  CHECK(bg.B() == doctest::Approx(2.0 * bg.A()).epsilon(1e-6));
}

TEST_CASE("integration by parts residual") {
  CHECK(parts_identity_residual(cos_period(2048), true) <= 1e-6);
  CHECK(parts_identity_residual(sample([](double) { return 0.0; }, 0.0, 1.0, 33), false) == 0.0);
  // boundary term u' u^2 from 0 to pi/2 equals -1
  const SampledFunction s =
      sample([](double x) { return 1.0 + std::sin(x); }, 0.0, 0.5 * kPi, 1001);
  CHECK(parts_identity_residual(s, false) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("square completion bound on random trigonometric polynomials") {
  std::mt19937_64 rng(20261014);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    double c[5], s[5];
    for (int k = 0; k < 5; ++k) {
      c[k] = coef(rng);
      s[k] = coef(rng);
    }
    const SampledFunction f = sample(
        [&](double x) {
          double v = c[0];
          for (int k = 1; k < 5; ++k) v += c[k] * std::cos(k * x) + s[k] * std::sin(k * x);
          return v;
        },
        0.0, 2.0 * kPi, 1025);
    const FunctionalBreakdown b = q_of_sampled(f, true);
    const double eps = 1e-9 * (b.A() + std::abs(b.B()) + b.C());
    CHECK(b.A() - b.B() + 0.25 * b.C() >= -eps);
    CHECK(b.Q() >= -0.25 - 1e-6);
  }
}

TEST_CASE("simpson and stencils") {
  using numerics::differentiate;
  using numerics::simpson;
  // non-uniform grid with an odd number of intervals
  std::vector<double> x{0.0, 0.1, 0.25, 0.3, 0.55, 0.7, 1.0, 1.2};
  std::vector<double> y;
  for (double v : x) y.push_back(v * v);
  CHECK(simpson(x, y) == doctest::Approx(1.2 * 1.2 * 1.2 / 3.0).epsilon(1e-13));
  std::vector<double> q;
  for (double v : x) q.push_back(v * v * v * v);
  const auto d1 = differentiate(x, q, 1, false);
  const auto d2 = differentiate(x, q, 2, false);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(d1[i] == doctest::Approx(4.0 * x[i] * x[i] * x[i]).epsilon(1e-10).scale(1.0));
    CHECK(d2[i] == doctest::Approx(12.0 * x[i] * x[i]).epsilon(1e-9).scale(1.0));
  }
}
