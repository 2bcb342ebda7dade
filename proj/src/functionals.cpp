#include "oscimin/functionals.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "oscimin/errors.hpp"

namespace oscimin {

FunctionalBreakdown::FunctionalBreakdown(double A, double B, double C, double x_lo, double x_hi)
    : A_(A), B_(B), C_(C), Q_(0.0), x_lo_(x_lo), x_hi_(x_hi) {
  if (!(C > 0.0)) throw Error(Errc::undefined_quotient, "undefined quotient: int u^4 = 0");
  Q_ = (A - B) / C;
}

void SampledFunction::validate() const {
  if (grid.size() != values.size())
    throw std::invalid_argument("grid and values differ in length");
  if (d2 && d2->size() != grid.size())
    throw std::invalid_argument("grid and u'' samples differ in length");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("grid is not strictly increasing at index " + std::to_string(i));
}

FunctionalBreakdown breakdown_from_trajectory(const Trajectory& traj, double x_hi) {
  const AugmentedState s = traj.at(x_hi);
  return FunctionalBreakdown(s.acc_A, s.acc_B, s.acc_C, traj.x_begin(), x_hi);
}

namespace numerics {

namespace {

// Fornberg's recursion for finite-difference weights of derivatives 0..2 at
// x0 from the nodes z.
std::array<std::array<double, 5>, 3> fornberg5(double x0, const std::array<double, 5>& z) {
  constexpr int n = 5, m = 2;
  std::array<std::array<double, 5>, 3> c{};
  double c1 = 1.0;
  double c4 = z[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = z[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = z[i] - z[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

}  // namespace

double simpson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 3) throw Error(Errc::grid_too_short, "grid too short for Simpson quadrature");
  const std::size_t intervals = n - 1;
  const std::size_t paired = intervals % 2 == 0 ? intervals : intervals - 1;

  double sum = 0.0;
  for (std::size_t i = 0; i + 2 <= paired; i += 2) {
    const double h0 = x[i + 1] - x[i];
    const double h1 = x[i + 2] - x[i + 1];
    const double hs = h0 + h1;
    sum += hs / 6.0 *
           ((2.0 - h1 / h0) * y[i] + hs * hs / (h0 * h1) * y[i + 1] + (2.0 - h0 / h1) * y[i + 2]);
  }
  if (paired != intervals) {
    // last interval from the quadratic through the final three nodes
    const double h = x[n - 1] - x[n - 2];
    const double hp = x[n - 2] - x[n - 3];
    const double alpha = (2.0 * h * h + 3.0 * h * hp) / (6.0 * (hp + h));
    const double beta = (h * h + 3.0 * h * hp) / (6.0 * hp);
    const double eta = h * h * h / (6.0 * hp * (hp + h));
    sum += alpha * y[n - 1] + beta * y[n - 2] - eta * y[n - 3];
  }
  return sum;
}

std::vector<double> differentiate(const std::vector<double>& x, const std::vector<double>& y,
                                  int order, bool periodic) {
  if (order < 1 || order > 2) throw std::invalid_argument("derivative order must be 1 or 2");
  const std::size_t n = x.size();
  if (n < 5) throw Error(Errc::grid_too_short, "grid too short: need at least 5 points");
  std::vector<double> out(n);
  std::array<double, 5> z{};
  std::array<double, 5> v{};

  if (periodic) {
    // unique nodes 0..n-2; node n-1 repeats node 0 one period later
    const std::size_t m = n - 1;
    const double period = x[n - 1] - x[0];
    for (std::size_t i = 0; i < m; ++i) {
      for (int k = -2; k <= 2; ++k) {
        const long long j = static_cast<long long>(i) + k;
        const long long wraps = j < 0 ? -((-j + static_cast<long long>(m) - 1) / static_cast<long long>(m))
                                      : j / static_cast<long long>(m);
        const auto idx = static_cast<std::size_t>(j - wraps * static_cast<long long>(m));
        z[k + 2] = x[idx] + static_cast<double>(wraps) * period;
        v[k + 2] = y[idx];
      }
      const auto w = fornberg5(x[i], z);
      double d = 0.0;
      for (int k = 0; k < 5; ++k) d += w[order][k] * v[k];
      out[i] = d;
    }
    out[n - 1] = out[0];
    return out;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t s = std::min(i >= 2 ? i - 2 : 0, n - 5);
    for (std::size_t k = 0; k < 5; ++k) {
      z[k] = x[s + k];
      v[k] = y[s + k];
    }
    const auto w = fornberg5(x[i], z);
    double d = 0.0;
    for (int k = 0; k < 5; ++k) d += w[order][k] * v[k];
    out[i] = d;
  }
  return out;
}

}  // namespace numerics

namespace {

void require_usable(const SampledFunction& f) {
  f.validate();
  if (f.grid.size() < 5) throw Error(Errc::grid_too_short, "grid too short: need at least 5 points");
}

std::vector<double> second_derivative(const SampledFunction& f, bool periodic) {
  if (f.d2) return *f.d2;
  return numerics::differentiate(f.grid, f.values, 2, periodic);
}

}  // namespace

FunctionalBreakdown q_of_sampled(const SampledFunction& f, bool periodic) {
  require_usable(f);
  const std::vector<double> d2 = second_derivative(f, periodic);
  const std::size_t n = f.grid.size();
  std::vector<double> ia(n), ib(n), ic(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = f.values[i];
    ia[i] = d2[i] * d2[i];
    ib[i] = d2[i] * u * u;
    ic[i] = u * u * u * u;
  }
  return FunctionalBreakdown(numerics::simpson(f.grid, ia), numerics::simpson(f.grid, ib),
                             numerics::simpson(f.grid, ic), f.grid.front(), f.grid.back());
}

SampledFunction rescale(const SampledFunction& f, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  SampledFunction g;
  g.grid.reserve(f.grid.size());
  g.values.reserve(f.values.size());
  for (double x : f.grid) g.grid.push_back(x / sigma);
  for (double u : f.values) g.values.push_back(sigma * sigma * u);
  if (f.d2) {
    std::vector<double> d2;
    d2.reserve(f.d2->size());
    const double s4 = sigma * sigma * sigma * sigma;
    for (double v : *f.d2) d2.push_back(s4 * v);
    g.d2 = std::move(d2);
  }
  return g;
}

SampledFunction nehari_rescale(const SampledFunction& f, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  SampledFunction g;
  const double amp = std::pow(mu, 0.25);
  for (double x : f.grid) g.grid.push_back(x / mu);
  for (double u : f.values) g.values.push_back(amp * u);
  if (f.d2) {
    std::vector<double> d2;
    for (double v : *f.d2) d2.push_back(amp * mu * mu * v);
    g.d2 = std::move(d2);
  }
  return g;
}

double nehari_optimal_mu(const FunctionalBreakdown& b) {
  if (!(b.A() > 0.0) || !(b.B() > 0.0))
    throw Error(Errc::nehari_undefined,
                "Nehari normalization undefined: need int u''^2 > 0 and int u'' u^2 > 0");
  return std::pow(b.B() / (2.0 * b.A()), 4.0 / 7.0);
}

double parts_identity_residual(const SampledFunction& f, bool periodic) {
  require_usable(f);
  const std::vector<double> d2 = second_derivative(f, periodic);
  const std::vector<double> d1 = numerics::differentiate(f.grid, f.values, 1, periodic);
  const std::size_t n = f.grid.size();
  std::vector<double> lhs(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = f.values[i];
    lhs[i] = d2[i] * u * u;
    rhs[i] = u * d1[i] * d1[i];
  }
  return std::abs(numerics::simpson(f.grid, lhs) + 2.0 * numerics::simpson(f.grid, rhs));
}

}  // namespace oscimin
