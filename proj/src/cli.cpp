#include "oscimin/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include <fmt/format.h>

#include "json.hpp"
#include "oscimin/errors.hpp"

namespace oscimin::cli {

using nlohmann::json;

void RunConfig::validate() const {
  integrator.validate();
  if (!(root_tol > 0.0)) throw std::invalid_argument("root_tol must be positive");
  if (!(bracket.lo < bracket.hi)) throw std::invalid_argument("bracket: need LO < HI");
  if (!(sweep_step > 0.0)) throw std::invalid_argument("sweep step must be positive");
  if (!(sweep_from > 0.0 && sweep_to < 0.25 && sweep_from <= sweep_to))
    throw std::invalid_argument("sweep range must satisfy 0 < from <= to < 1/4");
  if (samples < 5) throw std::invalid_argument("samples must be at least 5");
  if (threads == 0) throw std::invalid_argument("threads must be positive");
  if (inject_I && !(*inject_I < 0.0)) throw std::invalid_argument("injected I must be negative");
}

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

unsigned threads_from_env() {
  const char* s = std::getenv("OSCIMIN_THREADS");
  if (s == nullptr) return 1;
  const std::string_view sv(s);
  unsigned n = 0;
  const auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), n);
  if (ec != std::errc() || p != sv.data() + sv.size() || n == 0) return 1;
  return n;
}

namespace {

constexpr double kIdentityTol = 1e-6;
constexpr double kNegativeControlFloor = 1e-2;
constexpr double kMethodGapTol = 1e-4;
constexpr double kASquaredTol = 1e-4;
constexpr double kFirstIntegralTol = 1e-8;
constexpr double kQuadratureTol = 1e-6;
constexpr double kBarUOdeMargin = 1e-3;
constexpr double kQuotientFloor = -0.25 - 1e-6;
constexpr std::size_t kCosSamples = 4096;
constexpr double kNegativeControlLambda = 0.2;

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json report_json(const OracleReport& r) {
  json j{{"name", r.name},
         {"relation", to_string(r.relation)},
         {"expected", r.expected},
         {"observed", r.observed},
         {"passed", r.passed}};
  if (r.relation == Relation::inside) j["upper"] = r.upper;
  if (r.relation == Relation::within) j["tolerance"] = r.tolerance;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

constexpr std::string_view kTableHeader = "kind,name,value,relation,expected,upper,tolerance,passed";

void write_result_row(std::ostream& out, std::string_view name, double v) {
  out << "result," << name << ',' << format_number(v) << ",,,,,\n";
}

void write_report_rows(std::ostream& out, const std::vector<OracleReport>& reports) {
  for (const auto& r : reports) {
    out << "oracle," << r.name << ',' << format_number(r.observed) << ',' << to_string(r.relation)
        << ',' << format_number(r.expected) << ','
        << (r.relation == Relation::inside ? format_number(r.upper) : "") << ','
        << (r.relation == Relation::within ? format_number(r.tolerance) : "") << ','
        << (r.passed ? "true" : "false") << '\n';
  }
}

bool all_passed(const std::vector<OracleReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const OracleReport& r) { return r.passed; });
}

void list_failures(const std::vector<OracleReport>& reports, std::ostream& err) {
  for (const auto& r : reports) {
    if (r.passed) continue;
    err << "check failed: " << r.name << " (observed " << format_number(r.observed) << ", "
        << to_string(r.relation) << ' ' << format_number(r.expected);
    if (r.relation == Relation::inside) err << " .. " << format_number(r.upper);
    if (r.relation == Relation::within) err << " +- " << format_number(r.tolerance);
    err << ")\n";
  }
}

InfimumResult solve(const RunConfig& cfg) {
  return find_infimum(cfg.integrator, cfg.bracket, cfg.root_tol);
}

// cos on one closed period [0, 2 pi]
SampledFunction cos_samples(std::size_t n) {
  SampledFunction f;
  f.grid.resize(n);
  f.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1);
    f.grid[i] = x;
    f.values[i] = std::cos(x);
  }
  return f;
}

std::string tagged(std::string_view base, std::string_view key, double v) {
  return fmt::format("{}[{}={}]", base, key, v);
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "error: invalid argument: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

}  // namespace

std::vector<OracleReport> infimum_reports(const InfimumResult& res, const RunConfig& cfg) {
  std::vector<OracleReport> out;
  const double I = cfg.inject_I.value_or(res.I);
  const FunctionalBreakdown& fb = *res.shot.breakdown;

  out.push_back(bounds_check(I));
  {
    OracleReport r = period_bound_check(I, l4_normalized_period(*res.shot.T, fb.C()));
    r.note = "T scaled to int_0^T u^4 = 1";
    out.push_back(std::move(r));
  }

  const IdentityResiduals id =
      infimum_identities(res.shot, cfg.inject_I ? std::optional<double>(-*cfg.inject_I) : std::nullopt);
  out.push_back(report_within("identity_1", 0.0, id.rel1(), kIdentityTol));
  out.push_back(report_within("identity_2", 0.0, id.rel2(), kIdentityTol));
  out.push_back(report_within("identity_3", 0.0, id.rel3(), kIdentityTol));

  const double a1 = res.method_one.a_star;
  out.push_back(report_within("a_squared_matches_I", 0.0, a1 * a1 - std::abs(I), kASquaredTol));
  out.push_back(report_within("method_agreement", 0.0, res.method_gap, kMethodGapTol));
  out.push_back(report_at_most("root_bracket_width", cfg.root_tol, res.lambda_hi - res.lambda_lo));
  out.push_back(report_at_least("quotient_floor", kQuotientFloor, fb.Q()));

  const MinimizerProfile prof = minimizer_profile(res.shot, cfg.samples);
  double worst = 0.0;
  for (double h : prof.first_integral) worst = std::max(worst, std::abs(h));
  out.push_back(report_at_most("first_integral", kFirstIntegralTol, worst));
  return out;
}

std::vector<OracleReport> verification_suite(const RunConfig& cfg) {
  std::vector<OracleReport> out;

  for (double y0 : {-0.5, -1.0, -2.0}) {
    const BarU bar = bar_u_construction(y0, cfg.integrator);
    out.push_back(report_within(tagged("bar_u_q", "y0", y0), -9.0 / 64.0,
                                q_of_sampled(bar.samples, false).Q(), kQuadratureTol));
    out.push_back(report_within(tagged("bar_u_q_integrated", "y0", y0), -9.0 / 64.0,
                                bar.integrated.Q(), kQuadratureTol));
    if (y0 == -1.0)
      out.push_back(report_at_most(tagged("bar_u_ode", "y0", y0), kIdentityTol,
                                   bar_u_ode_residual(bar, kBarUOdeMargin)));
  }

  const SampledFunction cosf = cos_samples(kCosSamples);
  const double q_cos = q_of_sampled(cosf, true).Q();
  out.push_back(report_within("cos_q", 4.0 / 3.0, q_cos, kQuadratureTol));
  for (double sigma : {0.5, 2.0, 3.0}) {
    const double q_s = q_of_sampled(rescale(cosf, sigma), true).Q();
    out.push_back(report_within(tagged("scaling_invariance", "sigma", sigma), 0.0, q_s - q_cos,
                                kQuadratureTol));
  }
  out.push_back(report_at_most("parts_identity_cos", kQuadratureTol,
                               parts_identity_residual(cosf, true)));

  const InfimumResult res = solve(cfg);
  const std::vector<OracleReport> at_root = infimum_reports(res, cfg);
  out.insert(out.end(), at_root.begin(), at_root.end());

  const ShotResult control = j_tilde(kNegativeControlLambda, cfg.integrator);
  if (!control.found())
    throw Error(Errc::shot_failed, "negative control shot has no critical point");
  out.push_back(report_exceeds(tagged("identity_2_negative_control", "lambda", kNegativeControlLambda),
                               kNegativeControlFloor, std::abs(infimum_identities(control).rel2())));
  return out;
}

SampledFunction read_samples_csv(std::istream& in) {
  SampledFunction f;
  std::string line;
  std::size_t line_no = 0;
  bool seen_data_line = false;
  auto fail = [&](const std::string& what) {
    throw Error(Errc::parse_error, fmt::format("parse error at line {}: {}", line_no, what));
  };
  auto parse = [](std::string_view s, double& v) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.empty()) return false;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && p == s.data() + s.size();
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv(line);
    if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
    if (sv.empty() || sv.front() == '#') continue;
    const auto c1 = sv.find(',');
    if (c1 == std::string_view::npos) fail("expected at least two comma-separated columns");
    const auto c2 = sv.find(',', c1 + 1);
    const std::string_view sx = sv.substr(0, c1);
    const std::string_view su = sv.substr(c1 + 1, c2 == std::string_view::npos ? sv.npos : c2 - c1 - 1);
    double x = 0.0, u = 0.0;
    const bool ok = parse(sx, x) && parse(su, u);
    if (!ok) {
      if (!seen_data_line && f.grid.empty()) {
        seen_data_line = true;  // header row
        continue;
      }
      fail("non-numeric value");
    }
    seen_data_line = true;
    if (!std::isfinite(x) || !std::isfinite(u)) fail("non-finite value");
    if (!f.grid.empty() && !(x > f.grid.back()))
      fail(fmt::format("x = {} is not strictly increasing", format_number(x)));
    f.grid.push_back(x);
    f.values.push_back(u);
  }
  if (f.grid.size() < 5)
    throw Error(Errc::grid_too_short, fmt::format("need at least 5 rows, got {}", f.grid.size()));
  return f;
}

int cmd_find_infimum(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    const InfimumResult res = solve(cfg);
    const std::vector<OracleReport> reports = infimum_reports(res, cfg);
    const FunctionalBreakdown& fb = *res.shot.breakdown;
    if (cfg.format == OutputFormat::json) {
      json j{{"I", res.I},
             {"T", *res.shot.T},
             {"a", res.shot.a},
             {"A", fb.A()},
             {"B", fb.B()},
             {"C", fb.C()},
             {"Q", fb.Q()},
             {"lambda_root", res.lambda_root},
             {"iterations", res.iterations},
             {"converged", res.converged},
             {"a_star_method1", res.method_one.a_star},
             {"method_gap", res.method_gap},
             {"oracles", json::array()}};
      for (const auto& r : reports) j["oracles"].push_back(report_json(r));
      out << j.dump(2) << '\n';
    } else {
      out << "# integrals over the half period (0, T)\n" << kTableHeader << '\n';
      write_result_row(out, "I", res.I);
      write_result_row(out, "T", *res.shot.T);
      write_result_row(out, "a", res.shot.a);
      write_result_row(out, "A", fb.A());
      write_result_row(out, "B", fb.B());
      write_result_row(out, "C", fb.C());
      write_result_row(out, "Q", fb.Q());
      write_result_row(out, "lambda_root", res.lambda_root);
      write_result_row(out, "iterations", res.iterations);
      write_result_row(out, "a_star_method1", res.method_one.a_star);
      write_result_row(out, "method_gap", res.method_gap);
      write_report_rows(out, reports);
    }
    if (!res.converged) err << "warning: root bracket did not reach root_tol\n";
    list_failures(reports, err);
    return all_passed(reports) ? kExitOk : kExitCheckFailed;
  });
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    const std::vector<SweepRow> rows =
        sweep_lambda(cfg.integrator, cfg.sweep_from, cfg.sweep_to, cfg.sweep_step, cfg.threads);
    if (cfg.format == OutputFormat::json) {
      json j{{"from", cfg.sweep_from}, {"to", cfg.sweep_to}, {"step", cfg.sweep_step},
             {"rows", json::array()}};
      for (const auto& r : rows) {
        j["rows"].push_back({{"lambda", r.lambda},
                             {"a_star", opt_json(r.a_star)},
                             {"T1", opt_json(r.T1)},
                             {"J", opt_json(r.J)},
                             {"T2", opt_json(r.T2)},
                             {"J_tilde", opt_json(r.J_tilde)},
                             {"g", opt_json(r.g)},
                             {"status", r.status}});
      }
      out << j.dump(2) << '\n';
    } else {
      out << "# sweep from " << format_number(cfg.sweep_from) << " to " << format_number(cfg.sweep_to)
          << " step " << format_number(cfg.sweep_step) << '\n'
          << "lambda,a_star,T1,J,T2,J_tilde,g,status\n";
      for (const auto& r : rows) {
        out << format_number(r.lambda) << ',' << opt_number(r.a_star) << ',' << opt_number(r.T1) << ','
            << opt_number(r.J) << ',' << opt_number(r.T2) << ',' << opt_number(r.J_tilde) << ','
            << opt_number(r.g) << ',' << r.status << '\n';
      }
    }
    return kExitOk;
  });
}

int cmd_profile(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    const InfimumResult res = solve(cfg);
    const MinimizerProfile prof = minimizer_profile(res.shot, cfg.samples);
    if (cfg.format == OutputFormat::json) {
      json j{{"I", res.I}, {"T", *res.shot.T}, {"a", res.shot.a}, {"samples", json::array()}};
      for (std::size_t i = 0; i < prof.samples.size(); ++i) {
        const PhaseState& s = prof.samples[i];
        j["samples"].push_back({{"x", s.x},
                                {"u", s.u},
                                {"du", s.du},
                                {"d2u", s.d2u},
                                {"d3u", s.d3u},
                                {"H_residual", prof.first_integral[i]}});
      }
      out << j.dump(2) << '\n';
    } else {
      out << "# I = " << format_number(res.I) << '\n'
          << "# T = " << format_number(*res.shot.T) << '\n'
          << "# a = " << format_number(res.shot.a) << '\n'
          << "x,u,du,d2u,d3u,H_residual\n";
      for (std::size_t i = 0; i < prof.samples.size(); ++i) {
        const PhaseState& s = prof.samples[i];
        out << format_number(s.x) << ',' << format_number(s.u) << ',' << format_number(s.du) << ','
            << format_number(s.d2u) << ',' << format_number(s.d3u) << ','
            << format_number(prof.first_integral[i]) << '\n';
      }
    }
    return kExitOk;
  });
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    const std::vector<OracleReport> reports = verification_suite(cfg);
    const bool ok = all_passed(reports);
    if (cfg.format == OutputFormat::json) {
      json j{{"passed", ok}, {"oracles", json::array()}};
      if (cfg.inject_I) j["injected_I"] = *cfg.inject_I;
      for (const auto& r : reports) j["oracles"].push_back(report_json(r));
      out << j.dump(2) << '\n';
    } else {
      if (cfg.inject_I) out << "# injected I = " << format_number(*cfg.inject_I) << '\n';
      out << kTableHeader << '\n';
      write_report_rows(out, reports);
    }
    list_failures(reports, err);
    return ok ? kExitOk : kExitCheckFailed;
  });
}

int cmd_q(const std::string& path, bool periodic, const RunConfig& cfg, std::ostream& out,
          std::ostream& err) {
  return guarded(err, [&] {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    const SampledFunction f = read_samples_csv(in);
    const FunctionalBreakdown fb = q_of_sampled(f, periodic);
    const double parts = parts_identity_residual(f, periodic);
    const OracleReport floor = report_at_least("quotient_floor", kQuotientFloor, fb.Q());
    if (cfg.format == OutputFormat::json) {
      json j{{"A", fb.A()},
             {"B", fb.B()},
             {"C", fb.C()},
             {"Q", fb.Q()},
             {"parts_identity_residual", parts},
             {"periodic", periodic},
             {"samples", f.grid.size()},
             {"oracles", json::array({report_json(floor)})}};
      out << j.dump(2) << '\n';
    } else {
      out << "# " << f.grid.size() << " samples, " << (periodic ? "periodic" : "open") << " grid\n"
          << "A,B,C,Q,parts_identity_residual\n"
          << format_number(fb.A()) << ',' << format_number(fb.B()) << ',' << format_number(fb.C())
          << ',' << format_number(fb.Q()) << ',' << format_number(parts) << '\n';
    }
    list_failures({floor}, err);
    return floor.passed ? kExitOk : kExitCheckFailed;
  });
}

}  // namespace oscimin::cli
