#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "oscimin/cli.hpp"
#include "oscimin/errors.hpp"

using namespace oscimin;
using namespace oscimin::cli;
using nlohmann::json;

namespace {

struct Run {
  int status;
  std::string out, err;
};

template <class Fn>
Run run(Fn&& fn) {
  std::ostringstream out, err;
  const int st = fn(out, err);
  return {st, out.str(), err.str()};
}

Run find(const RunConfig& cfg) {
  return run([&](std::ostream& o, std::ostream& e) { return cmd_find_infimum(cfg, o, e); });
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line.front() != '#') lines.push_back(line);
  return lines;
}

std::vector<double> split_numbers(const std::string& line) {
  std::vector<double> v;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) v.push_back(cell.empty() ? std::nan("") : std::stod(cell));
  return v;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto p = std::filesystem::temp_directory_path() / ("oscimin_test_" + name);
  std::ofstream(p) << content;
  return p;
}

RunConfig json_cfg() {
  RunConfig cfg;
  cfg.format = OutputFormat::json;
  return cfg;
}

}  // namespace

TEST_CASE("number format round-trips doubles") {
  for (double v : {0.1, -0.15804972420117377, 1e-300, 3.0, std::numbers::pi}) {
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(0.5) == "0.5");
}

TEST_CASE("run config validation") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.bracket = {0.2, 0.1};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.sweep_step = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.root_tol = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.sweep_to = 0.3;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.integrator.abs_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("thread count from the environment") {
  ::setenv("OSCIMIN_THREADS", "3", 1);
  CHECK(threads_from_env() == 3);
  ::setenv("OSCIMIN_THREADS", "zero", 1);
  CHECK(threads_from_env() == 1);
  ::setenv("OSCIMIN_THREADS", "0", 1);
  CHECK(threads_from_env() == 1);
  ::unsetenv("OSCIMIN_THREADS");
  CHECK(threads_from_env() == 1);
}

TEST_CASE("find-infimum reports I and passes its oracles") {
  const Run r = find(json_cfg());
  CHECK(r.status == kExitOk);
  const json j = json::parse(r.out);
  for (const char* key : {"I", "T", "a", "A", "B", "C"}) CHECK(j.contains(key));
  CHECK(std::abs(j["I"].get<double>() + 0.1580) <= 5e-4);
  CHECK(std::abs(j["T"].get<double>() - 3.43963) <= 1e-3);
  REQUIRE(j["oracles"].is_array());
  CHECK(j["oracles"].size() >= 5);
  for (const auto& o : j["oracles"]) {
    CAPTURE(o.dump());
    CHECK(o["passed"].get<bool>());
    CHECK_FALSE(o.contains("oracles"));
  }
}

TEST_CASE("find-infimum CSV is a single table") {
  const Run r = find({});
  CHECK(r.status == kExitOk);
  const auto lines = data_lines(r.out);
  REQUIRE(lines.size() > 3);
  CHECK(lines[0] == "kind,name,value,relation,expected,upper,tolerance,passed");
  bool saw_I = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    CHECK(std::count(lines[i].begin(), lines[i].end(), ',') == 7);
    if (lines[i].rfind("result,I,", 0) == 0) {
      saw_I = true;
      CHECK(std::abs(std::stod(lines[i].substr(9)) + 0.1580) <= 5e-4);
    }
    if (lines[i].rfind("oracle,", 0) == 0) CHECK(lines[i].substr(lines[i].size() - 4) == "true");
  }
  CHECK(saw_I);
  CHECK(find({}).out == r.out);
}

TEST_CASE("find-infimum with a bracket that has no sign change") {
  RunConfig cfg;
  cfg.bracket = {0.20, 0.24};
  const Run r = find(cfg);
  CHECK(r.status != kExitOk);
  CHECK(r.err.find("bracket invalid") != std::string::npos);
  CHECK(r.out.empty());
}

TEST_CASE("find-infimum refinement in root_tol") {
  RunConfig coarse = json_cfg(), fine = json_cfg();
  coarse.root_tol = 1e-3;
  fine.root_tol = 1e-6;
  const double ic = json::parse(find(coarse).out)["I"].get<double>();
  const double i_f = json::parse(find(fine).out)["I"].get<double>();
  CHECK(std::abs(ic - i_f) <= 2e-3);
}

TEST_CASE("sweep table") {
  RunConfig cfg;
  const Run r = run([&](std::ostream& o, std::ostream& e) { return cmd_sweep(cfg, o, e); });
  CHECK(r.status == kExitOk);
  const auto lines = data_lines(r.out);
  REQUIRE(lines.size() == 55);
  CHECK(lines[0] == "lambda,a_star,T1,J,T2,J_tilde,g,status");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto v = split_numbers(lines[i].substr(0, lines[i].rfind(',')));
    REQUIRE(v.size() == 7);
    const double lambda = v[0], J = v[3], Jt = v[5], g = v[6];
    CHECK(J >= -0.25);
    CHECK(J <= Jt + 1e-6);
    if (std::abs(lambda - 0.158) < 1e-9) CHECK(std::abs(g) <= 1e-3);
    CHECK(lines[i].substr(lines[i].rfind(',') + 1) == "ok");
  }

  RunConfig threaded = cfg;
  threaded.threads = 3;
  const Run t = run([&](std::ostream& o, std::ostream& e) { return cmd_sweep(threaded, o, e); });
  CHECK(t.out == r.out);
}

TEST_CASE("sweep rows with a failed method carry a status") {
  RunConfig cfg;
  cfg.sweep_from = 0.10;
  cfg.sweep_to = 0.12;
  cfg.sweep_step = 0.01;
  const Run r = run([&](std::ostream& o, std::ostream& e) { return cmd_sweep(cfg, o, e); });
  CHECK(r.status == kExitOk);
  const auto lines = data_lines(r.out);
  REQUIRE(lines.size() == 4);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    CHECK(lines[i].find(",,,,") != std::string::npos);
    CHECK(lines[i].find("method1") != std::string::npos);
  }
  cfg.format = OutputFormat::json;
  const Run j = run([&](std::ostream& o, std::ostream& e) { return cmd_sweep(cfg, o, e); });
  const json parsed = json::parse(j.out);
  CHECK(parsed["rows"].size() == 3);
  CHECK(parsed["rows"][0]["J"].is_null());
  CHECK(parsed["rows"][0]["J_tilde"].is_number());
}

TEST_CASE("profile and its round trip through q") {
  RunConfig cfg;
  const Run r = run([&](std::ostream& o, std::ostream& e) { return cmd_profile(cfg, o, e); });
  REQUIRE(r.status == kExitOk);
  CHECK(r.out.rfind("# I = ", 0) == 0);
  CHECK(r.out.find("# T = ") != std::string::npos);
  CHECK(r.out.find("# a = ") != std::string::npos);
  const auto lines = data_lines(r.out);
  REQUIRE(lines.size() == 2002);
  CHECK(lines[0] == "x,u,du,d2u,d3u,H_residual");

  double min_u = 1.0, worst_h = 0.0;
  bool saw_origin = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto v = split_numbers(lines[i]);
    REQUIRE(v.size() == 6);
    min_u = std::min(min_u, v[1]);
    worst_h = std::max(worst_h, std::abs(v[5]));
    if (v[0] == 0.0) {
      saw_origin = true;
      CHECK(v[1] == 1.0);
      CHECK(v[2] == 0.0);
      CHECK(v[4] == 0.0);
    }
  }
  CHECK(saw_origin);
  CHECK(min_u < 0.0);
  CHECK(worst_h <= 1e-8);

  const Run again = run([&](std::ostream& o, std::ostream& e) { return cmd_profile(cfg, o, e); });
  CHECK(again.out == r.out);

  const auto path = temp_file("profile.csv", r.out);
  RunConfig qcfg = json_cfg();
  const Run q = run([&](std::ostream& o, std::ostream& e) { return cmd_q(path.string(), true, qcfg, o, e); });
  CHECK(q.status == kExitOk);
  const json j = json::parse(q.out);
  const double I = json::parse(find(json_cfg()).out)["I"].get<double>();
  CHECK(std::abs(j["Q"].get<double>() - I) <= 1e-3);
  std::filesystem::remove(path);
}

TEST_CASE("q on cos samples") {
  std::ostringstream csv;
  csv << "# cos on [0, 2 pi]\nx,u\n";
  const std::size_t n = 2048;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1);
    csv << format_number(x) << ',' << format_number(std::cos(x)) << '\n';
  }
  const auto path = temp_file("cos.csv", csv.str());
  RunConfig cfg = json_cfg();
  const Run r = run([&](std::ostream& o, std::ostream& e) { return cmd_q(path.string(), true, cfg, o, e); });
  CHECK(r.status == kExitOk);
  const json j = json::parse(r.out);
  CHECK(std::abs(j["Q"].get<double>() - 4.0 / 3.0) <= 1e-6);
  CHECK(j["parts_identity_residual"].get<double>() <= 1e-6);
  CHECK(j["periodic"].get<bool>());

  cfg.format = OutputFormat::csv;
  const Run c = run([&](std::ostream& o, std::ostream& e) { return cmd_q(path.string(), true, cfg, o, e); });
  const auto lines = data_lines(c.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "A,B,C,Q,parts_identity_residual");
  CHECK(std::abs(split_numbers(lines[1])[3] - 4.0 / 3.0) <= 1e-6);
  std::filesystem::remove(path);
}

TEST_CASE("q rejects malformed input") {
  RunConfig cfg;
  auto q = [&](const std::string& name, const std::string& content) {
    const auto path = temp_file(name, content);
    Run r = run([&](std::ostream& o, std::ostream& e) { return cmd_q(path.string(), false, cfg, o, e); });
    std::filesystem::remove(path);
    return r;
  };

  const Run order = q("order.csv", "x,u\n0,1\n1,2\n2,3\n2,4\n3,5\n4,6\n");
  CHECK(order.status != kExitOk);
  CHECK(order.err.find("line 5") != std::string::npos);
  CHECK(order.err.find("not strictly increasing") != std::string::npos);

  const Run junk = q("junk.csv", "0,1\n1,2\n2,abc\n3,4\n4,5\n");
  CHECK(junk.status != kExitOk);
  CHECK(junk.err.find("line 3") != std::string::npos);

  const Run one_col = q("onecol.csv", "0\n1\n2\n3\n4\n");
  CHECK(one_col.status != kExitOk);
  CHECK(one_col.err.find("line 1") != std::string::npos);

  const Run zero = q("zero.csv", "0,0\n1,0\n2,0\n3,0\n4,0\n5,0\n");
  CHECK(zero.status != kExitOk);
  CHECK(zero.err.find("undefined quotient") != std::string::npos);

  const Run few = q("few.csv", "0,1\n1,2\n");
  CHECK(few.status != kExitOk);

  const Run missing = run([&](std::ostream& o, std::ostream& e) {
    return cmd_q("/nonexistent/oscimin.csv", false, cfg, o, e);
  });
  CHECK(missing.status != kExitOk);
  CHECK(missing.err.find("cannot open") != std::string::npos);
}

TEST_CASE("reader keeps the first two columns and skips comments and header") {
  std::istringstream in("# comment\nx,u,extra\n0,1,9\n1,0,9\r\n2,-1,9\n# mid comment\n3,0,9\n4,1,9\n");
  const SampledFunction f = read_samples_csv(in);
  CHECK(f.grid == std::vector<double>{0, 1, 2, 3, 4});
  CHECK(f.values == std::vector<double>{1, 0, -1, 0, 1});
  std::istringstream twice("x,u\nx,u\n0,1\n");
  CHECK_THROWS_AS(read_samples_csv(twice), Error);
}

TEST_CASE("verify") {
  RunConfig cfg;
  const Run r = run([&](std::ostream& o, std::ostream& e) { return cmd_verify(cfg, o, e); });
  CHECK(r.status == kExitOk);
  CHECK(r.err.empty());
  for (const char* name : {"bar_u_q[y0=-0.5]", "bar_u_q[y0=-1]", "bar_u_q[y0=-2]", "interval_bounds",
                           "period_bound", "identity_1", "identity_2", "identity_3",
                           "identity_2_negative_control[lambda=0.2]", "scaling_invariance[sigma=3]", "cos_q"})
    CHECK(r.out.find(std::string("oracle,") + name + ",") != std::string::npos);

  cfg.format = OutputFormat::json;
  const json j = json::parse(
      run([&](std::ostream& o, std::ostream& e) { return cmd_verify(cfg, o, e); }).out);
  CHECK(j["passed"].get<bool>());
  for (const auto& o : j["oracles"])
    if (o["name"] == "cos_q") CHECK(std::abs(o["observed"].get<double>() - 4.0 / 3.0) <= 1e-6);
}

TEST_CASE("verify with an injected wrong I") {
  RunConfig cfg;
  cfg.format = OutputFormat::json;
  cfg.inject_I = -0.2;
  const Run r = run([&](std::ostream& o, std::ostream& e) { return cmd_verify(cfg, o, e); });
  CHECK(r.status == kExitCheckFailed);
  const json j = json::parse(r.out);
  CHECK_FALSE(j["passed"].get<bool>());
  for (const auto& o : j["oracles"]) {
    const std::string name = o["name"];
    if (name == "identity_1" || name == "identity_3") CHECK_FALSE(o["passed"].get<bool>());
    // the half period still exceeds (0.1)^{-2/7}
    if (name == "period_bound") CHECK(o["passed"].get<bool>());
  }
  CHECK(r.err.find("check failed: identity_1") != std::string::npos);

  cfg.inject_I = -0.26;
  const json k = json::parse(run([&](std::ostream& o, std::ostream& e) { return cmd_verify(cfg, o, e); }).out);
  for (const auto& o : k["oracles"])
    if (o["name"] == "interval_bounds") CHECK_FALSE(o["passed"].get<bool>());
}

TEST_CASE("executable exit codes and output file") {
  const std::string exe = OSCIMIN_EXE;
  const auto out = std::filesystem::temp_directory_path() / "oscimin_test_exe.json";
  CHECK(std::system((exe + " find-infimum --bracket 0.20 0.24 >/dev/null 2>&1").c_str()) != 0);
  CHECK(std::system((exe + " find-infimum --format json --out " + out.string()).c_str()) == 0);
  std::ifstream in(out);
  const json j = json::parse(in);
  CHECK(std::abs(j["I"].get<double>() + 0.1580) <= 5e-4);
  std::filesystem::remove(out);
  CHECK(std::system((exe + " nonsense >/dev/null 2>&1").c_str()) != 0);
  CHECK(std::system((exe + " q >/dev/null 2>&1").c_str()) != 0);
  CHECK(std::system((exe + " find-infimum --format xml >/dev/null 2>&1").c_str()) != 0);
}
