#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oscimin/cli.hpp"

namespace {

using oscimin::cli::OutputFormat;
using oscimin::cli::RunConfig;

struct Shared {
  RunConfig cfg;
  std::vector<double> bracket;
  std::string format = "csv";
  std::string out_path;
};

void add_common(CLI::App* sub, Shared& s) {
  sub->add_option("--rel-tol", s.cfg.integrator.rel_tol, "integrator relative tolerance")
      ->check(CLI::PositiveNumber);
  sub->add_option("--abs-tol", s.cfg.integrator.abs_tol, "integrator absolute tolerance")
      ->check(CLI::PositiveNumber);
  sub->add_option("--x-max", s.cfg.integrator.x_max, "integration horizon")
      ->check(CLI::PositiveNumber);
  sub->add_option("--blowup", s.cfg.integrator.blowup_threshold, "blow-up threshold on |u|, |u'|, ...")
      ->check(CLI::PositiveNumber);
  sub->add_option("--root-tol", s.cfg.root_tol, "width of the final lambda bracket")
      ->check(CLI::PositiveNumber);
  sub->add_option("--bracket", s.bracket, "initial lambda bracket LO HI")->expected(2);
  sub->add_option("--format", s.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", s.out_path, "write output to PATH instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shooting solver for the sharp constant of int u''^2 - int u'' u^2 >= I int u^4"};
  app.require_subcommand(1);

  Shared s;
  s.cfg.threads = oscimin::cli::threads_from_env();

  auto* find = app.add_subcommand("find-infimum", "solve J~(lambda) + lambda = 0 and report I");
  auto* sweep = app.add_subcommand("sweep", "tabulate J and J~ over a range of lambda");
  auto* profile = app.add_subcommand("profile", "sample the minimizer over one period [-T, T]");
  auto* verify = app.add_subcommand("verify", "run the oracle suite");
  auto* q = app.add_subcommand("q", "evaluate the quotient on sampled (x, u) data");
  for (auto* sub : {find, sweep, profile, verify, q}) add_common(sub, s);

  sweep->add_option("--from", s.cfg.sweep_from, "first lambda");
  sweep->add_option("--to", s.cfg.sweep_to, "last lambda");
  sweep->add_option("--step", s.cfg.sweep_step, "lambda increment");
  profile->add_option("--samples", s.cfg.samples, "number of samples over [-T, T]");
  double inject = 0.0;
  auto* inject_opt = verify->add_option("--inject-i", inject, "replace the converged I in the checks");

  std::string q_path;
  bool periodic = false;
  q->add_option("FILE", q_path, "CSV with x in column 1 and u in column 2")->required();
  q->add_flag("--periodic", periodic, "treat the grid as one closed period");

  CLI11_PARSE(app, argc, argv);

  if (!s.bracket.empty()) s.cfg.bracket = {s.bracket[0], s.bracket[1]};
  s.cfg.format = s.format == "json" ? OutputFormat::json : OutputFormat::csv;
  if (*inject_opt) s.cfg.inject_I = inject;

  std::ofstream file;
  if (!s.out_path.empty()) {
    file.open(s.out_path);
    if (!file) {
      std::cerr << "error: cannot open " << s.out_path << " for writing\n";
      return oscimin::cli::kExitError;
    }
  }
  std::ostream& out = s.out_path.empty() ? std::cout : file;

  if (*find) return oscimin::cli::cmd_find_infimum(s.cfg, out, std::cerr);
  if (*sweep) return oscimin::cli::cmd_sweep(s.cfg, out, std::cerr);
  if (*profile) return oscimin::cli::cmd_profile(s.cfg, out, std::cerr);
  if (*verify) return oscimin::cli::cmd_verify(s.cfg, out, std::cerr);
  return oscimin::cli::cmd_q(q_path, periodic, s.cfg, out, std::cerr);
}
