#pragma once

// Command implementations behind the `oscimin` executable. Each command
// writes its table to `out`, diagnostics to `err`, and returns the process
// exit status: 0 when everything requested passed, 1 when a check failed,
// 2 on solver, usage or input errors.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "oscimin/functionals.hpp"
#include "oscimin/oracles.hpp"
#include "oscimin/shooting.hpp"

namespace oscimin::cli {

enum class OutputFormat { csv, json };

struct RunConfig {
  IntegratorConfig integrator;
  double root_tol = 1e-9;
  LambdaBracket bracket;
  double sweep_from = 0.142;
  double sweep_to = 0.248;
  double sweep_step = 0.002;
  std::size_t samples = 2001;
  OutputFormat format = OutputFormat::csv;
  unsigned threads = 1;
  std::optional<double> inject_I;  // verify: replaces the converged I

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitError = 2;

int cmd_find_infimum(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_profile(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_q(const std::string& path, bool periodic, const RunConfig& cfg, std::ostream& out,
          std::ostream& err);

/// Oracle reports attached to a converged run.
std::vector<OracleReport> infimum_reports(const InfimumResult& res, const RunConfig& cfg);

/// The full oracle suite run by `verify`.
std::vector<OracleReport> verification_suite(const RunConfig& cfg);

/// Reads (x, u) from the first two columns of a comma-separated file. Lines
/// starting with '#' are comments; the first other line may be a header.
/// Throws Error(parse_error) naming the offending line.
SampledFunction read_samples_csv(std::istream& in);

/// 17 significant digits, the CSV number format.
std::string format_number(double v);

/// OSCIMIN_THREADS if set to a positive integer, otherwise 1.
unsigned threads_from_env();

}  // namespace oscimin::cli
