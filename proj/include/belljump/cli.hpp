#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace belljump {

/// Process exit codes of the command-line tool.
enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitInvalid = 2 };

struct RunConfig {
  std::string model = "two_level";
  double t0 = 0.0;
  double t_end = 1.0;
  std::uint64_t n = 10000;
  std::uint64_t seed = 0;
  /// A count k (k equally spaced times in (t0, t_end]) or a comma list.
  std::string checkpoints = "5";
  int threads = 0;
  std::string output;
  bool keep_paths = false;
  double node_epsilon = 1e-12;
  std::uint64_t max_jumps = 10000;
  double quad_rel_tol = 1e-9;
  double quad_abs_tol = 1e-12;
  double root_tol = 1e-10;
  double grid_step = 2.5e-3;
  double ode_rel_tol = 1e-9;
  int picard_terms = 12;
  std::size_t hs_trials = 100;
  double rates_time = 0.0;

  void validate() const;
};

std::vector<double> parse_checkpoints(const std::string& spec, double t0, double t_end);

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace belljump
