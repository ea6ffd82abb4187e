#pragma once

// Deterministic predictions for what the Monte Carlo engine should produce:
//
//  * the master equation  d/dt rho(x) = sum_y rho(y) sigma(x|y) - rho(x) sigma(y|x),
//    integrated with the Dormand-Prince 5(4) pair;
//  * the series sum_n A_n(t, x) for the minimal solution of
//      rho_t(x) = mu_t0(x) e^{-Gamma_{t0,x}(t)}
//               + sum_y int_t0^t ds rho_s(y) sigma_s(x|y) e^{-Gamma_{s,x}(t)},
//    built by trapezoidal quadrature on a fixed grid;
//  * the expected number of jumps int sum_x P(X_s = x) gamma_x(s) ds.
//
// Products rho(y) sigma(x|y) are always formed as (rho(y)/mu(y)) times the
// numerator [Im <psi|P(x) H P(y)|psi>]^+, never as infinity times zero.

#include <vector>

#include "belljump/rates.hpp"
#include "belljump/sampler.hpp"

namespace belljump {

enum class OracleMethod { MasterOde, Picard };

const char* to_string(OracleMethod m);

enum class Execution { Parallel, Serial };

struct OracleSolution {
  std::vector<double> times;
  std::vector<DistributionSnapshot> distributions;
  OracleMethod method = OracleMethod::MasterOde;
};

struct PicardIterate {
  int n = 0;  // number of A_n terms beyond A_0 that were added
  std::vector<double> times;
  /// partial_sums[N][k] = sum_{n<=N} A_n(t_k, .)
  std::vector<std::vector<DistributionSnapshot>> partial_sums;
  bool converged = false;
  double last_increment = 0.0;  // sup norm of the last A_n

  const std::vector<DistributionSnapshot>& final_sums() const { return partial_sums.back(); }
  OracleSolution as_solution() const;
};

/// Uniform grid from t0 to t_end whose step does not exceed grid_step.
std::vector<double> make_grid(double t0, double t_end, double grid_step);

OracleSolution solve_master_equation(const RateContext& ctx, double t0, double t_end, double grid_step,
                                     double rel_tol = 1e-9);

PicardIterate solve_integral_equation_picard(const RateContext& ctx, double t0, double t_end,
                                             double grid_step, int n_max,
                                             const SimulationParams& hazard_params = {},
                                             Execution exec = Execution::Parallel);

/// int_{t0}^{t} sum_x law_s(x) gamma_x(s) ds by composite Simpson over the
/// law's grid; t must be one of the grid times.
double expected_jump_count(const RateContext& ctx, double t0, double t, const OracleSolution& law);

}  // namespace belljump
