#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "belljump/oracle.hpp"
#include "belljump/sampler.hpp"

namespace belljump {

struct EnsembleOptions {
  std::vector<double> checkpoints;
  bool keep_paths = false;
  /// Predict the mean jump count with the master-equation oracle.
  bool compute_oracle = true;
  double oracle_grid_step = 1e-2;
  /// Trajectories simulated per parallel block before the ordered merge.
  std::size_t block_size = 2048;
  Execution exec = Execution::Parallel;
  /// Worker count; 0 keeps the OpenMP default.
  int threads = 0;
};

struct EnsembleReport {
  std::vector<std::string> labels;
  std::uint64_t n_trajectories = 0;
  double t0 = 0.0;
  double t_end = 0.0;
  std::vector<double> checkpoints;
  std::vector<DistributionSnapshot> empirical;
  std::vector<DistributionSnapshot> expected;  // mu_t
  std::vector<double> tv_distance;
  /// Labels whose empirical frequency exceeds mu + 4 sqrt(mu/n) + 4/n.
  std::vector<std::uint64_t> envelope_violations;
  double mean_jumps = 0.0;
  double jumps_standard_error = 0.0;
  std::uint64_t max_jumps_observed = 0;
  std::optional<double> expected_jumps;
  std::uint64_t explosion_count = 0;
  std::uint64_t cemetery_count = 0;
  /// min over all events (T_n, Z_n) of mu_{T_n}(Z_n).
  double min_weight_visited = 0.0;
  /// Events or checkpoint positions found at a node.
  std::uint64_t node_occupancy = 0;
  std::map<std::string, double> ks_statistics;
  std::vector<Diagnostic> diagnostics;  // first few non-horizon outcomes
  std::vector<Trajectory> paths;        // only with keep_paths
};

/// Called in trajectory-index order, from the calling thread.
using TrajectorySink = std::function<void(std::uint64_t index, const Trajectory&)>;

/// Simulates trajectories 0..n-1 with params.seed. params.trajectory_index
/// is ignored. Results do not depend on the worker count.
EnsembleReport run_ensemble(const RateContext& ctx, const SimulationParams& params, std::uint64_t n,
                            const EnsembleOptions& options, const TrajectorySink& sink = {});

/// 1/2 sum_x |p(x) - q(x)| after normalizing both to unit mass.
double tv_distance(const DistributionSnapshot& p, const DistributionSnapshot& q);

struct JumpStatistics {
  double mean = 0.0;
  double standard_error = 0.0;
  std::uint64_t max = 0;
};

/// S(t) = #{n >= 1 : t0 < T_n <= t} per trajectory, summarized.
JumpStatistics jump_count_statistics(const std::vector<Trajectory>& trajectories, double t);

/// sup_u |F(u) - G(u)| for two samples.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// sup_u |F_n(u) - F(u)| against a continuous CDF.
double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);

}  // namespace belljump
