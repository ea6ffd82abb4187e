#include "belljump/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace belljump {

namespace {

constexpr std::int64_t kCemetery = -1;
constexpr std::size_t kMaxDiagnostics = 16;

struct TrajectorySummary {
  std::uint64_t jumps = 0;
  TrajectoryStatus status = TrajectoryStatus::ReachedHorizon;
  std::vector<std::int64_t> at_checkpoint;
  double min_weight = std::numeric_limits<double>::infinity();
  std::uint64_t node_events = 0;
  std::optional<Diagnostic> diagnostic;
};

TrajectorySummary summarize(const Trajectory& traj, RateEvaluator& ev,
                            const std::vector<double>& checkpoints) {
  TrajectorySummary s;
  s.jumps = traj.jump_count();
  s.status = traj.status;
  s.diagnostic = traj.diagnostic;
  for (const Event& e : traj.events) {
    ev.at(e.time);
    s.min_weight = std::min(s.min_weight, ev.weight(e.label));
    if (ev.is_node(e.label)) ++s.node_events;
  }
  s.at_checkpoint.reserve(checkpoints.size());
  for (double c : checkpoints) {
    const auto pos = position_at(traj, c);
    s.at_checkpoint.push_back(pos ? static_cast<std::int64_t>(*pos) : kCemetery);
  }
  return s;
}

int worker_slot() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

int worker_capacity(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

}  // namespace

double tv_distance(const DistributionSnapshot& p, const DistributionSnapshot& q) {
  if (p.weights.size() != q.weights.size()) throw ValidationError("q", "distributions have different supports");
  const double mp = p.total();
  const double mq = q.total();
  if (!(mp > 0.0) || !(mq > 0.0)) throw ValidationError("p", "distribution has zero mass");
  double s = 0.0;
  for (std::size_t i = 0; i < p.weights.size(); ++i) s += std::abs(p.weights[i] / mp - q.weights[i] / mq);
  return std::clamp(0.5 * s, 0.0, 1.0);
}

JumpStatistics jump_count_statistics(const std::vector<Trajectory>& trajectories, double t) {
  JumpStatistics out;
  if (trajectories.empty()) return out;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const Trajectory& traj : trajectories) {
    std::uint64_t s = 0;
    for (std::size_t i = 1; i < traj.events.size(); ++i) {
      if (traj.events[i].time > traj.events.front().time && traj.events[i].time <= t) ++s;
    }
    sum += static_cast<double>(s);
    sum_sq += static_cast<double>(s) * static_cast<double>(s);
    out.max = std::max(out.max, s);
  }
  const auto n = static_cast<double>(trajectories.size());
  out.mean = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1)) : 0.0;
  out.standard_error = std::sqrt(var / n);
  return out;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ValidationError("sample", "empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw ValidationError("sample", "empty sample");
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

EnsembleReport run_ensemble(const RateContext& ctx, const SimulationParams& params, std::uint64_t n,
                            const EnsembleOptions& options, const TrajectorySink& sink) {
  params.validate();
  if (n == 0) throw ValidationError("n", "trajectory count must be positive");
  for (double c : options.checkpoints) {
    if (!(c >= params.t0 && c <= params.t_end)) {
      throw ValidationError("checkpoints", "checkpoint outside [t0, t_end]");
    }
  }
  const std::size_t L = ctx.label_count();
  const std::size_t C = options.checkpoints.size();
  const bool parallel = options.exec == Execution::Parallel;
  const int workers = parallel ? worker_capacity(options.threads) : 1;
  const std::size_t block = std::max<std::size_t>(1, options.block_size);

  EnsembleReport report;
  report.labels = ctx.povm().labels();
  report.n_trajectories = n;
  report.t0 = params.t0;
  report.t_end = params.t_end;
  report.checkpoints = options.checkpoints;

  std::vector<std::vector<std::uint64_t>> counts(C, std::vector<std::uint64_t>(L, 0));
  std::vector<std::uint64_t> cemetery_at(C, 0);
  std::uint64_t jump_sum = 0;
  std::uint64_t jump_sq_sum = 0;
  double min_weight = std::numeric_limits<double>::infinity();

  std::vector<RateEvaluator> evaluators(static_cast<std::size_t>(workers), RateEvaluator(ctx));
  std::vector<Trajectory> trajs;
  std::vector<TrajectorySummary> summaries;

  for (std::uint64_t start = 0; start < n; start += block) {
    const std::uint64_t stop = std::min<std::uint64_t>(n, start + block);
    const auto count = static_cast<long>(stop - start);
    trajs.assign(static_cast<std::size_t>(count), Trajectory{});
    summaries.assign(static_cast<std::size_t>(count), TrajectorySummary{});

#pragma omp parallel for schedule(dynamic, 16) num_threads(workers) if (parallel)
    for (long i = 0; i < count; ++i) {
      SimulationParams p = params;
      p.trajectory_index = start + static_cast<std::uint64_t>(i);
      RateEvaluator& ev = evaluators[static_cast<std::size_t>(parallel ? worker_slot() : 0)];
      trajs[static_cast<std::size_t>(i)] = simulate_trajectory(ctx, p);
      summaries[static_cast<std::size_t>(i)] = summarize(trajs[static_cast<std::size_t>(i)], ev, options.checkpoints);
    }

    // Ordered merge: every accumulator is an integer count or a min, so the
    // result is independent of how the block was scheduled.
    for (long i = 0; i < count; ++i) {
      const auto& s = summaries[static_cast<std::size_t>(i)];
      jump_sum += s.jumps;
      jump_sq_sum += s.jumps * s.jumps;
      report.max_jumps_observed = std::max(report.max_jumps_observed, s.jumps);
      if (s.status == TrajectoryStatus::Exploded) ++report.explosion_count;
      if (s.status == TrajectoryStatus::HitCemetery) ++report.cemetery_count;
      if (s.diagnostic && report.diagnostics.size() < kMaxDiagnostics) report.diagnostics.push_back(*s.diagnostic);
      min_weight = std::min(min_weight, s.min_weight);
      report.node_occupancy += s.node_events;
      for (std::size_t c = 0; c < C; ++c) {
        const std::int64_t pos = s.at_checkpoint[c];
        if (pos == kCemetery) ++cemetery_at[c];
        else ++counts[c][static_cast<std::size_t>(pos)];
      }
      const std::uint64_t index = start + static_cast<std::uint64_t>(i);
      if (sink) sink(index, trajs[static_cast<std::size_t>(i)]);
      if (options.keep_paths) report.paths.push_back(std::move(trajs[static_cast<std::size_t>(i)]));
    }
  }

  const auto nd = static_cast<double>(n);
  report.mean_jumps = static_cast<double>(jump_sum) / nd;
  const double var = n > 1 ? std::max(0.0, (static_cast<double>(jump_sq_sum) - nd * report.mean_jumps * report.mean_jumps) / (nd - 1.0)) : 0.0;
  report.jumps_standard_error = std::sqrt(var / nd);
  report.min_weight_visited = min_weight;

  RateEvaluator ev(ctx);
  for (std::size_t c = 0; c < C; ++c) {
    const double t = options.checkpoints[c];
    DistributionSnapshot emp{t, std::vector<double>(L)};
    for (std::size_t x = 0; x < L; ++x) emp.weights[x] = static_cast<double>(counts[c][x]) / nd;
    DistributionSnapshot mu = distribution(ctx, t);
    ev.at(t);
    std::uint64_t violations = 0;
    for (std::size_t x = 0; x < L; ++x) {
      const double m = mu.weights[x];
      if (emp.weights[x] > m + 4.0 * std::sqrt(m / nd) + 4.0 / nd) ++violations;
      if (counts[c][x] > 0 && ev.is_node(x)) report.node_occupancy += counts[c][x];
    }
    report.tv_distance.push_back(cemetery_at[c] == n ? 1.0 : tv_distance(emp, mu));
    report.envelope_violations.push_back(violations);
    report.empirical.push_back(std::move(emp));
    report.expected.push_back(std::move(mu));
  }

  if (options.compute_oracle) {
    const OracleSolution law = solve_master_equation(ctx, params.t0, params.t_end, options.oracle_grid_step);
    report.expected_jumps = expected_jump_count(ctx, params.t0, params.t_end, law);
  }
  return report;
}

}  // namespace belljump
