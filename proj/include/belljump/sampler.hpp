#pragma once

// Trajectory generation by the (T_n, Z_n) recursion: the holding time in x
// after t has survival function exp(-Gamma_{t,x}(u)) with
// Gamma_{t,x}(u) = int_t^u gamma_x(s) ds, and the destination at the jump
// instant is drawn with probabilities sigma_t(y|x) / gamma_x(t).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "belljump/random.hpp"
#include "belljump/rates.hpp"

namespace belljump {

struct SimulationParams {
  double t0 = 0.0;
  double t_end = 1.0;
  std::uint64_t max_jumps = 10000;
  double quad_rel_tol = 1e-9;
  double quad_abs_tol = 1e-12;
  double root_tol = 1e-10;
  std::uint64_t seed = 0;
  std::uint64_t trajectory_index = 0;

  void validate() const;
};

enum class TrajectoryStatus { ReachedHorizon, Exploded, HitCemetery };

const char* to_string(TrajectoryStatus s);

struct Event {
  double time;
  LabelId label;
};

struct Diagnostic {
  double time;
  LabelId label;
  std::string reason;
};

struct Trajectory {
  std::vector<Event> events;  // events.front().time == t0
  TrajectoryStatus status = TrajectoryStatus::ReachedHorizon;
  double final_time = 0.0;
  std::optional<Diagnostic> diagnostic;  // set whenever status != ReachedHorizon

  std::size_t jump_count() const { return events.empty() ? 0 : events.size() - 1; }
};

struct HazardPiece {
  double lo;
  double hi;
  double value;
};

/// Adaptive partition of [t, u] with per-interval hazard integrals.
struct HazardIntegral {
  double t = 0.0;
  double u = 0.0;
  LabelId x = 0;
  std::vector<HazardPiece> pieces;
  Extended total = Extended::finite(0.0);
};

/// Integral of gamma_x over [t, u] beyond which exp(-Gamma) underflows.
inline constexpr double kHazardCeiling = 700.0;

HazardIntegral integrate_hazard(const RateContext& ctx, double t, LabelId x, double u,
                                const SimulationParams& params);

/// Gamma_{t,x}(u). INFINITE when a node of x lies in (t, u], when the
/// integral passes kHazardCeiling, or when (t, x) itself is a node.
Extended cumulative_hazard(const RateContext& ctx, double t, LabelId x, double u,
                           const SimulationParams& params);

/// First node of x in (t, t_end]. Scans `scan_points` cells for threshold
/// crossings and for interior minima (sign changes of d/ds mu_s(x)), bisects
/// to `root_tol`, and reports the bottom of the first dip below the node
/// threshold, which is the zero of mu for an exact node. A dip below
/// threshold narrower than the scan cell without a detectable minimum
/// between grid points is beyond resolution.
std::optional<double> first_node_time(const RateContext& ctx, double t, LabelId x, double t_end,
                                      std::size_t scan_points = 1024, double root_tol = 1e-10);

struct HoldingTime {
  bool frozen = false;  // no jump before the horizon
  double time = 0.0;
};

/// Solves Gamma_{t,x}(u) = level for u <= params.t_end, or reports FROZEN.
HoldingTime solve_holding_time(const RateContext& ctx, double t, LabelId x, double level,
                               const SimulationParams& params);

/// Draws E ~ Exp(1) from `rng` and solves Gamma_{t,x}(u) = E.
HoldingTime sample_holding_time(const RateContext& ctx, double t, LabelId x,
                                const SimulationParams& params, RandomStream& rng);

struct Destination {
  bool cemetery = false;
  LabelId label = 0;
};

Destination sample_destination(const RateContext& ctx, double t, LabelId x, RandomStream& rng);

Trajectory simulate_trajectory(const RateContext& ctx, const SimulationParams& params);

/// Right-continuous X_t; empty optional is the cemetery. Throws for t < t0.
std::optional<LabelId> position_at(const Trajectory& traj, double t);

}  // namespace belljump
