#include "belljump/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace belljump {

void SimulationParams::validate() const {
  if (!(std::isfinite(t0) && std::isfinite(t_end))) throw ValidationError("t0", "times must be finite");
  if (!(t_end > t0)) throw ValidationError("t_end", "horizon must exceed the start time");
  if (max_jumps < 1) throw ValidationError("max_jumps", "must be at least 1");
  if (!(quad_rel_tol > 0.0)) throw ValidationError("quad_rel_tol", "must be positive");
  if (!(quad_abs_tol > 0.0)) throw ValidationError("quad_abs_tol", "must be positive");
  if (!(root_tol > 0.0)) throw ValidationError("root_tol", "must be positive");
}

const char* to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::ReachedHorizon:
      return "REACHED_HORIZON";
    case TrajectoryStatus::Exploded:
      return "EXPLODED";
    case TrajectoryStatus::HitCemetery:
      return "HIT_CEMETERY";
  }
  return "UNKNOWN";
}

namespace {

constexpr int kMaxDepth = 60;
constexpr std::size_t kEvalBudget = 4'000'000;

// Panel width cap: a fraction of the fastest oscillation in mu_t, so that a
// single Simpson panel cannot step over structure in the rate.
double panel_cap(const RateContext& ctx) { return 0.5 / (1.0 + ctx.max_frequency()); }

/// Adaptive Simpson for gamma_x over a panel. A node met at a sample point,
/// or a non-integrable blow-up that exhausts the resolution, makes the
/// result INFINITE.
class HazardQuadrature {
 public:
  HazardQuadrature(RateEvaluator& ev, LabelId x, double rel_tol, double abs_tol)
      : ev_(ev), x_(x), rel_tol_(rel_tol), abs_tol_(abs_tol) {}

  Extended integrate(double a, double b, std::vector<HazardPiece>* leaves) {
    if (!(b > a)) return Extended::finite(0.0);
    double fa, fm, fb;
    const double m = 0.5 * (a + b);
    if (!eval(a, fa) || !eval(m, fm) || !eval(b, fb)) return Extended::infinite();
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double tol = std::max(abs_tol_, rel_tol_ * std::abs(whole));
    double out = 0.0;
    if (!adapt(a, fa, m, fm, b, fb, whole, tol, 0, out, leaves)) return Extended::infinite();
    return Extended::finite(std::max(0.0, out));
  }

  std::size_t evaluations() const { return evals_; }

 private:
  bool eval(double s, double& f) {
    if (++evals_ > kEvalBudget) {
      throw QuadratureError(lo_, hi_, "hazard quadrature exceeded its evaluation budget");
    }
    ev_.at(s);
    const Extended r = ev_.total_rate(x_);
    if (r.is_infinite()) return false;
    f = r.value();
    return true;
  }

  bool adapt(double a, double fa, double m, double fm, double b, double fb, double whole,
             double tol, int depth, double& out, std::vector<HazardPiece>* leaves) {
    lo_ = a;
    hi_ = b;
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    double flm, frm;
    if (!eval(lm, flm) || !eval(rm, frm)) return false;
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    const bool converged = std::abs(delta) <= 15.0 * tol;
    const double min_width = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(a));
    const bool exhausted = depth >= kMaxDepth || (m - a) <= min_width;
    if (converged || exhausted) {
      if (!converged) {
        const double fmax = std::max({fa, flm, fm, frm, fb});
        if (fmax * (b - a) > 1e-3) return false;  // pole between samples
      }
      const double l = left + delta / 30.0;
      const double r = right + delta / 30.0;
      if (leaves) {
        leaves->push_back({a, m, l});
        leaves->push_back({m, b, r});
      }
      out += l + r;
      return true;
    }
    return adapt(a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1, out, leaves) &&
           adapt(m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1, out, leaves);
  }

  RateEvaluator& ev_;
  LabelId x_;
  double rel_tol_;
  double abs_tol_;
  std::size_t evals_ = 0;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

/// Marches Simpson panels from t towards `limit`, doubling the panel width
/// up to the cap. Stops as soon as the running integral reaches `level`.
struct MarchResult {
  bool reached = false;  // running integral reached `level` inside [a, b]
  double a = 0.0;
  double b = 0.0;
  double acc_at_a = 0.0;
  Extended panel = Extended::finite(0.0);
  std::vector<HazardPiece> leaves;
  double total = 0.0;  // full integral when !reached
};

MarchResult march(HazardQuadrature& q, const RateContext& ctx, double t, double limit, double level,
                  std::vector<HazardPiece>* all_leaves) {
  const double cap = panel_cap(ctx);
  double width = cap / 16.0;
  double a = t;
  double acc = 0.0;
  MarchResult r;
  while (a < limit) {
    double b = a + width;
    if (b >= limit || limit - b < 1e-3 * width) b = limit;
    r.leaves.clear();
    const Extended p = q.integrate(a, b, &r.leaves);
    if (p.is_infinite() || acc + p.value() >= level || acc + p.value() > kHazardCeiling) {
      r.reached = true;
      r.a = a;
      r.b = b;
      r.acc_at_a = acc;
      r.panel = p;
      if (all_leaves) all_leaves->insert(all_leaves->end(), r.leaves.begin(), r.leaves.end());
      return r;
    }
    if (all_leaves) all_leaves->insert(all_leaves->end(), r.leaves.begin(), r.leaves.end());
    acc += p.value();
    a = b;
    width = std::min(2.0 * width, cap);
  }
  r.total = acc;
  return r;
}

/// Smallest u in (a, b] with acc_at_a + Gamma(a, u) >= level, to root_tol.
double locate_level(HazardQuadrature& q, const MarchResult& m, double level, double root_tol) {
  double lo = m.a;
  double acc_lo = m.acc_at_a;
  double hi = m.b;
  double g_hi = std::numeric_limits<double>::infinity();
  if (m.panel.is_finite()) {
    g_hi = acc_lo + m.panel.value() - level;
    double cum = acc_lo;
    for (const HazardPiece& leaf : m.leaves) {
      if (cum + leaf.value >= level) {
        lo = leaf.lo;
        acc_lo = cum;
        hi = leaf.hi;
        g_hi = cum + leaf.value - level;
        break;
      }
      cum += leaf.value;
    }
  }

  int lo_moves = 0;
  int stall = 0;
  double prev_width = hi - lo;
  for (int iter = 0; hi - lo > root_tol; ++iter) {
    if (iter > 400) throw InternalError("holding-time root finder failed to converge");
    const double width = hi - lo;
    const double g_lo = acc_lo - level;
    double s = lo + 0.5 * width;
    if (std::isfinite(g_hi) && stall < 2 && g_hi > g_lo) {
      s = lo + width * (-g_lo) / (g_hi - g_lo);
      const double guard = std::min(0.1 * width, 0.25 * root_tol);
      s = std::clamp(s, lo + guard, hi - guard);
    }
    const Extended seg = q.integrate(lo, s, nullptr);
    if (seg.is_infinite() || acc_lo + seg.value() >= level) {
      hi = s;
      g_hi = seg.is_infinite() ? std::numeric_limits<double>::infinity() : acc_lo + seg.value() - level;
      lo_moves = 0;
    } else {
      acc_lo += seg.value();
      lo = s;
      if (++lo_moves >= 2 && std::isfinite(g_hi)) g_hi *= 0.5;  // Illinois step
    }
    const double new_width = hi - lo;
    stall = (new_width > 0.5 * prev_width) ? stall + 1 : 0;
    if (stall > 2) stall = 0;  // after a forced bisection, retry interpolation
    prev_width = new_width;
  }
  return hi;
}

HoldingTime solve_with(RateEvaluator& ev, double t, LabelId x, double level,
                       const SimulationParams& params) {
  if (t >= params.t_end) return {true, params.t_end};
  HazardQuadrature q(ev, x, params.quad_rel_tol, params.quad_abs_tol);
  const MarchResult m = march(q, ev.context(), t, params.t_end, level, nullptr);
  if (!m.reached) return {true, params.t_end};
  const double u = locate_level(q, m, level, params.root_tol);
  return {false, u};
}

Destination draw_destination(RateEvaluator& ev, LabelId x, RandomStream& rng) {
  const std::size_t n = ev.context().label_count();
  if (ev.is_node(x)) return {true, 0};
  double total = 0.0;
  for (LabelId y = 0; y < n; ++y) {
    if (y != x && !ev.is_node(y)) total += ev.flux(y, x);
  }
  const double u = rng.uniform();
  if (!(total > 0.0)) return {true, 0};
  const double target = u * total;
  double cum = 0.0;
  std::optional<LabelId> last;
  for (LabelId y = 0; y < n; ++y) {
    if (y == x || ev.is_node(y)) continue;
    const double f = ev.flux(y, x);
    if (f <= 0.0) continue;
    last = y;
    cum += f;
    if (target < cum) return {false, y};
  }
  return {false, *last};
}

std::string describe(const char* what, double t, const std::string& label) {
  std::ostringstream os;
  os.precision(17);
  os << what << " at t=" << t << " in '" << label << "'";
  return os.str();
}

}  // namespace

HazardIntegral integrate_hazard(const RateContext& ctx, double t, LabelId x, double u,
                                const SimulationParams& params) {
  if (x >= ctx.label_count()) throw ValidationError("label", "label index out of range");
  if (u < t) throw ValidationError("u", "upper limit precedes the start time");
  HazardIntegral out;
  out.t = t;
  out.u = u;
  out.x = x;
  if (u == t) return out;
  RateEvaluator ev(ctx);
  HazardQuadrature q(ev, x, params.quad_rel_tol, params.quad_abs_tol);
  const MarchResult m =
      march(q, ctx, t, u, std::numeric_limits<double>::infinity(), &out.pieces);
  out.total = m.reached ? Extended::infinite() : Extended::finite(m.total);
  return out;
}

Extended cumulative_hazard(const RateContext& ctx, double t, LabelId x, double u,
                           const SimulationParams& params) {
  if (x >= ctx.label_count()) throw ValidationError("label", "label index out of range");
  if (u < t) throw ValidationError("u", "upper limit precedes the start time");
  RateEvaluator ev(ctx);
  ev.at(t);
  if (ev.is_node(x)) return Extended::infinite();
  if (u == t) return Extended::finite(0.0);
  if (first_node_time(ctx, t, x, u, 64, params.root_tol)) return Extended::infinite();
  return integrate_hazard(ctx, t, x, u, params).total;
}

std::optional<double> first_node_time(const RateContext& ctx, double t, LabelId x, double t_end,
                                      std::size_t scan_points, double root_tol) {
  if (x >= ctx.label_count()) throw ValidationError("label", "label index out of range");
  if (!(t_end > t)) return std::nullopt;
  if (scan_points == 0) scan_points = 1;
  RateEvaluator ev(ctx);
  const double thr = ctx.node_threshold();
  auto excess = [&](double s) {
    ev.at(s);
    return ev.weight(x) - thr;
  };
  auto slope = [&](double s) {
    ev.at(s);
    return ev.weight_derivative(x);
  };
  if (excess(t) <= 0.0) throw ValidationError("t", describe("start is a node", t, ctx.povm().label(x)));

  const double h = (t_end - t) / static_cast<double>(scan_points);

  // Given excess(lo) > 0 >= excess(hi), find where the weight enters the
  // sub-threshold region, then follow it down to the bottom of that dip.
  // The entry point sits O(sqrt(node_epsilon)) before an exact zero of mu;
  // the bottom is where mu vanishes.
  auto crossing = [&](double lo, double hi) {
    while (hi - lo > root_tol) {
      const double mid = 0.5 * (lo + hi);
      if (excess(mid) > 0.0) lo = mid; else hi = mid;
    }
    const double enter = hi;
    if (slope(enter) >= 0.0) return enter;
    double b = enter;
    for (;;) {
      b = std::min(t_end, b + h);
      if (excess(b) > 0.0 || slope(b) >= 0.0 || b >= t_end) break;
    }
    if (excess(b) <= 0.0 && slope(b) < 0.0) return b;
    double a = enter;
    while (b - a > root_tol) {
      const double mid = 0.5 * (a + b);
      if (excess(mid) <= 0.0 && slope(mid) < 0.0) a = mid; else b = mid;
    }
    return excess(b) <= 0.0 ? b : a;
  };

  double s0 = t;
  double d0 = slope(t);
  for (std::size_t i = 1; i <= scan_points; ++i) {
    const double s1 = (i == scan_points) ? t_end : t + h * static_cast<double>(i);
    if (excess(s1) <= 0.0) return crossing(s0, s1);
    const double d1 = slope(s1);
    if (d0 < 0.0 && d1 >= 0.0) {
      // Interior minimum: locate it on the derivative.
      double lo = s0;
      double hi = s1;
      while (hi - lo > root_tol) {
        const double mid = 0.5 * (lo + hi);
        if (slope(mid) < 0.0) lo = mid; else hi = mid;
      }
      for (double s : {lo, hi}) {
        if (excess(s) <= 0.0) return crossing(s0, s);
      }
    }
    s0 = s1;
    d0 = d1;
  }
  return std::nullopt;
}

HoldingTime solve_holding_time(const RateContext& ctx, double t, LabelId x, double level,
                               const SimulationParams& params) {
  if (x >= ctx.label_count()) throw ValidationError("label", "label index out of range");
  if (!(level > 0.0)) throw ValidationError("level", "hazard level must be positive");
  RateEvaluator ev(ctx);
  ev.at(t);
  if (ev.is_node(x)) throw ValidationError("t", describe("holding time requested from a node", t, ctx.povm().label(x)));
  return solve_with(ev, t, x, level, params);
}

HoldingTime sample_holding_time(const RateContext& ctx, double t, LabelId x,
                                const SimulationParams& params, RandomStream& rng) {
  return solve_holding_time(ctx, t, x, rng.exponential(), params);
}

Destination sample_destination(const RateContext& ctx, double t, LabelId x, RandomStream& rng) {
  if (x >= ctx.label_count()) throw ValidationError("label", "label index out of range");
  RateEvaluator ev(ctx);
  ev.at(t);
  return draw_destination(ev, x, rng);
}

Trajectory simulate_trajectory(const RateContext& ctx, const SimulationParams& params) {
  params.validate();
  RandomStream rng(params.seed, params.trajectory_index);
  RateEvaluator ev(ctx);
  Trajectory traj;

  // Z_0 from mu_{t0} restricted to admissible labels.
  ev.at(params.t0);
  const std::size_t n = ctx.label_count();
  double total = 0.0;
  for (LabelId x = 0; x < n; ++x) {
    if (!ev.is_node(x)) total += ev.weight(x);
  }
  const double u0 = rng.uniform();
  if (!(total > 0.0)) {
    traj.status = TrajectoryStatus::HitCemetery;
    traj.final_time = params.t0;
    traj.diagnostic = Diagnostic{params.t0, 0, "initial distribution is concentrated on nodes"};
    return traj;
  }
  LabelId z = n;
  double cum = 0.0;
  for (LabelId x = 0; x < n; ++x) {
    if (ev.is_node(x)) continue;
    cum += ev.weight(x);
    z = x;
    if (u0 * total < cum) break;
  }
  traj.events.push_back({params.t0, z});

  double now = params.t0;
  while (true) {
    const double level = rng.exponential();
    const HoldingTime h = solve_with(ev, now, z, level, params);
    if (h.frozen) {
      traj.status = TrajectoryStatus::ReachedHorizon;
      traj.final_time = params.t_end;
      return traj;
    }
    if (traj.jump_count() >= params.max_jumps) {
      traj.status = TrajectoryStatus::Exploded;
      traj.final_time = now;
      traj.diagnostic = Diagnostic{now, z, describe("jump cap reached", now, ctx.povm().label(z))};
      return traj;
    }
    ev.at(h.time);
    const Destination d = draw_destination(ev, z, rng);
    if (d.cemetery) {
      traj.status = TrajectoryStatus::HitCemetery;
      traj.final_time = h.time;
      const char* why = ev.is_node(z) ? "jump instant is a node" : "total rate vanishes at the jump instant";
      traj.diagnostic = Diagnostic{h.time, z, describe(why, h.time, ctx.povm().label(z))};
      return traj;
    }
    now = h.time;
    z = d.label;
    traj.events.push_back({now, z});
  }
}

std::optional<LabelId> position_at(const Trajectory& traj, double t) {
  if (traj.events.empty()) return std::nullopt;
  if (t < traj.events.front().time) throw ValidationError("t", "time precedes the trajectory start");
  if (traj.status != TrajectoryStatus::ReachedHorizon && t >= traj.final_time) return std::nullopt;
  const auto it = std::upper_bound(traj.events.begin(), traj.events.end(), t,
                                   [](double v, const Event& e) { return v < e.time; });
  return std::prev(it)->label;
}

}  // namespace belljump
