#include "belljump/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace belljump {

const char* to_string(OracleMethod m) {
  return m == OracleMethod::MasterOde ? "MASTER_ODE" : "PICARD";
}

std::vector<double> make_grid(double t0, double t_end, double grid_step) {
  if (!(t_end > t0)) throw ValidationError("t_end", "horizon must exceed the start time");
  if (!(grid_step > 0.0)) throw ValidationError("grid_step", "must be positive");
  const double span = t_end - t0;
  const auto k = static_cast<std::size_t>(std::max(1.0, std::ceil(span / grid_step - 1e-9)));
  std::vector<double> out(k + 1);
  for (std::size_t i = 0; i <= k; ++i) out[i] = t0 + span * static_cast<double>(i) / static_cast<double>(k);
  out.back() = t_end;
  return out;
}

OracleSolution PicardIterate::as_solution() const {
  return OracleSolution{times, final_sums(), OracleMethod::Picard};
}

namespace {

/// Right-hand side of the master equation at time t.
class MasterRhs {
 public:
  explicit MasterRhs(const RateContext& ctx) : ev_(ctx), n_(ctx.label_count()) {}

  void operator()(double t, const std::vector<double>& rho, std::vector<double>& out) {
    ev_.at(t);
    std::fill(out.begin(), out.end(), 0.0);
    const double thr = ev_.context().node_threshold();
    for (LabelId x = 0; x < n_; ++x) {
      const double mu = ev_.weight(x);
      const double ratio = mu > thr ? rho[x] / mu : 1.0;
      if (ratio == 0.0) continue;
      for (LabelId y = 0; y < n_; ++y) {
        if (y == x) continue;
        const double f = ev_.flux(y, x);
        if (f == 0.0) continue;
        out[x] -= ratio * f;
        out[y] += ratio * f;
      }
    }
  }

 private:
  RateEvaluator ev_;
  std::size_t n_;
};

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                 e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

double composite_simpson(const std::vector<double>& t, const std::vector<double>& f, std::size_t last) {
  // Uniform grid assumed; `last` is the index of the upper limit.
  if (last == 0) return 0.0;
  const double h = (t[last] - t[0]) / static_cast<double>(last);
  if (last == 1) return 0.5 * h * (f[0] + f[1]);
  double sum = 0.0;
  std::size_t simpson_end = last;
  if (last % 2 == 1) simpson_end = last - 3;
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) sum += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
  if (simpson_end != last) {
    const std::size_t i = simpson_end;
    sum += 3.0 * h / 8.0 * (f[i] + 3.0 * f[i + 1] + 3.0 * f[i + 2] + f[i + 3]);
  }
  return sum;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

int thread_id() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

}  // namespace

OracleSolution solve_master_equation(const RateContext& ctx, double t0, double t_end, double grid_step,
                                     double rel_tol) {
  const std::vector<double> grid = make_grid(t0, t_end, grid_step);
  const std::size_t n = ctx.label_count();
  const double abs_tol = 1e-3 * rel_tol * ctx.mass();

  OracleSolution sol;
  sol.method = OracleMethod::MasterOde;
  sol.times = grid;
  std::vector<double> y = distribution(ctx, t0).weights;
  sol.distributions.push_back({t0, y});

  MasterRhs rhs(ctx);
  std::array<std::vector<double>, 7> k;
  for (auto& v : k) v.assign(n, 0.0);
  std::vector<double> tmp(n), y_new(n);

  double t = t0;
  double h_next = std::min(grid[1] - grid[0], 0.05 / (1.0 + ctx.max_frequency()));
  rhs(t, y, k[0]);
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const double target = grid[g];
    while (t < target) {
      double h = h_next;
      bool last_in_cell = false;
      if (t + h >= target) {
        h = target - t;
        last_in_cell = true;
      }
      auto stage = [&](double c, std::initializer_list<std::pair<int, double>> terms, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) {
          double acc = y[i];
          for (const auto& [idx, a] : terms) acc += h * a * k[static_cast<std::size_t>(idx)][i];
          tmp[i] = acc;
        }
        rhs(t + c * h, tmp, out);
      };
      stage(c2, {{0, a21}}, k[1]);
      stage(c3, {{0, a31}, {1, a32}}, k[2]);
      stage(c4, {{0, a41}, {1, a42}, {2, a43}}, k[3]);
      stage(c5, {{0, a51}, {1, a52}, {2, a53}, {3, a54}}, k[4]);
      stage(1.0, {{0, a61}, {1, a62}, {2, a63}, {3, a64}, {4, a65}}, k[5]);
      for (std::size_t i = 0; i < n; ++i) {
        y_new[i] = y[i] + h * (b1 * k[0][i] + b3 * k[2][i] + b4 * k[3][i] + b5 * k[4][i] + b6 * k[5][i]);
      }
      const double t_new = last_in_cell ? target : t + h;
      rhs(t_new, y_new, k[6]);

      double err = 0.0;
      std::size_t worst = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double e = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] + e6 * k[5][i] +
                              e7 * k[6][i]);
        const double scale = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
        const double r = std::abs(e) / scale;
        if (r > err) {
          err = r;
          worst = i;
        }
      }
      if (err <= 1.0) {
        t = t_new;
        y.swap(y_new);
        k[0].swap(k[6]);
        const double grow = err == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(err, -0.2));
        // A step clipped to land on the grid says nothing about the next one.
        h_next = last_in_cell ? std::max(h_next, h * grow) : h * grow;
      } else {
        h_next = h * std::max(0.1, 0.9 * std::pow(err, -0.2));
        if (h_next < 1e-13 * std::max(1.0, std::abs(t))) {
          std::ostringstream os;
          os.precision(17);
          os << "master equation step size underflow at t=" << t << " (label '" << ctx.povm().label(worst) << "')";
          throw IntegrationError(t, ctx.povm().label(worst), os.str());
        }
      }
    }
    sol.distributions.push_back({target, y});
  }
  return sol;
}

PicardIterate solve_integral_equation_picard(const RateContext& ctx, double t0, double t_end,
                                             double grid_step, int n_max,
                                             const SimulationParams& hazard_params, Execution exec) {
  if (n_max < 0) throw ValidationError("n_max", "must be nonnegative");
  const std::vector<double> grid = make_grid(t0, t_end, grid_step);
  const std::size_t K = grid.size() - 1;
  const std::size_t L = ctx.label_count();
  const double h = (t_end - t0) / static_cast<double>(K);
  const double thr = ctx.node_threshold();
  const bool parallel = exec == Execution::Parallel;

  // Per grid point: weights and the flux matrix flux[k][x * L + y] = mu sigma(x|y).
  std::vector<std::vector<double>> mu(K + 1, std::vector<double>(L));
  std::vector<std::vector<double>> flux(K + 1, std::vector<double>(L * L, 0.0));
  // Cell survival factors exp(-Gamma_{t_k, x}(t_{k+1})), zero when infinite.
  std::vector<std::vector<double>> cell_survival(K, std::vector<double>(L, 0.0));

  std::vector<RateEvaluator> evaluators(static_cast<std::size_t>(max_threads()), RateEvaluator(ctx));
  const auto Kp1 = static_cast<long>(K + 1);
#pragma omp parallel for schedule(static) if (parallel)
  for (long kk = 0; kk < Kp1; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    RateEvaluator& ev = evaluators[static_cast<std::size_t>(thread_id())];
    ev.at(grid[k]);
    for (LabelId x = 0; x < L; ++x) mu[k][x] = ev.weight(x);
    for (LabelId y = 0; y < L; ++y) {
      for (LabelId x = 0; x < L; ++x) flux[k][x * L + y] = ev.flux(x, y);
    }
  }
  const auto cells = static_cast<long>(K * L);
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
  for (long c = 0; c < cells; ++c) {
    const auto k = static_cast<std::size_t>(c) / L;
    const auto x = static_cast<std::size_t>(c) % L;
    const Extended g = cumulative_hazard(ctx, grid[k], x, grid[k + 1], hazard_params);
    cell_survival[k][x] = g.is_infinite() ? 0.0 : std::exp(-g.value());
  }

  PicardIterate out;
  out.times = grid;

  // A_0(t_k, x) = mu_t0(x) exp(-Gamma_{t0,x}(t_k)).
  std::vector<std::vector<double>> a(K + 1, std::vector<double>(L));
  for (LabelId x = 0; x < L; ++x) {
    double surv = 1.0;
    for (std::size_t k = 0; k <= K; ++k) {
      if (k > 0) surv *= cell_survival[k - 1][x];
      a[k][x] = mu[0][x] * surv;
    }
  }
  std::vector<DistributionSnapshot> sums(K + 1);
  for (std::size_t k = 0; k <= K; ++k) sums[k] = {grid[k], a[k]};
  out.partial_sums.push_back(sums);

  std::vector<std::vector<double>> g(K + 1, std::vector<double>(L));
  for (int it = 1; it <= n_max; ++it) {
    // g_j(x) = sum_y (A_{n-1}(t_j, y) / mu_j(y)) mu_j(y) sigma_j(x|y): one column per time point.
#pragma omp parallel for schedule(static) if (parallel)
    for (long jj = 0; jj < Kp1; ++jj) {
      const auto j = static_cast<std::size_t>(jj);
      for (LabelId x = 0; x < L; ++x) {
        double s = 0.0;
        for (LabelId y = 0; y < L; ++y) {
          if (y == x || mu[j][y] <= thr) continue;
          s += a[j][y] / mu[j][y] * flux[j][x * L + y];
        }
        g[j][x] = s;
      }
    }
    // A_n(t_k, x) = trapezoid over s in [t0, t_k] of g(s, x) exp(-Gamma_{s,x}(t_k)),
    // accumulated with the running sum R_k = sum_{j<k} g_j exp(-Gamma_{t_j,x}(t_k)).
    double increment = 0.0;
    for (LabelId x = 0; x < L; ++x) {
      double running = 0.0;
      double from_start = 1.0;
      a[0][x] = 0.0;
      for (std::size_t k = 1; k <= K; ++k) {
        const double surv = cell_survival[k - 1][x];
        running = (running + g[k - 1][x]) * surv;
        from_start *= surv;
        const double v = h * (running - 0.5 * g[0][x] * from_start + 0.5 * g[k][x]);
        a[k][x] = std::max(0.0, v);
        increment = std::max(increment, a[k][x]);
      }
    }
    for (std::size_t k = 0; k <= K; ++k) {
      for (LabelId x = 0; x < L; ++x) sums[k].weights[x] += a[k][x];
    }
    out.partial_sums.push_back(sums);
    out.n = it;
    out.last_increment = increment;
    if (increment < 1e-8) {
      out.converged = true;
      break;
    }
  }
  if (n_max == 0) out.converged = false;
  return out;
}

double expected_jump_count(const RateContext& ctx, double t0, double t, const OracleSolution& law) {
  if (law.times.empty() || std::abs(law.times.front() - t0) > 1e-12 * std::max(1.0, std::abs(t0))) {
    throw ValidationError("law", "law grid must start at t0");
  }
  std::size_t last = law.times.size();
  for (std::size_t k = 0; k < law.times.size(); ++k) {
    if (std::abs(law.times[k] - t) <= 1e-9 * std::max(1.0, std::abs(t))) last = k;
  }
  if (last == law.times.size()) throw ValidationError("t", "upper limit is not a grid time of the law");

  RateEvaluator ev(ctx);
  const double thr = ctx.node_threshold();
  std::vector<double> f(last + 1, 0.0);
  for (std::size_t k = 0; k <= last; ++k) {
    ev.at(law.times[k]);
    double s = 0.0;
    for (LabelId x = 0; x < ctx.label_count(); ++x) {
      const double mu = ev.weight(x);
      const double ratio = mu > thr ? law.distributions[k].weights[x] / mu : 1.0;
      if (ratio != 0.0) s += ratio * ev.outflow(x);
    }
    f[k] = s;
  }
  return composite_simpson(law.times, f, last);
}

}  // namespace belljump
