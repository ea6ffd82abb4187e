// Wall-clock comparison of the OpenMP kernels against their serial
// reference paths, with a bitwise check that both produce the same output.

#include <chrono>
#include <cstdio>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "belljump/ensemble.hpp"
#include "belljump/io.hpp"
#include "belljump/models.hpp"
#include "belljump/oracle.hpp"

using namespace belljump;

namespace {

template <class F>
double time_it(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool same_sums(const PicardIterate& a, const PicardIterate& b) {
  if (a.partial_sums.size() != b.partial_sums.size()) return false;
  for (std::size_t n = 0; n < a.partial_sums.size(); ++n) {
    for (std::size_t k = 0; k < a.partial_sums[n].size(); ++k) {
      if (a.partial_sums[n][k].weights != b.partial_sums[n][k].weights) return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel timings"};
  std::string model = "random_hermitian";
  std::uint64_t n = 20000;
  double t_end = 1.0;
  double grid_step = 2.5e-3;
  int picard_terms = 12;
  int threads = 0;
  app.add_option("--model", model, "bundled model name");
  app.add_option("--n", n, "trajectories per ensemble")->check(CLI::PositiveNumber);
  app.add_option("--t-end", t_end, "horizon")->check(CLI::PositiveNumber);
  app.add_option("--grid-step", grid_step, "Picard grid step")->check(CLI::PositiveNumber);
  app.add_option("--picard-terms", picard_terms, "Picard n_max")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "OpenMP workers, 0 for the runtime default")->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);

  const auto spec = bundled_model(model);
  if (!spec) {
    std::fprintf(stderr, "unknown model %s\n", model.c_str());
    return 2;
  }
  if (threads > 0) omp_set_num_threads(threads);
  const RateContext ctx = spec->context();
  std::printf("model %s, %d OpenMP threads available\n", model.c_str(), omp_get_max_threads());

  SimulationParams p;
  p.t_end = t_end;
  p.seed = 1;
  EnsembleOptions o;
  o.checkpoints = {t_end};
  o.compute_oracle = false;
  o.threads = threads;

  std::string serial_json;
  std::string parallel_json;
  o.exec = Execution::Serial;
  const double es = time_it([&] { serial_json = report_to_json(run_ensemble(ctx, p, n, o)).dump(); });
  o.exec = Execution::Parallel;
  const double ep = time_it([&] { parallel_json = report_to_json(run_ensemble(ctx, p, n, o)).dump(); });
  std::printf("ensemble  n=%-8llu serial %8.3f s  parallel %8.3f s  speedup %5.2fx  identical=%s\n",
              static_cast<unsigned long long>(n), es, ep, es / ep, serial_json == parallel_json ? "yes" : "NO");

  PicardIterate ps;
  PicardIterate pp;
  const double qs = time_it([&] {
    ps = solve_integral_equation_picard(ctx, 0.0, t_end, grid_step, picard_terms, {}, Execution::Serial);
  });
  const double qp = time_it([&] {
    pp = solve_integral_equation_picard(ctx, 0.0, t_end, grid_step, picard_terms, {}, Execution::Parallel);
  });
  std::printf("picard    h=%-8g serial %8.3f s  parallel %8.3f s  speedup %5.2fx  identical=%s\n", grid_step, qs,
              qp, qs / qp, same_sums(ps, pp) ? "yes" : "NO");

  return serial_json == parallel_json && same_sums(ps, pp) ? 0 : 1;
}
