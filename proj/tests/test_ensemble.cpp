#include "belljump/ensemble.hpp"
#include "belljump/io.hpp"
#include "support.hpp"

using namespace belljump;
using namespace belljump::test;

namespace {

SimulationParams horizon(double t_end, std::uint64_t seed) {
  SimulationParams p;
  p.t_end = t_end;
  p.seed = seed;
  return p;
}

EnsembleOptions at(std::vector<double> checkpoints) {
  EnsembleOptions o;
  o.checkpoints = std::move(checkpoints);
  return o;
}

}  // namespace

TEST_CASE("tv_distance") {
  const DistributionSnapshot p{0.0, {0.5, 0.5}};
  const DistributionSnapshot q{0.0, {1.0, 0.0}};
  const DistributionSnapshot r{0.0, {0.0, 1.0}};
  CHECK(tv_distance(p, p) == 0.0);
  CHECK(tv_distance(q, r) == 1.0);
  CHECK(tv_distance(p, q) == doctest::Approx(0.5));
  CHECK(tv_distance(DistributionSnapshot{0.0, {2.0, 2.0}}, q) == doctest::Approx(0.5));
  CHECK_THROWS_AS(tv_distance(p, DistributionSnapshot{0.0, {1.0}}), ValidationError);
  CHECK_THROWS_AS(tv_distance(p, DistributionSnapshot{0.0, {0.0, 0.0}}), ValidationError);
}

TEST_CASE("ks statistics") {
  CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(ks_two_sample({1, 2}, {3, 4}) == 1.0);
  CHECK(ks_two_sample({1, 3}, {2, 4}) == doctest::Approx(0.5));
  CHECK(ks_one_sample({0.25, 0.75}, [](double u) { return u; }) == doctest::Approx(0.25));
  CHECK_THROWS_AS(ks_two_sample({}, {1.0}), ValidationError);
}

TEST_CASE("jump_count_statistics") {
  const RateContext frozen = basis_model(CMatrix::Zero(2, 2), vec({0.6, 0.8})).context();
  EnsembleOptions o = at({1.0});
  o.keep_paths = true;
  const auto r0 = run_ensemble(frozen, horizon(1.0, 1), 100, o);
  const auto s0 = jump_count_statistics(r0.paths, 1.0);
  CHECK(s0.mean == 0.0);
  CHECK(s0.standard_error == 0.0);
  CHECK(s0.max == 0);

  const RateContext ctx = two_level().context();
  const auto r = run_ensemble(ctx, horizon(kPi, 2), 20000, o);
  REQUIRE(r.paths.size() == 20000);
  const auto s = jump_count_statistics(r.paths, kPi);
  CHECK(std::abs(s.mean - 1.0) <= 3.0 * s.standard_error + 1e-12);
  CHECK(s.max == 1);
  CHECK(s.mean == r.mean_jumps);
  const auto half = jump_count_statistics(r.paths, kPi / 2);
  CHECK(half.mean == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("run_ensemble: frozen dynamics reproduce the initial law") {
  const RateContext ctx = basis_model(CMatrix::Zero(3, 3), vec({0.6, 0.0, 0.8})).context();
  const auto r = run_ensemble(ctx, horizon(1.0, 3), 40000, at({0.0, 0.5, 1.0}));
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(r.empirical[c].weights == r.empirical[0].weights);
    CHECK(r.tv_distance[c] <= 4.0 / std::sqrt(40000.0));
    CHECK(r.empirical[c].weights[1] == 0.0);
  }
  CHECK(r.mean_jumps == 0.0);
  REQUIRE(r.expected_jumps.has_value());
  CHECK(*r.expected_jumps == 0.0);
}

TEST_CASE("run_ensemble: two-level law at pi/2") {
  const RateContext ctx = two_level().context();
  const auto r = run_ensemble(ctx, horizon(2.0, 11), 100000, at({kPi / 2}));
  CHECK(r.empirical[0].weights[0] == doctest::Approx(0.5).epsilon(0.02));
  CHECK(r.tv_distance[0] < 0.01);
  CHECK(r.explosion_count == 0);
  CHECK(r.cemetery_count == 0);
  CHECK(r.envelope_violations[0] == 0);
}

TEST_CASE("run_ensemble: equivariance envelopes and node avoidance on bundled models") {
  const std::uint64_t n = 10000;
  for (const std::string& name : bundled_model_names()) {
    INFO(name);
    const RateContext ctx = bundled_model(name)->context();
    const auto r = run_ensemble(ctx, horizon(2.0, 5), n, at({0.4, 0.8, 1.2, 1.6, 2.0}));
    for (std::size_t c = 0; c < r.checkpoints.size(); ++c) {
      CHECK(r.tv_distance[c] >= 0.0);
      CHECK(r.tv_distance[c] <= 4.0 / std::sqrt(static_cast<double>(n)));
      CHECK(r.envelope_violations[c] == 0);
    }
    CHECK(r.explosion_count == 0);
    CHECK(r.cemetery_count == 0);
    CHECK(r.node_occupancy == 0);
    CHECK(r.min_weight_visited > ctx.node_threshold());
    CHECK(r.max_jumps_observed < 10000);
    REQUIRE(r.expected_jumps.has_value());
    CHECK(std::abs(r.mean_jumps - *r.expected_jumps) <= 4.0 * r.jumps_standard_error + 1e-6);
  }
}

TEST_CASE("run_ensemble: reports do not depend on threads, blocks or execution mode") {
  const RateContext ctx = random_hermitian(16, 1).context();
  const SimulationParams p = horizon(1.0, 9);
  EnsembleOptions o = at({0.5, 1.0});
  o.threads = 1;
  const std::string base = report_to_json(run_ensemble(ctx, p, 3000, o)).dump();
  o.threads = 3;
  o.block_size = 257;
  CHECK(report_to_json(run_ensemble(ctx, p, 3000, o)).dump() == base);
  o.exec = Execution::Serial;
  CHECK(report_to_json(run_ensemble(ctx, p, 3000, o)).dump() == base);
  SimulationParams other = p;
  other.seed = 10;
  CHECK(report_to_json(run_ensemble(ctx, other, 3000, o)).dump() != base);
}

TEST_CASE("run_ensemble: sink sees every trajectory once, in index order") {
  const RateContext ctx = bell_lattice(3, 2, 1.0, 0.5).context();
  EnsembleOptions o = at({1.0});
  o.block_size = 64;
  o.threads = 2;
  std::vector<std::uint64_t> seen;
  run_ensemble(ctx, horizon(1.0, 1), 500, o, [&](std::uint64_t i, const Trajectory& t) {
    seen.push_back(i);
    CHECK_FALSE(t.events.empty());
  });
  REQUIRE(seen.size() == 500);
  for (std::uint64_t i = 0; i < 500; ++i) CHECK(seen[i] == i);
}

TEST_CASE("run_ensemble: trajectory i equals a standalone simulation with index i") {
  const RateContext ctx = compressed_povm_model(8, 4, 1).context();
  SimulationParams p = horizon(1.5, 21);
  EnsembleOptions o = at({1.5});
  o.keep_paths = true;
  const auto r = run_ensemble(ctx, p, 50, o);
  for (std::uint64_t i = 0; i < 50; ++i) {
    p.trajectory_index = i;
    const Trajectory t = simulate_trajectory(ctx, p);
    REQUIRE(t.events.size() == r.paths[i].events.size());
    for (std::size_t k = 0; k < t.events.size(); ++k) {
      CHECK(t.events[k].time == r.paths[i].events[k].time);
      CHECK(t.events[k].label == r.paths[i].events[k].label);
    }
  }
}

TEST_CASE("run_ensemble: invalid input") {
  const RateContext ctx = two_level().context();
  CHECK_THROWS_AS(run_ensemble(ctx, horizon(1.0, 1), 0, at({0.5})), ValidationError);
  CHECK_THROWS_AS(run_ensemble(ctx, horizon(1.0, 1), 10, at({1.5})), ValidationError);
}

TEST_CASE("run_ensemble: exhausted jump budgets are counted") {
  const RateContext ctx = random_hermitian(16, 1).context();
  SimulationParams p = horizon(20.0, 1);
  p.max_jumps = 1;
  EnsembleOptions o = at({20.0});
  o.compute_oracle = false;
  const auto r = run_ensemble(ctx, p, 200, o);
  CHECK(r.explosion_count > 0);
  CHECK_FALSE(r.diagnostics.empty());
  CHECK_FALSE(r.expected_jumps.has_value());
}
