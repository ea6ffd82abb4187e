#include "belljump/checks.hpp"
#include "belljump/oracle.hpp"
#include "support.hpp"

using namespace belljump;
using namespace belljump::test;

namespace {

double sup_vs_mu(const RateContext& ctx, const OracleSolution& s) {
  double err = 0.0;
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    const auto mu = distribution(ctx, s.times[k]);
    for (std::size_t x = 0; x < mu.weights.size(); ++x) {
      err = std::max(err, std::abs(mu.weights[x] - s.distributions[k].weights[x]));
    }
  }
  return err;
}

double sup_between(const std::vector<DistributionSnapshot>& a, const std::vector<DistributionSnapshot>& b) {
  REQUIRE(a.size() == b.size());
  double err = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t x = 0; x < a[k].weights.size(); ++x) {
      err = std::max(err, std::abs(a[k].weights[x] - b[k].weights[x]));
    }
  }
  return err;
}

RateContext frozen_context() {
  return basis_model(CMatrix::Zero(3, 3), vec({0.6, 0.0, 0.8})).context();
}

}  // namespace

TEST_CASE("make_grid") {
  const auto g = make_grid(0.0, 1.0, 0.3);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  for (std::size_t k = 1; k < g.size(); ++k) CHECK(g[k] - g[k - 1] <= 0.3);
  CHECK(make_grid(0.0, 3.0, 0.1).size() == 31);
  CHECK_THROWS_AS(make_grid(1.0, 1.0, 0.1), ValidationError);
  CHECK_THROWS_AS(make_grid(0.0, 1.0, 0.0), ValidationError);
}

TEST_CASE("master equation: zero Hamiltonian is constant") {
  const RateContext ctx = frozen_context();
  const auto s = solve_master_equation(ctx, 0.0, 2.0, 0.5);
  CHECK(s.method == OracleMethod::MasterOde);
  for (const auto& d : s.distributions) {
    CHECK(d.weights[0] == doctest::Approx(0.36));
    CHECK(d.weights[1] == 0.0);
    CHECK(d.weights[2] == doctest::Approx(0.64));
  }
}

TEST_CASE("master equation: two-level closed form and mass conservation") {
  const RateContext ctx = two_level().context();
  const auto s = solve_master_equation(ctx, 0.0, 3.0, 0.1);
  REQUIRE(s.times.size() == 31);
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    const double t = s.times[k];
    CHECK(std::abs(s.distributions[k].weights[0] - std::pow(std::cos(t / 2), 2)) <= 1e-7);
    CHECK(std::abs(s.distributions[k].weights[1] - std::pow(std::sin(t / 2), 2)) <= 1e-7);
    CHECK(std::abs(s.distributions[k].total() - 1.0) <= 1e-8);
    for (double w : s.distributions[k].weights) CHECK(w >= 0.0);
  }
}

TEST_CASE("master equation integrates through the two-level node") {
  const RateContext ctx = two_level().context();
  const auto s = solve_master_equation(ctx, 0.0, 2.0 * kPi, 0.05);
  CHECK(sup_vs_mu(ctx, s) <= 1e-6);
}

TEST_CASE("master equation agrees with the quantum distribution on every bundled model") {
  for (const std::string& name : bundled_model_names()) {
    const RateContext ctx = bundled_model(name)->context();
    const auto s = solve_master_equation(ctx, 0.0, 3.0, 0.05);
    INFO(name);
    CHECK(sup_vs_mu(ctx, s) <= 1e-6);
  }
}

TEST_CASE("Picard: zero Hamiltonian") {
  const RateContext ctx = frozen_context();
  const auto p = solve_integral_equation_picard(ctx, 0.0, 1.0, 0.1, 5);
  CHECK(p.converged);
  for (const auto& sums : p.partial_sums) {
    for (const auto& d : sums) {
      CHECK(d.weights[0] == doctest::Approx(0.36));
      CHECK(d.weights[2] == doctest::Approx(0.64));
    }
  }
}

TEST_CASE("Picard: two-level convergence, monotonicity and domination") {
  const RateContext ctx = two_level().context();
  const auto p = solve_integral_equation_picard(ctx, 0.0, kPi / 2, 2.5e-3, 8);
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    const double t = p.times[k];
    CHECK(std::abs(p.final_sums()[k].weights[0] - std::pow(std::cos(t / 2), 2)) <= 1e-5);
    CHECK(std::abs(p.final_sums()[k].weights[1] - std::pow(std::sin(t / 2), 2)) <= 1e-5);
  }
  for (std::size_t n = 1; n < p.partial_sums.size(); ++n) {
    for (std::size_t k = 0; k < p.times.size(); ++k) {
      for (std::size_t x = 0; x < 2; ++x) CHECK(p.partial_sums[n][k].weights[x] >= p.partial_sums[n - 1][k].weights[x]);
    }
  }
  const auto sol = p.as_solution();
  CHECK(sol.method == OracleMethod::Picard);
  CHECK(std::string(to_string(sol.method)) == "PICARD");
  CHECK(std::string(to_string(OracleMethod::MasterOde)) == "MASTER_ODE");
}

TEST_CASE("Picard: trapezoid error shrinks quadratically under step halving") {
  const RateContext ctx = random_hermitian(16, 1).context();
  const auto ms = solve_master_equation(ctx, 0.0, 1.0, 0.01);
  const auto coarse = solve_integral_equation_picard(ctx, 0.0, 1.0, 0.01, 12);
  const auto fine = solve_integral_equation_picard(ctx, 0.0, 1.0, 0.005, 12);
  std::vector<DistributionSnapshot> fine_on_coarse;
  for (std::size_t k = 0; k < fine.times.size(); k += 2) fine_on_coarse.push_back(fine.final_sums()[k]);
  const double e1 = sup_between(coarse.final_sums(), ms.distributions);
  const double e2 = sup_between(fine_on_coarse, ms.distributions);
  CHECK(e2 < e1);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("Picard: bundled models agree with the master equation and stay below mu") {
  for (const std::string& name : bundled_model_names()) {
    INFO(name);
    const RateContext ctx = bundled_model(name)->context();
    const auto ms = solve_master_equation(ctx, 0.0, 1.0, 2.5e-3);
    const auto p = solve_integral_equation_picard(ctx, 0.0, 1.0, 2.5e-3, 12);
    CHECK(p.converged);
    CHECK(sup_between(p.final_sums(), ms.distributions) <= 2e-5);
    double excess = -1.0;
    for (const auto& sums : p.partial_sums) {
      for (std::size_t k = 0; k < p.times.size(); ++k) {
        const auto mu = distribution(ctx, p.times[k]);
        for (std::size_t x = 0; x < mu.weights.size(); ++x) excess = std::max(excess, sums[k].weights[x] - mu.weights[x]);
      }
    }
    CHECK(excess <= 1e-6);
  }
}

TEST_CASE("Picard: parallel and serial execution are bitwise identical") {
  const RateContext ctx = bell_lattice(3, 2, 1.0, 0.5).context();
  const auto a = solve_integral_equation_picard(ctx, 0.0, 1.0, 0.01, 6, {}, Execution::Parallel);
  const auto b = solve_integral_equation_picard(ctx, 0.0, 1.0, 0.01, 6, {}, Execution::Serial);
  REQUIRE(a.partial_sums.size() == b.partial_sums.size());
  for (std::size_t n = 0; n < a.partial_sums.size(); ++n) {
    for (std::size_t k = 0; k < a.times.size(); ++k) CHECK(a.partial_sums[n][k].weights == b.partial_sums[n][k].weights);
  }
}

TEST_CASE("Picard: an exhausted term budget is flagged, not thrown") {
  const RateContext ctx = random_hermitian(16, 1).context();
  const auto p = solve_integral_equation_picard(ctx, 0.0, 3.0, 0.01, 1);
  CHECK_FALSE(p.converged);
  CHECK(p.last_increment > 1e-8);
  CHECK(p.partial_sums.size() == 2);
}

TEST_CASE("expected_jump_count") {
  const RateContext frozen = frozen_context();
  CHECK(expected_jump_count(frozen, 0.0, 1.0, solve_master_equation(frozen, 0.0, 1.0, 0.1)) == 0.0);

  const RateContext ctx = two_level().context();
  const auto law = solve_master_equation(ctx, 0.0, kPi, 1e-3);
  CHECK(std::abs(expected_jump_count(ctx, 0.0, kPi, law) - 1.0) <= 1e-6);
  CHECK_THROWS_AS(expected_jump_count(ctx, 0.0, 1.00005, law), ValidationError);

  for (const std::string& name : bundled_model_names()) {
    const RateContext c = bundled_model(name)->context();
    const auto l = solve_master_equation(c, 0.0, 2.0, 0.01);
    const double ej = expected_jump_count(c, 0.0, 2.0, l);
    const double a2 = check_a2(c, 0.0, 2.0, 0.01).a2_integral;
    CHECK(ej >= 0.0);
    CHECK(ej <= a2 + 1e-9);
  }
}
