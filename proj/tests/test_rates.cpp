#include <unsupported/Eigen/MatrixFunctions>

#include "support.hpp"

using namespace belljump;
using namespace belljump::test;

namespace {

// Independent evaluation for basis-PVM models: psi_t from a dense matrix
// exponential, numerator Im(conj(psi_y) H_yx psi_x).
struct DenseOracle {
  CMatrix h;
  CVector psi0;

  CVector state(double t) const { return (Complex(0.0, -t / 2.0) * h).exp() * psi0; }
  double numerator(double t, Eigen::Index y, Eigen::Index x) const {
    const CVector s = state(t);
    return (std::conj(s[y]) * h(y, x) * s[x]).imag();
  }
  double weight(double t, Eigen::Index x) const { return std::norm(state(t)[x]); }
};

ModelSpec three_cycle() {
  CMatrix h(3, 3);
  h << 0, 1, 1, 1, 0, 1, 1, 1, 0;
  return basis_model(h, vec({0.8, 0.5, Complex(0.0, 0.33)}), "three_cycle");
}

}  // namespace

TEST_CASE("Extended distinguishes INFINITE") {
  CHECK(Extended::finite(2.0).value() == 2.0);
  CHECK(Extended::infinite().is_infinite());
  CHECK_THROWS_AS(Extended::infinite().value(), InternalError);
  CHECK(Extended::infinite() == Extended::infinite());
  CHECK_FALSE(Extended::finite(1.0) == Extended::infinite());
}

TEST_CASE("RateContext validates node_epsilon") {
  const ModelSpec m = two_level();
  CHECK_THROWS_AS(m.context(1e-5), ValidationError);
  CHECK_THROWS_AS(m.context(-1.0), ValidationError);
  CHECK_NOTHROW(m.context(0.0));
  CHECK(m.context().node_threshold() == doctest::Approx(1e-12));
}

TEST_CASE("jump_rate: diagonal H gives no jumps") {
  CMatrix h = CMatrix::Zero(3, 3);
  h(0, 0) = 1.0;
  h(1, 1) = -2.0;
  h(2, 2) = 0.5;
  const RateContext ctx = basis_model(h, vec({0.6, 0.0, 0.8})).context();
  for (double t : {0.0, 0.7, 3.0}) {
    for (LabelId x : {0u, 2u}) {
      for (LabelId y = 0; y < 3; ++y) CHECK(jump_rate(ctx, t, x, y).value() == 0.0);
    }
  }
}

TEST_CASE("jump_rate and total_rate: two-level closed forms") {
  const RateContext ctx = two_level().context();
  CHECK(jump_rate(ctx, kPi / 2, 0, 1).value() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(total_rate(ctx, kPi / 2, 0).value() == doctest::Approx(1.0).epsilon(1e-13));
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> times(0.01, kPi - 0.01);
  for (int i = 0; i < 100; ++i) {
    const double t = times(gen);
    CHECK(std::abs(jump_rate(ctx, t, 0, 1).value() - std::tan(t / 2)) <= 1e-10 * std::max(1.0, std::tan(t / 2)));
    CHECK(jump_rate(ctx, t, 1, 0).value() == 0.0);
    CHECK(jump_rate(ctx, t, 0, 0).value() == 0.0);
    CHECK(jump_rate(ctx, t, 1, 1).value() == 0.0);
  }
}

TEST_CASE("jump_rate is INFINITE for every destination out of a node") {
  const RateContext ctx = two_level().context();
  REQUIRE(distribution(ctx, kPi).weights[0] <= ctx.node_threshold());
  CHECK(jump_rate(ctx, kPi, 0, 1).is_infinite());
  CHECK(jump_rate(ctx, kPi, 0, 0).is_infinite());
  CHECK(total_rate(ctx, kPi, 0).is_infinite());
  CHECK(jump_rate(ctx, kPi, 1, 0).is_finite());
}

TEST_CASE("total_rate: zero Hamiltonian and the flux bound") {
  const RateContext zero = basis_model(CMatrix::Zero(3, 3), vec({1.0, 1.0, 1.0})).context();
  for (LabelId x = 0; x < 3; ++x) CHECK(total_rate(zero, 1.3, x).value() == 0.0);

  const ModelSpec m = random_hermitian(8, 4);
  const RateContext ctx = m.context();
  RateEvaluator ev(ctx);
  for (double t : {0.1, 0.9, 2.2}) {
    ev.at(t);
    const StateVector psi = state_at(ctx, t);
    for (LabelId x = 0; x < 8; ++x) {
      double bound = 0.0;
      for (LabelId y = 0; y < 8; ++y) bound += std::abs(matrix_element(psi, m.pov, y, m.H, x));
      CHECK(total_rate(ctx, t, x).value() <= bound / ev.weight(x) * (1 + 1e-12));
    }
  }
}

TEST_CASE("jump_rate agrees with an independent dense evaluation") {
  const ModelSpec m = random_hermitian(6, 9);
  const RateContext ctx = m.context();
  const DenseOracle oracle{m.H.matrix(), m.psi0.amplitudes()};
  for (double t : {0.25, 1.5, 4.0}) {
    for (Eigen::Index x = 0; x < 6; ++x) {
      for (Eigen::Index y = 0; y < 6; ++y) {
        if (x == y) continue;
        const double want = std::max(0.0, oracle.numerator(t, y, x)) / oracle.weight(t, x);
        const double got = jump_rate(ctx, t, static_cast<LabelId>(x), static_cast<LabelId>(y)).value();
        CHECK(std::abs(got - want) <= 1e-10 * std::max(1.0, want));
      }
    }
  }
}

TEST_CASE("non-projective POVM rates match the dense formula") {
  const ModelSpec m = compressed_povm_model(6, 3, 5);
  REQUIRE_FALSE(m.pov.basis_indices().has_value());
  const RateContext ctx = m.context();
  for (double t : {0.3, 1.7}) {
    const StateVector psi = state_at(ctx, t);
    for (LabelId x = 0; x < m.pov.size(); ++x) {
      const double mu = quantum_weight(psi, m.pov, x);
      if (mu <= ctx.node_threshold()) continue;
      for (LabelId y = 0; y < m.pov.size(); ++y) {
        const CVector py = m.pov.element(y) * psi.amplitudes();
        const CVector px = m.pov.element(x) * psi.amplitudes();
        const double num = py.dot(m.H.matrix() * px).imag();
        const double want = x == y ? 0.0 : std::max(0.0, num) / mu;
        CHECK(std::abs(jump_rate(ctx, t, x, y).value() - want) <= 1e-10 * std::max(1.0, want));
      }
    }
  }
}

TEST_CASE("distribution: point mass, two-level, completeness") {
  const RateContext e0 = basis_model(CMatrix::Identity(3, 3), vec({0.0, 1.0, 0.0})).context();
  const auto d0 = distribution(e0, 0.0);
  CHECK(d0.weights == std::vector<double>{0.0, 1.0, 0.0});

  const RateContext ctx = two_level().context();
  for (double t : {0.0, 0.4, 1.9, 3.0}) {
    const auto d = distribution(ctx, t);
    CHECK(d.t == t);
    CHECK(d.weights[0] == doctest::Approx(std::pow(std::cos(t / 2), 2)).epsilon(1e-13));
    CHECK(d.weights[1] == doctest::Approx(std::pow(std::sin(t / 2), 2)).epsilon(1e-13));
  }
  const RateContext r = compressed_povm_model(10, 6, 1).context();
  for (double t : {0.0, 2.0, 5.0}) CHECK(distribution(r, t).total() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("distribution_derivative: closed form and central differences") {
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 0) = 3.0;
  const RateContext diag = basis_model(h, vec({0.6, 0.8})).context();
  CHECK(distribution_derivative(diag, 0.7, 0) == doctest::Approx(0.0));

  const RateContext ctx = two_level().context();
  CHECK(distribution_derivative(ctx, kPi / 2, 0) == doctest::Approx(-0.5).epsilon(1e-13));
  for (double t : {0.3, 1.1, 2.9}) CHECK(distribution_derivative(ctx, t, 0) == doctest::Approx(-std::sin(t) / 2));

  for (const std::string& name : bundled_model_names()) {
    const RateContext c = bundled_model(name)->context();
    const double hstep = 1e-4;
    for (double t : {0.2, 0.8}) {
      for (LabelId x = 0; x < c.label_count(); ++x) {
        const double fd = (distribution(c, t + hstep).weights[x] - distribution(c, t - hstep).weights[x]) / (2 * hstep);
        CHECK(std::abs(fd - distribution_derivative(c, t, x)) <= 1e-7);
      }
    }
  }
}

TEST_CASE("admissible_set") {
  const RateContext e0 = basis_model(CMatrix::Identity(2, 2), vec({1.0, 0.0})).context();
  CHECK(admissible_set(e0, 0.0) == std::vector<LabelId>{0});
  const RateContext ctx = two_level().context();
  CHECK(admissible_set(ctx, kPi) == std::vector<LabelId>{1});
  const RateContext r = random_hermitian(16, 3).context();
  for (double t : {0.0, 1.0, 10.0}) CHECK_FALSE(admissible_set(r, t).empty());
}

TEST_CASE("destination_distribution") {
  const RateContext ctx = two_level().context();
  const auto p = destination_distribution(ctx, 1.0, 0);
  REQUIRE(p.has_value());
  CHECK((*p)[1] == 1.0);
  CHECK((*p)[0] == 0.0);
  CHECK_FALSE(destination_distribution(ctx, 1.0, 1).has_value());   // zero total rate
  CHECK_FALSE(destination_distribution(ctx, kPi, 0).has_value());   // node

  const ModelSpec m = three_cycle();
  const RateContext c3 = m.context();
  const DenseOracle oracle{m.H.matrix(), m.psi0.amplitudes()};
  bool found = false;
  for (double t = 0.05; t < 6.0 && !found; t += 0.05) {
    for (Eigen::Index x = 0; x < 3 && !found; ++x) {
      std::vector<double> num(3, 0.0);
      int positive = 0;
      for (Eigen::Index y = 0; y < 3; ++y) {
        if (y == x) continue;
        num[static_cast<std::size_t>(y)] = std::max(0.0, oracle.numerator(t, y, x));
        if (num[static_cast<std::size_t>(y)] > 1e-3) ++positive;
      }
      if (positive != 2) continue;
      found = true;
      const double sum = num[0] + num[1] + num[2];
      const auto q = destination_distribution(c3, t, static_cast<LabelId>(x));
      REQUIRE(q.has_value());
      for (std::size_t y = 0; y < 3; ++y) CHECK((*q)[y] == doctest::Approx(num[y] / sum).epsilon(1e-10));
      CHECK((*q)[0] + (*q)[1] + (*q)[2] == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(found);

  // Destinations never carry mass onto labels with zero weight.
  const RateContext lattice = bell_lattice(3, 2, 1.0, 0.5).context();
  for (double t : {0.3, 0.9}) {
    const auto mu = distribution(lattice, t);
    for (LabelId x : admissible_set(lattice, t)) {
      const auto d = destination_distribution(lattice, t, x);
      if (!d) continue;
      for (LabelId y = 0; y < mu.weights.size(); ++y) {
        if (mu.weights[y] <= lattice.node_threshold()) CHECK((*d)[y] == 0.0);
      }
    }
  }
}

TEST_CASE("one-way flow, zero diagonal and rate balance on every bundled model") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> times(0.0, 5.0);
  for (const std::string& name : bundled_model_names()) {
    const RateContext ctx = bundled_model(name)->context();
    RateEvaluator ev(ctx);
    const std::size_t L = ctx.label_count();
    std::uniform_int_distribution<std::size_t> labels(0, L - 1);
    for (int k = 0; k < 50; ++k) {
      const double t = times(gen);
      const LabelId x = labels(gen);
      ev.at(t);
      // Products mu(y) sigma(x|y) come straight from the numerators.
      double gain = 0.0;
      double loss = 0.0;
      for (LabelId y = 0; y < L; ++y) {
        const double a = ev.flow_numerator(x, y);  // Im <psi|P(x) H P(y)|psi>
        gain += std::max(0.0, a);
        loss += std::max(0.0, ev.flow_numerator(y, x));
        if (y != x) CHECK(ev.flux(x, y) * ev.flux(y, x) <= 1e-20);
      }
      CHECK(ev.flux(x, x) == 0.0);
      CHECK(std::abs(ev.weight_derivative(x) - (gain - loss)) <= 1e-9);
      if (!ev.is_node(x)) CHECK(ev.jump_rate(x, x).value() == 0.0);
    }
  }
}
