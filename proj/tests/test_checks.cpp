#include "belljump/checks.hpp"
#include "support.hpp"

using namespace belljump;
using namespace belljump::test;

TEST_CASE("check_a2: zero Hamiltonian") {
  const RateContext ctx = basis_model(CMatrix::Zero(2, 2), vec({0.6, 0.8})).context();
  const auto r = check_a2(ctx, 0.0, 3.0, 0.01);
  CHECK(r.a2_integral == 0.0);
  CHECK(r.hs_norm == 0.0);
  CHECK(r.a1_trivially_satisfied);
}

TEST_CASE("check_a2: two-level against a brute-force grid") {
  const RateContext ctx = two_level().context();
  // psi_t = (cos(t/2), -i sin(t/2)); only the off-diagonal terms contribute.
  const int n = 100000;
  const double h = kPi / n;
  double brute = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double t = k * h;
    const Complex a(std::cos(t / 2), 0.0);
    const Complex b(0.0, -std::sin(t / 2));
    const double f = std::abs(std::conj(b) * a) + std::abs(std::conj(a) * b);
    brute += (k == 0 || k == n ? 0.5 : 1.0) * f * h;
  }
  const auto r = check_a2(ctx, 0.0, kPi, 0.01);
  CHECK(std::abs(r.a2_integral - brute) <= 1e-7);
  CHECK(r.a2_integral == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(r.t0 == 0.0);
  CHECK(r.t1 == kPi);
}

TEST_CASE("check_a2: additivity and grid halving") {
  for (const std::string& name : bundled_model_names()) {
    INFO(name);
    const RateContext ctx = bundled_model(name)->context();
    const double whole = check_a2(ctx, 0.0, 2.0, 0.005).a2_integral;
    const double left = check_a2(ctx, 0.0, 0.8, 0.005).a2_integral;
    const double right = check_a2(ctx, 0.8, 2.0, 0.005).a2_integral;
    CHECK(whole >= 0.0);
    CHECK(std::abs(left + right - whole) <= 2e-6 * whole);
    const double halved = check_a2(ctx, 0.0, 2.0, 0.0025).a2_integral;
    CHECK(std::abs(halved - whole) <= 1e-6 * whole);
  }
}

TEST_CASE("check_hs_inequality: identity, rank one, zero") {
  RandomStream rng(1, 0);
  for (std::size_t d : {2u, 5u, 9u}) {
    const HermitianOperator id(CMatrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
    const Povm pov = Povm::basis(numbered_labels(d));
    const CVector psi = random_state(d, rng);
    CHECK(hs_lhs(id, pov, psi) == doctest::Approx(1.0).epsilon(1e-12));
    const auto r = check_hs_inequality(id, pov, 50, rng);
    CHECK(r.holds);
    CHECK(r.hs_norm == doctest::Approx(std::sqrt(static_cast<double>(d))));
    CHECK(r.worst_ratio == doctest::Approx(1.0 / std::sqrt(static_cast<double>(d))).epsilon(1e-10));
  }

  std::mt19937_64 gen(4);
  const CVector phi = random_vector(6, gen);
  const HermitianOperator rank_one(phi * phi.adjoint());
  const auto r1 = check_hs_inequality(rank_one, Povm::basis(numbered_labels(6)), 100, rng);
  CHECK(r1.holds);
  CHECK(r1.hs_norm == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r1.worst_ratio <= 1.0);

  const auto r0 = check_hs_inequality(HermitianOperator(CMatrix::Zero(3, 3)), Povm::basis(numbered_labels(3)), 10, rng);
  CHECK(r0.holds);
  CHECK(r0.worst_ratio == 0.0);

  CHECK_THROWS_AS(check_hs_inequality(HermitianOperator(CMatrix::Zero(3, 3)), Povm::basis(numbered_labels(2)), 1, rng),
                  ValidationError);
}

TEST_CASE("check_hs_inequality passes on every bundled model") {
  RandomStream rng(2024, 0);
  for (const std::string& name : bundled_model_names()) {
    INFO(name);
    const ModelSpec m = *bundled_model(name);
    const auto r = check_hs_inequality(m.H, m.pov, 100, rng);
    CHECK(r.holds);
    CHECK(r.worst_ratio <= 1.0);
  }
}

TEST_CASE("check_povm_contraction") {
  RandomStream rng(3, 0);
  const Povm single({"all"}, {CMatrix::Identity(3, 3)});
  const CMatrix c = random_matrix(3, 3, rng);
  CHECK(check_povm_contraction(c, single, 0));
  const double lhs = (c.adjoint() * single.element(0) * c).trace().real();
  CHECK(lhs == doctest::Approx(c.squaredNorm()).epsilon(1e-14));

  const Povm basis = Povm::basis(numbered_labels(4));
  const CMatrix d = random_matrix(4, 4, rng);
  for (LabelId x = 0; x < 4; ++x) {
    const double direct = d.row(static_cast<Eigen::Index>(x)).squaredNorm();
    CHECK((d.adjoint() * basis.element(x) * d).trace().real() == doctest::Approx(direct).epsilon(1e-12));
    CHECK(check_povm_contraction(d, basis, x));
  }
  CHECK(check_povm_contraction(CMatrix::Zero(4, 4), basis, 2));
  CHECK_THROWS_AS(check_povm_contraction(d, basis, 9), ValidationError);
  CHECK_THROWS_AS(check_povm_contraction(CMatrix::Zero(3, 3), basis, 0), ValidationError);
}

TEST_CASE("random_state is normalized and reproducible") {
  RandomStream a(5, 1);
  RandomStream b(5, 1);
  const CVector u = random_state(7, a);
  const CVector v = random_state(7, b);
  CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(max_abs(u - v) == 0.0);
}
