#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "belljump/models.hpp"

namespace belljump::test {

inline constexpr double kPi = std::numbers::pi;

inline CMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  CMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline CVector vec(std::initializer_list<Complex> v) {
  CVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (Complex z : v) out[i++] = z;
  return out;
}

inline std::vector<std::string> numbered_labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

/// Basis-PVM model from a matrix and initial amplitudes (normalized here).
inline ModelSpec basis_model(const CMatrix& h, CVector psi, std::string name = "test") {
  psi /= psi.norm();
  return ModelSpec{std::move(name), HermitianOperator(h), Povm::basis(numbered_labels(static_cast<std::size_t>(h.rows()))),
                   StateVector(psi), {}};
}

inline CMatrix random_hermitian_matrix(std::size_t dim, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  CMatrix a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = Complex(g(gen), g(gen));
  return (a + a.adjoint()) / 2.0;
}

inline CVector random_vector(std::size_t dim, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  CVector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = Complex(g(gen), g(gen));
  return v / v.norm();
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace belljump::test
