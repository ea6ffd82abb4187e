#pragma once

// Finite-dimensional quantum kernel: state vectors, Hermitian operators,
// their spectral decomposition, exact unitary propagation and POVM algebra.
//
// Time is measured in units with hbar = 2, so that
//   psi(t) = exp(-i H t / 2) psi(0).

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "belljump/errors.hpp"

namespace belljump {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Index of a configuration label inside a Povm.
using LabelId = std::size_t;

class StateVector {
 public:
  explicit StateVector(CVector amplitudes);

  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  const CVector& amplitudes() const { return amps_; }
  double norm() const { return amps_.norm(); }
  double squared_norm() const { return amps_.squaredNorm(); }

  /// Throws unless |norm - 1| <= 1e-12.
  void require_normalized(const std::string& path = "psi0") const;

 private:
  CVector amps_;
};

class HermitianOperator {
 public:
  /// Validates max|H_ij - conj(H_ji)| <= 1e-12 * max|H_ij|.
  explicit HermitianOperator(CMatrix entries);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  double max_abs() const;

 private:
  CMatrix m_;
};

struct SpectralDecomposition {
  RVector eigenvalues;   // ascending
  CMatrix eigenvectors;  // columns, unitary

  std::size_t dim() const { return static_cast<std::size_t>(eigenvalues.size()); }
};

/// A finite family of positive semidefinite operators summing to identity,
/// indexed by opaque configuration labels.
class Povm {
 public:
  Povm(std::vector<std::string> labels, std::vector<CMatrix> elements);

  /// The projection-valued measure onto the computational basis.
  static Povm basis(const std::vector<std::string>& labels);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(LabelId x) const { return labels_.at(x); }
  const CMatrix& element(LabelId x) const { return elements_.at(x); }
  const std::vector<CMatrix>& elements() const { return elements_; }

  /// Throws ValidationError for a label the POVM does not know.
  LabelId index_of(const std::string& label) const;

  /// If every element is |e_k><e_k| for distinct k, the basis index per
  /// label; rates code uses this for an O(dim) fast path.
  const std::optional<std::vector<std::size_t>>& basis_indices() const { return basis_; }

  bool is_projective(double tol = 1e-10) const;

 private:
  std::vector<std::string> labels_;
  std::vector<CMatrix> elements_;
  std::size_t dim_ = 0;
  std::optional<std::vector<std::size_t>> basis_;
};

SpectralDecomposition spectral_decompose(const HermitianOperator& H);

/// U diag(exp(-i lambda_k t / 2)) U^* psi0.
StateVector propagate(const StateVector& psi0, const SpectralDecomposition& spec, double t);

/// Re <psi|P(x)|psi>, clamped at zero for rounding-level negatives.
double quantum_weight(const StateVector& psi, const Povm& pov, LabelId x);
double quantum_weight(const StateVector& psi, const Povm& pov, const std::string& x);

/// <psi| P(y) H P(x) |psi>, evaluated as (P(y) psi)^* H (P(x) psi).
Complex matrix_element(const StateVector& psi, const Povm& pov, LabelId y,
                       const HermitianOperator& H, LabelId x);
Complex matrix_element(const StateVector& psi, const Povm& pov, const std::string& y,
                       const HermitianOperator& H, const std::string& x);

/// Compress a POVM on a big space to the range of an isometry V
/// (dim_big x dim_small): elements V^* P0(x) V.
Povm povm_from_compression(const Povm& pvm, const CMatrix& isometry);

/// Repeated propagation from a fixed initial state. Caches U^* psi0 so each
/// evaluation costs one dense matrix-vector product.
class Propagator {
 public:
  Propagator(const SpectralDecomposition& spec, const StateVector& psi0);

  std::size_t dim() const { return static_cast<std::size_t>(coeffs_.size()); }

  /// Writes psi(t) into `out` (resized as needed).
  void state_at(double t, CVector& out) const;

 private:
  CMatrix U_;
  RVector half_eigenvalues_;
  CVector coeffs_;
};

}  // namespace belljump
