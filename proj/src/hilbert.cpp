#include "belljump/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace belljump {

namespace {

std::string entry_path(const std::string& name, Eigen::Index i, Eigen::Index j) {
  std::ostringstream os;
  os << name << "(" << i << "," << j << ")";
  return os.str();
}

struct Violation {
  double value = 0.0;
  Eigen::Index row = 0;
  Eigen::Index col = 0;
};

Violation hermiticity_violation(const CMatrix& m) {
  Violation worst;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i; j < m.cols(); ++j) {
      const double d = std::abs(m(i, j) - std::conj(m(j, i)));
      if (d > worst.value) worst = {d, i, j};
    }
  }
  return worst;
}

double max_entry(const CMatrix& m) {
  double out = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) out = std::max(out, std::abs(m.data()[i]));
  return out;
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) { return max_entry(a - b); }

}  // namespace

StateVector::StateVector(CVector amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.size() == 0) throw ValidationError("psi0", "state vector must have positive dimension");
  for (Eigen::Index i = 0; i < amps_.size(); ++i) {
    if (!std::isfinite(amps_[i].real()) || !std::isfinite(amps_[i].imag())) {
      throw ValidationError("psi0[" + std::to_string(i) + "]", "amplitude is not finite");
    }
  }
}

void StateVector::require_normalized(const std::string& path) const {
  const double n = norm();
  if (std::abs(n - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "state is not normalized: norm = " << n;
    throw ValidationError(path, os.str());
  }
}

HermitianOperator::HermitianOperator(CMatrix entries) : m_(std::move(entries)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols()) {
    throw ValidationError("hamiltonian", "operator must be a non-empty square matrix");
  }
  for (Eigen::Index i = 0; i < m_.size(); ++i) {
    const Complex z = m_.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw ValidationError("hamiltonian", "operator has non-finite entries");
    }
  }
  const Violation v = hermiticity_violation(m_);
  if (v.value > 1e-12 * max_entry(m_)) {
    std::ostringstream os;
    os.precision(17);
    os << "operator is not Hermitian: |H(i,j) - conj(H(j,i))| = " << v.value;
    throw ValidationError(entry_path("hamiltonian", v.row, v.col), os.str());
  }
}

double HermitianOperator::max_abs() const { return max_entry(m_); }

Povm::Povm(std::vector<std::string> labels, std::vector<CMatrix> elements)
    : labels_(std::move(labels)), elements_(std::move(elements)) {
  if (labels_.empty()) throw ValidationError("povm", "POVM needs at least one element");
  if (labels_.size() != elements_.size()) {
    throw ValidationError("povm", "label count differs from element count");
  }
  dim_ = static_cast<std::size_t>(elements_.front().rows());
  if (dim_ == 0) throw ValidationError("povm[0]", "element has zero dimension");

  std::set<std::string> seen;
  CMatrix sum = CMatrix::Zero(dim_, dim_);
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    const std::string path = "povm[" + std::to_string(k) + "]";
    if (!seen.insert(labels_[k]).second) {
      throw ValidationError(path, "duplicate label '" + labels_[k] + "'");
    }
    const CMatrix& e = elements_[k];
    if (static_cast<std::size_t>(e.rows()) != dim_ || static_cast<std::size_t>(e.cols()) != dim_) {
      throw ValidationError(path, "element dimension mismatch");
    }
    const Violation v = hermiticity_violation(e);
    if (v.value > 1e-12) {
      throw ValidationError(entry_path(path, v.row, v.col), "element is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(e, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) {
      std::ostringstream os;
      os.precision(17);
      os << "element is not positive semidefinite: smallest eigenvalue " << es.eigenvalues().minCoeff();
      throw ValidationError(path, os.str());
    }
    sum += e;
  }
  const CMatrix defect = sum - CMatrix::Identity(dim_, dim_);
  Eigen::Index bi = 0;
  Eigen::Index bj = 0;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < defect.rows(); ++i) {
    for (Eigen::Index j = 0; j < defect.cols(); ++j) {
      if (std::abs(defect(i, j)) > worst) {
        worst = std::abs(defect(i, j));
        bi = i;
        bj = j;
      }
    }
  }
  if (worst > 1e-10) {
    std::ostringstream os;
    os.precision(17);
    os << "elements do not sum to the identity: deviation " << worst;
    throw ValidationError(entry_path("povm_sum", bi, bj), os.str());
  }

  // Detect the computational-basis PVM.
  std::vector<std::size_t> idx;
  std::set<std::size_t> used;
  for (const CMatrix& e : elements_) {
    std::optional<std::size_t> hit;
    bool ok = true;
    for (Eigen::Index i = 0; i < e.rows() && ok; ++i) {
      for (Eigen::Index j = 0; j < e.cols() && ok; ++j) {
        const Complex z = e(i, j);
        if (i == j && z == Complex(1.0, 0.0)) {
          if (hit) ok = false;
          hit = static_cast<std::size_t>(i);
        } else if (z != Complex(0.0, 0.0)) {
          ok = false;
        }
      }
    }
    if (!ok || !hit || !used.insert(*hit).second) {
      idx.clear();
      break;
    }
    idx.push_back(*hit);
  }
  if (idx.size() == elements_.size()) basis_ = std::move(idx);
}

Povm Povm::basis(const std::vector<std::string>& labels) {
  const std::size_t d = labels.size();
  std::vector<CMatrix> elements;
  elements.reserve(d);
  for (std::size_t k = 0; k < d; ++k) {
    CMatrix e = CMatrix::Zero(d, d);
    e(k, k) = 1.0;
    elements.push_back(std::move(e));
  }
  return Povm(labels, std::move(elements));
}

LabelId Povm::index_of(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw ValidationError("label", "unknown label '" + label + "'");
  return static_cast<LabelId>(it - labels_.begin());
}

bool Povm::is_projective(double tol) const {
  for (const CMatrix& e : elements_) {
    if (max_abs_diff(e * e, e) > tol) return false;
  }
  return true;
}

SpectralDecomposition spectral_decompose(const HermitianOperator& H) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H.matrix());
  if (es.info() != Eigen::Success) throw InternalError("Hermitian eigensolver did not converge");
  SpectralDecomposition out{es.eigenvalues(), es.eigenvectors()};

  const double scale = std::max(1.0, out.eigenvalues.cwiseAbs().maxCoeff());
  const CMatrix& U = out.eigenvectors;
  const CMatrix rebuilt = U * out.eigenvalues.cast<Complex>().asDiagonal() * U.adjoint();
  if (max_abs_diff(rebuilt, H.matrix()) > 1e-10 * scale ||
      max_abs_diff(U.adjoint() * U, CMatrix::Identity(U.rows(), U.cols())) > 1e-10) {
    throw InternalError("spectral decomposition failed its reconstruction check");
  }
  return out;
}

Propagator::Propagator(const SpectralDecomposition& spec, const StateVector& psi0)
    : U_(spec.eigenvectors),
      half_eigenvalues_(0.5 * spec.eigenvalues),
      coeffs_(spec.eigenvectors.adjoint() * psi0.amplitudes()) {
  if (spec.dim() != psi0.dim()) throw ValidationError("psi0", "dimension does not match the Hamiltonian");
}

void Propagator::state_at(double t, CVector& out) const {
  const Eigen::Index d = coeffs_.size();
  CVector phased(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double phase = -half_eigenvalues_[k] * t;
    phased[k] = coeffs_[k] * Complex(std::cos(phase), std::sin(phase));
  }
  out.noalias() = U_ * phased;
}

StateVector propagate(const StateVector& psi0, const SpectralDecomposition& spec, double t) {
  if (psi0.dim() != spec.dim()) throw ValidationError("psi0", "dimension does not match the Hamiltonian");
  if (t == 0.0) return psi0;
  CVector out;
  Propagator(spec, psi0).state_at(t, out);
  return StateVector(std::move(out));
}

double quantum_weight(const StateVector& psi, const Povm& pov, LabelId x) {
  if (x >= pov.size()) throw ValidationError("label", "label index out of range");
  if (psi.dim() != pov.dim()) throw ValidationError("psi", "dimension does not match the POVM");
  const CVector& a = psi.amplitudes();
  const Complex z = a.dot(pov.element(x) * a);
  const double scale = std::max(1.0, psi.squared_norm());
  if (std::abs(z.imag()) > 1e-12 * scale) {
    throw InternalError("quantum weight has a non-negligible imaginary part");
  }
  if (z.real() < -1e-12 * scale) {
    throw ValidationError(pov.label(x), "negative quantum weight; the POVM element is not positive");
  }
  return std::max(0.0, z.real());
}

double quantum_weight(const StateVector& psi, const Povm& pov, const std::string& x) {
  return quantum_weight(psi, pov, pov.index_of(x));
}

Complex matrix_element(const StateVector& psi, const Povm& pov, LabelId y,
                       const HermitianOperator& H, LabelId x) {
  if (x >= pov.size() || y >= pov.size()) throw ValidationError("label", "label index out of range");
  if (psi.dim() != pov.dim() || H.dim() != pov.dim()) {
    throw ValidationError("psi", "dimension mismatch between state, POVM and Hamiltonian");
  }
  const CVector& a = psi.amplitudes();
  const CVector py = pov.element(y) * a;
  const CVector px = pov.element(x) * a;
  return py.dot(H.matrix() * px);
}

Complex matrix_element(const StateVector& psi, const Povm& pov, const std::string& y,
                       const HermitianOperator& H, const std::string& x) {
  return matrix_element(psi, pov, pov.index_of(y), H, pov.index_of(x));
}

Povm povm_from_compression(const Povm& pvm, const CMatrix& isometry) {
  if (static_cast<std::size_t>(isometry.rows()) != pvm.dim() || isometry.cols() == 0 ||
      isometry.cols() > isometry.rows()) {
    throw ValidationError("isometry", "isometry must be dim_big x dim_small with dim_small <= dim_big");
  }
  const CMatrix gram = isometry.adjoint() * isometry;
  if (max_abs_diff(gram, CMatrix::Identity(gram.rows(), gram.cols())) > 1e-10) {
    throw ValidationError("isometry", "columns are not orthonormal");
  }
  std::vector<CMatrix> elements;
  elements.reserve(pvm.size());
  for (const CMatrix& e : pvm.elements()) {
    CMatrix c = isometry.adjoint() * e * isometry;
    // Remove rounding asymmetry so the Hermiticity check is exact.
    c = 0.5 * (c + c.adjoint()).eval();
    elements.push_back(std::move(c));
  }
  return Povm(pvm.labels(), std::move(elements));
}

}  // namespace belljump
