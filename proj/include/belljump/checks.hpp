#pragma once

#include <cstddef>

#include "belljump/random.hpp"
#include "belljump/rates.hpp"

namespace belljump {

struct AssumptionReport {
  /// Domain membership holds trivially in finite dimension.
  bool a1_trivially_satisfied = true;
  /// int_{t0}^{t1} sum_{x,y} |<psi_t|P(y) H P(x)|psi_t>| dt.
  double a2_integral = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;
  /// sqrt(tr H^2).
  double hs_norm = 0.0;
  bool hs_bound_ok = true;
  /// max over trials of LHS / RHS in the Hilbert-Schmidt bound.
  double worst_ratio = 0.0;
  std::size_t hs_trials = 0;
  bool povm_valid = true;
};

AssumptionReport check_a2(const RateContext& ctx, double t0, double t1, double grid_step);

struct HsResult {
  bool holds = true;
  double worst_ratio = 0.0;
  double hs_norm = 0.0;
};

/// sum_{x,y} |<psi|P(x) H P(y)|psi>| <= |psi|^2 sqrt(tr H^2) + 1e-9 for
/// `trials` random normalized states.
HsResult check_hs_inequality(const HermitianOperator& H, const Povm& pov, std::size_t trials,
                             RandomStream& rng);

/// Left-hand side of the Hilbert-Schmidt bound for one state.
double hs_lhs(const HermitianOperator& H, const Povm& pov, const CVector& psi);

/// tr C^* P(x) C <= tr C^* C within 1e-10 relative.
bool check_povm_contraction(const CMatrix& C, const Povm& pov, LabelId x);

/// Random normalized state with complex Gaussian amplitudes.
CVector random_state(std::size_t dim, RandomStream& rng);

/// Random complex Gaussian matrix.
CMatrix random_matrix(std::size_t rows, std::size_t cols, RandomStream& rng);

}  // namespace belljump
