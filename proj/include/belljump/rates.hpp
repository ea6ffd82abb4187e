#pragma once

// Jump rates of the minimal jump process attached to (H, P, psi0):
//
//   sigma_t(y|x) = [Im <psi_t| P(y) H P(x) |psi_t>]^+ / <psi_t|P(x)|psi_t>
//
// (hbar = 2 so the prefactor 2/hbar is one). A label x with
// mu_t(x) <= node_epsilon * |psi0|^2 is a node at t; every rate out of a
// node is the distinguished value Extended::infinite().

#include <cstddef>
#include <optional>
#include <vector>

#include "belljump/hilbert.hpp"

namespace belljump {

/// Nonnegative real or INFINITE. Never converts implicitly to double;
/// callers branch on is_infinite() before touching the value.
class Extended {
 public:
  static Extended finite(double v) { return Extended(v, false); }
  static Extended infinite() { return Extended(0.0, true); }

  bool is_infinite() const { return infinite_; }
  bool is_finite() const { return !infinite_; }
  /// Throws InternalError when infinite.
  double value() const;

  friend bool operator==(const Extended& a, const Extended& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }

 private:
  Extended(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

struct DistributionSnapshot {
  double t = 0.0;
  std::vector<double> weights;  // indexed by LabelId

  double total() const;
};

/// Immutable bundle of everything the rates depend on.
class RateContext {
 public:
  static constexpr double kDefaultNodeEpsilon = 1e-12;

  RateContext(HermitianOperator H, Povm pov, StateVector psi0,
              double node_epsilon = kDefaultNodeEpsilon);

  const HermitianOperator& hamiltonian() const { return H_; }
  const Povm& povm() const { return pov_; }
  const StateVector& initial_state() const { return psi0_; }
  const SpectralDecomposition& spectrum() const { return spec_; }
  const Propagator& propagator() const { return prop_; }
  double node_epsilon() const { return node_epsilon_; }
  /// |psi0|^2.
  double mass() const { return mass_; }
  /// node_epsilon * |psi0|^2.
  double node_threshold() const { return node_epsilon_ * mass_; }
  std::size_t label_count() const { return pov_.size(); }
  std::size_t dim() const { return pov_.dim(); }
  /// Half the spectral width: the fastest angular frequency in mu_t.
  double max_frequency() const;
  bool has_zero_hamiltonian() const { return zero_H_; }

 private:
  HermitianOperator H_;
  Povm pov_;
  StateVector psi0_;
  double node_epsilon_;
  double mass_;
  SpectralDecomposition spec_;
  Propagator prop_;
  bool zero_H_;
};

/// Scratch space evaluating everything rate-related at one time point.
/// Not thread-safe; give each worker its own.
class RateEvaluator {
 public:
  explicit RateEvaluator(const RateContext& ctx);

  const RateContext& context() const { return *ctx_; }

  /// Moves the evaluator to time t (no-op if already there).
  void at(double t);
  double time() const { return t_; }
  const CVector& state() const { return psi_; }

  double weight(LabelId x);
  bool is_node(LabelId x) { return weight(x) <= ctx_->node_threshold(); }
  /// Im <psi|P(y) H P(x)|psi>.
  double flow_numerator(LabelId y, LabelId x);
  /// [Im <psi|P(y) H P(x)|psi>]^+ = mu_t(x) sigma_t(y|x) away from nodes.
  double flux(LabelId y, LabelId x);
  /// sum_y flux(y, x) = mu_t(x) gamma_x(t), bounded even at nodes.
  double outflow(LabelId x);
  /// Im <psi|P(x) H|psi>.
  double weight_derivative(LabelId x);
  /// sum_y |<psi|P(y) H P(x)|psi>|.
  double absolute_row_sum(LabelId x);

  Extended jump_rate(LabelId x, LabelId y);
  Extended total_rate(LabelId x);

 private:
  const CVector& projected(LabelId x);
  const CVector& h_projected(LabelId x);

  const RateContext* ctx_;
  double t_;
  bool valid_ = false;
  CVector psi_;
  CVector h_psi_;
  bool h_psi_ready_ = false;
  std::vector<CVector> proj_;        // P(x) psi, dense path only
  std::vector<char> proj_ready_;
  std::vector<CVector> h_proj_;      // H P(x) psi, dense path only
  std::vector<char> h_proj_ready_;
  std::vector<double> weights_;
  std::vector<char> weight_ready_;
};

StateVector state_at(const RateContext& ctx, double t);

Extended jump_rate(const RateContext& ctx, double t, LabelId x, LabelId y);
Extended total_rate(const RateContext& ctx, double t, LabelId x);
DistributionSnapshot distribution(const RateContext& ctx, double t);
double distribution_derivative(const RateContext& ctx, double t, LabelId x);
std::vector<LabelId> admissible_set(const RateContext& ctx, double t);

/// p_{t,x}(y) = sigma_t(y|x) / gamma_x(t), restricted to admissible labels.
/// Empty optional is the cemetery signal (total rate zero or INFINITE).
std::optional<std::vector<double>> destination_distribution(const RateContext& ctx, double t,
                                                            LabelId x);

}  // namespace belljump
