#include "belljump/rates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace belljump {

double Extended::value() const {
  if (infinite_) throw InternalError("attempted to read the value of INFINITE");
  return value_;
}

double DistributionSnapshot::total() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

RateContext::RateContext(HermitianOperator H, Povm pov, StateVector psi0, double node_epsilon)
    : H_(std::move(H)),
      pov_(std::move(pov)),
      psi0_(std::move(psi0)),
      node_epsilon_(node_epsilon),
      mass_(psi0_.squared_norm()),
      spec_(spectral_decompose(H_)),
      prop_(spec_, psi0_),
      zero_H_(H_.max_abs() == 0.0) {
  if (!(node_epsilon_ >= 0.0 && node_epsilon_ <= 1e-6)) {
    throw ValidationError("node_epsilon", "must lie in [0, 1e-6]");
  }
  if (H_.dim() != pov_.dim()) throw ValidationError("povm", "POVM dimension differs from the Hamiltonian");
  if (psi0_.dim() != H_.dim()) throw ValidationError("psi0", "state dimension differs from the Hamiltonian");
  if (mass_ == 0.0) throw ValidationError("psi0", "initial state is zero");
}

double RateContext::max_frequency() const {
  return 0.5 * (spec_.eigenvalues.maxCoeff() - spec_.eigenvalues.minCoeff());
}

RateEvaluator::RateEvaluator(const RateContext& ctx)
    : ctx_(&ctx),
      t_(0.0),
      proj_(ctx.label_count()),
      proj_ready_(ctx.label_count(), 0),
      h_proj_(ctx.label_count()),
      h_proj_ready_(ctx.label_count(), 0),
      weights_(ctx.label_count(), 0.0),
      weight_ready_(ctx.label_count(), 0) {}

void RateEvaluator::at(double t) {
  if (valid_ && t == t_) return;
  t_ = t;
  valid_ = true;
  ctx_->propagator().state_at(t, psi_);
  h_psi_ready_ = false;
  std::fill(proj_ready_.begin(), proj_ready_.end(), 0);
  std::fill(h_proj_ready_.begin(), h_proj_ready_.end(), 0);
  std::fill(weight_ready_.begin(), weight_ready_.end(), 0);
}

const CVector& RateEvaluator::projected(LabelId x) {
  if (!proj_ready_[x]) {
    proj_[x].noalias() = ctx_->povm().element(x) * psi_;
    proj_ready_[x] = 1;
  }
  return proj_[x];
}

const CVector& RateEvaluator::h_projected(LabelId x) {
  if (!h_proj_ready_[x]) {
    h_proj_[x].noalias() = ctx_->hamiltonian().matrix() * projected(x);
    h_proj_ready_[x] = 1;
  }
  return h_proj_[x];
}

double RateEvaluator::weight(LabelId x) {
  if (weight_ready_[x]) return weights_[x];
  double w;
  if (const auto& b = ctx_->povm().basis_indices()) {
    w = std::norm(psi_[static_cast<Eigen::Index>((*b)[x])]);
  } else {
    const Complex z = psi_.dot(projected(x));
    const double scale = std::max(1.0, ctx_->mass());
    if (z.real() < -1e-12 * scale) {
      throw ValidationError(ctx_->povm().label(x), "negative quantum weight; the POVM element is not positive");
    }
    w = std::max(0.0, z.real());
  }
  weights_[x] = w;
  weight_ready_[x] = 1;
  return w;
}

double RateEvaluator::flow_numerator(LabelId y, LabelId x) {
  if (const auto& b = ctx_->povm().basis_indices()) {
    const auto by = static_cast<Eigen::Index>((*b)[y]);
    const auto bx = static_cast<Eigen::Index>((*b)[x]);
    return (std::conj(psi_[by]) * ctx_->hamiltonian().matrix()(by, bx) * psi_[bx]).imag();
  }
  return projected(y).dot(h_projected(x)).imag();
}

double RateEvaluator::flux(LabelId y, LabelId x) {
  if (x == y) return 0.0;
  return std::max(0.0, flow_numerator(y, x));
}

double RateEvaluator::outflow(LabelId x) {
  double sum = 0.0;
  const std::size_t n = ctx_->label_count();
  if (const auto& b = ctx_->povm().basis_indices()) {
    const auto bx = static_cast<Eigen::Index>((*b)[x]);
    const Complex ax = psi_[bx];
    const auto col = ctx_->hamiltonian().matrix().col(bx);
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x) continue;
      const auto by = static_cast<Eigen::Index>((*b)[y]);
      const double v = (std::conj(psi_[by]) * col[by] * ax).imag();
      if (v > 0.0) sum += v;
    }
    return sum;
  }
  for (std::size_t y = 0; y < n; ++y) sum += flux(y, x);
  return sum;
}

double RateEvaluator::weight_derivative(LabelId x) {
  if (!h_psi_ready_) {
    h_psi_.noalias() = ctx_->hamiltonian().matrix() * psi_;
    h_psi_ready_ = true;
  }
  if (const auto& b = ctx_->povm().basis_indices()) {
    const auto bx = static_cast<Eigen::Index>((*b)[x]);
    return (std::conj(psi_[bx]) * h_psi_[bx]).imag();
  }
  return projected(x).dot(h_psi_).imag();
}

double RateEvaluator::absolute_row_sum(LabelId x) {
  double sum = 0.0;
  const std::size_t n = ctx_->label_count();
  if (const auto& b = ctx_->povm().basis_indices()) {
    const auto bx = static_cast<Eigen::Index>((*b)[x]);
    for (std::size_t y = 0; y < n; ++y) {
      const auto by = static_cast<Eigen::Index>((*b)[y]);
      sum += std::abs(std::conj(psi_[by]) * ctx_->hamiltonian().matrix()(by, bx) * psi_[bx]);
    }
    return sum;
  }
  const CVector& hx = h_projected(x);
  for (std::size_t y = 0; y < n; ++y) sum += std::abs(projected(y).dot(hx));
  return sum;
}

Extended RateEvaluator::jump_rate(LabelId x, LabelId y) {
  const double w = weight(x);
  if (w <= ctx_->node_threshold()) return Extended::infinite();
  if (x == y) return Extended::finite(0.0);
  return Extended::finite(flux(y, x) / w);
}

Extended RateEvaluator::total_rate(LabelId x) {
  const double w = weight(x);
  if (w <= ctx_->node_threshold()) return Extended::infinite();
  return Extended::finite(outflow(x) / w);
}

namespace {

void check_label(const RateContext& ctx, LabelId x) {
  if (x >= ctx.label_count()) throw ValidationError("label", "label index out of range");
}

}  // namespace

StateVector state_at(const RateContext& ctx, double t) {
  return propagate(ctx.initial_state(), ctx.spectrum(), t);
}

Extended jump_rate(const RateContext& ctx, double t, LabelId x, LabelId y) {
  check_label(ctx, x);
  check_label(ctx, y);
  RateEvaluator ev(ctx);
  ev.at(t);
  return ev.jump_rate(x, y);
}

Extended total_rate(const RateContext& ctx, double t, LabelId x) {
  check_label(ctx, x);
  RateEvaluator ev(ctx);
  ev.at(t);
  return ev.total_rate(x);
}

DistributionSnapshot distribution(const RateContext& ctx, double t) {
  RateEvaluator ev(ctx);
  ev.at(t);
  DistributionSnapshot out{t, std::vector<double>(ctx.label_count())};
  for (LabelId x = 0; x < ctx.label_count(); ++x) out.weights[x] = ev.weight(x);
  return out;
}

double distribution_derivative(const RateContext& ctx, double t, LabelId x) {
  check_label(ctx, x);
  RateEvaluator ev(ctx);
  ev.at(t);
  return ev.weight_derivative(x);
}

std::vector<LabelId> admissible_set(const RateContext& ctx, double t) {
  RateEvaluator ev(ctx);
  ev.at(t);
  std::vector<LabelId> out;
  for (LabelId x = 0; x < ctx.label_count(); ++x) {
    if (!ev.is_node(x)) out.push_back(x);
  }
  return out;
}

std::optional<std::vector<double>> destination_distribution(const RateContext& ctx, double t,
                                                            LabelId x) {
  check_label(ctx, x);
  RateEvaluator ev(ctx);
  ev.at(t);
  if (ev.is_node(x)) return std::nullopt;
  std::vector<double> p(ctx.label_count(), 0.0);
  double total = 0.0;
  for (LabelId y = 0; y < ctx.label_count(); ++y) {
    if (y == x || ev.is_node(y)) continue;
    p[y] = ev.flux(y, x);
    total += p[y];
  }
  if (!(total > 0.0)) return std::nullopt;
  for (double& v : p) v /= total;
  return p;
}

}  // namespace belljump
