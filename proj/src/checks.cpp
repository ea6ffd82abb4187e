#include "belljump/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "belljump/oracle.hpp"

namespace belljump {

CVector random_state(std::size_t dim, RandomStream& rng) {
  std::normal_distribution<double> gaussian;
  CVector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = Complex(gaussian(rng), gaussian(rng));
  return v / v.norm();
}

CMatrix random_matrix(std::size_t rows, std::size_t cols, RandomStream& rng) {
  std::normal_distribution<double> gaussian;
  CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = Complex(gaussian(rng), gaussian(rng));
  return m;
}

AssumptionReport check_a2(const RateContext& ctx, double t0, double t1, double grid_step) {
  const std::vector<double> grid = make_grid(t0, t1, grid_step);
  RateEvaluator ev(ctx);
  std::vector<double> f(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    ev.at(grid[k]);
    double s = 0.0;
    for (LabelId x = 0; x < ctx.label_count(); ++x) s += ev.absolute_row_sum(x);
    f[k] = s;
  }
  // Composite Simpson, closing with the 3/8 rule on an odd cell count.
  const std::size_t K = grid.size() - 1;
  const double h = (t1 - t0) / static_cast<double>(K);
  double integral = 0.0;
  if (K == 1) {
    integral = 0.5 * h * (f[0] + f[1]);
  } else {
    const std::size_t end = K % 2 == 1 ? K - 3 : K;
    for (std::size_t i = 0; i + 2 <= end; i += 2) integral += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    if (end != K) integral += 3.0 * h / 8.0 * (f[end] + 3.0 * f[end + 1] + 3.0 * f[end + 2] + f[end + 3]);
  }

  AssumptionReport r;
  r.t0 = t0;
  r.t1 = t1;
  r.a2_integral = integral;
  r.hs_norm = ctx.hamiltonian().matrix().norm();
  return r;
}

double hs_lhs(const HermitianOperator& H, const Povm& pov, const CVector& psi) {
  const std::size_t n = pov.size();
  std::vector<CVector> proj(n);
  std::vector<CVector> h_proj(n);
  for (LabelId x = 0; x < n; ++x) {
    proj[x] = pov.element(x) * psi;
    h_proj[x] = H.matrix() * proj[x];
  }
  double lhs = 0.0;
  for (LabelId x = 0; x < n; ++x) {
    for (LabelId y = 0; y < n; ++y) lhs += std::abs(proj[x].dot(h_proj[y]));
  }
  return lhs;
}

HsResult check_hs_inequality(const HermitianOperator& H, const Povm& pov, std::size_t trials,
                             RandomStream& rng) {
  if (H.dim() != pov.dim()) throw ValidationError("povm", "POVM dimension differs from the Hamiltonian");
  HsResult r;
  r.hs_norm = H.matrix().norm();
  for (std::size_t k = 0; k < trials; ++k) {
    const CVector psi = random_state(H.dim(), rng);
    const double lhs = hs_lhs(H, pov, psi);
    const double rhs = psi.squaredNorm() * r.hs_norm;
    if (lhs > rhs + 1e-9) r.holds = false;
    const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    r.worst_ratio = std::max(r.worst_ratio, ratio);
  }
  return r;
}

bool check_povm_contraction(const CMatrix& C, const Povm& pov, LabelId x) {
  if (x >= pov.size()) throw ValidationError("label", "label index out of range");
  if (static_cast<std::size_t>(C.rows()) != pov.dim()) {
    throw ValidationError("C", "matrix row count differs from the POVM dimension");
  }
  const double lhs = (C.adjoint() * pov.element(x) * C).trace().real();
  const double rhs = C.squaredNorm();
  return lhs <= rhs * (1.0 + 1e-10) + 1e-300;
}

}  // namespace belljump
