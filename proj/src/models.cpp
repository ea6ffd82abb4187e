#include "belljump/models.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace belljump {

void ModelSpec::validate() const {
  if (H.dim() != pov.dim()) throw ValidationError("povm", "POVM dimension differs from the Hamiltonian");
  if (psi0.dim() != H.dim()) throw ValidationError("psi0", "state dimension differs from the Hamiltonian");
  psi0.require_normalized();
}

namespace {

std::vector<std::string> index_labels(std::size_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(std::to_string(k));
  return out;
}

CMatrix gaussian_hermitian(int dim, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(normal(gen), normal(gen));
  }
  CMatrix h = (a + a.adjoint()) / std::sqrt(8.0 * dim);
  return 0.5 * (h + h.adjoint()).eval();
}

CVector gaussian_state(int dim, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = Complex(normal(gen), normal(gen));
  return v / v.norm();
}

}  // namespace

ModelSpec two_level() {
  CMatrix h(2, 2);
  h << 0.0, 1.0, 1.0, 0.0;
  CVector psi(2);
  psi << 1.0, 0.0;
  return ModelSpec{
      "two_level",
      HermitianOperator(h),
      Povm::basis({"0", "1"}),
      StateVector(psi),
      {{"mu_0(t)", "cos(t/2)^2"},
       {"mu_1(t)", "sin(t/2)^2"},
       {"sigma_0_to_1(t)", "tan(t/2) on (0, pi)"},
       {"sigma_1_to_0(t)", "0 on (0, pi)"},
       {"Gamma_0_0(u)", "-2 ln cos(u/2) on [0, pi)"}}};
}

std::vector<std::vector<int>> occupation_basis(int sites, int max_particles) {
  std::vector<std::vector<int>> out;
  std::vector<int> occ(static_cast<std::size_t>(sites), 0);
  // Lexicographic odometer over tuples with total <= max_particles.
  while (true) {
    out.push_back(occ);
    int r = sites - 1;
    while (r >= 0) {
      ++occ[static_cast<std::size_t>(r)];
      if (std::accumulate(occ.begin(), occ.end(), 0) <= max_particles) break;
      occ[static_cast<std::size_t>(r)] = 0;
      --r;
    }
    if (r < 0) break;
  }
  return out;
}

std::string occupation_label(const std::vector<int>& occupation) {
  std::string s;
  for (std::size_t r = 0; r < occupation.size(); ++r) {
    if (r) s += '.';
    s += std::to_string(occupation[r]);
  }
  return s;
}

ModelSpec bell_lattice(int sites, int max_particles, double hop, double pair_amp,
                       std::vector<int> initial) {
  if (sites < 1) throw ValidationError("sites", "need at least one site");
  if (max_particles < 0) throw ValidationError("max_particles", "must be nonnegative");
  // Number of tuples with total <= N on L sites is C(N + L, L).
  double count = 1.0;
  for (int k = 1; k <= sites; ++k) count = count * (max_particles + k) / k;
  if (count > 2000.0) throw ValidationError("max_particles", "truncated occupation space exceeds 2000 configurations");

  const auto basis = occupation_basis(sites, max_particles);
  const auto dim = static_cast<Eigen::Index>(basis.size());
  std::map<std::vector<int>, Eigen::Index> index;
  std::vector<std::string> labels;
  for (Eigen::Index k = 0; k < dim; ++k) {
    index[basis[static_cast<std::size_t>(k)]] = k;
    labels.push_back(occupation_label(basis[static_cast<std::size_t>(k)]));
  }

  CMatrix h = CMatrix::Zero(dim, dim);
  auto couple = [&](Eigen::Index a, Eigen::Index b, double v) {
    h(a, b) += v;
    h(b, a) += v;
  };
  for (Eigen::Index k = 0; k < dim; ++k) {
    const auto& occ = basis[static_cast<std::size_t>(k)];
    const int total = std::accumulate(occ.begin(), occ.end(), 0);
    // a_r^dagger a_{r+1}; its adjoint is added by couple().
    for (int r = 0; r + 1 < sites; ++r) {
      const int from = occ[static_cast<std::size_t>(r + 1)];
      if (from == 0 || hop == 0.0) continue;
      auto moved = occ;
      --moved[static_cast<std::size_t>(r + 1)];
      ++moved[static_cast<std::size_t>(r)];
      const double amp = std::sqrt(static_cast<double>(from)) *
                         std::sqrt(static_cast<double>(occ[static_cast<std::size_t>(r)] + 1));
      couple(index.at(moved), k, hop * amp);
    }
    // a_r^dagger + a_r, dropped where the created state leaves the truncation.
    if (pair_amp != 0.0 && total < max_particles) {
      for (int r = 0; r < sites; ++r) {
        auto created = occ;
        ++created[static_cast<std::size_t>(r)];
        const double amp = std::sqrt(static_cast<double>(occ[static_cast<std::size_t>(r)] + 1));
        couple(index.at(created), k, pair_amp * amp);
      }
    }
  }

  if (initial.empty()) initial.assign(static_cast<std::size_t>(sites), 0);
  if (initial.size() != static_cast<std::size_t>(sites)) {
    throw ValidationError("initial", "initial occupation has the wrong number of sites");
  }
  const auto it = index.find(initial);
  if (it == index.end()) throw ValidationError("initial", "initial occupation lies outside the truncation");
  CVector psi = CVector::Zero(dim);
  psi[it->second] = 1.0;

  return ModelSpec{"bell_lattice", HermitianOperator(h), Povm::basis(labels), StateVector(psi), {}};
}

ModelSpec random_hermitian(int dim, std::uint64_t seed) {
  if (dim < 1) throw ValidationError("dim", "must be positive");
  std::mt19937_64 gen(seed);
  CMatrix h = gaussian_hermitian(dim, gen);
  CVector psi = gaussian_state(dim, gen);
  return ModelSpec{"random_hermitian", HermitianOperator(h),
                   Povm::basis(index_labels(static_cast<std::size_t>(dim))), StateVector(psi), {}};
}

ModelSpec compressed_povm_model(int dim_big, int dim_small, std::uint64_t seed) {
  if (dim_small < 1 || dim_big < dim_small) {
    throw ValidationError("dim_small", "need 1 <= dim_small <= dim_big");
  }
  std::mt19937_64 gen(seed);
  CMatrix v;
  if (dim_small == dim_big) {
    v = CMatrix::Identity(dim_big, dim_big);
  } else {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix g(dim_big, dim_small);
    for (int i = 0; i < dim_big; ++i) {
      for (int j = 0; j < dim_small; ++j) g(i, j) = Complex(normal(gen), normal(gen));
    }
    Eigen::HouseholderQR<CMatrix> qr(g);
    v = qr.householderQ() * CMatrix::Identity(dim_big, dim_small);
  }
  const Povm pvm = Povm::basis(index_labels(static_cast<std::size_t>(dim_big)));
  Povm pov = povm_from_compression(pvm, v);
  CMatrix h = gaussian_hermitian(dim_small, gen);
  CVector psi = gaussian_state(dim_small, gen);
  return ModelSpec{"compressed_povm", HermitianOperator(h), std::move(pov), StateVector(psi), {}};
}

std::vector<std::string> bundled_model_names() {
  return {"two_level", "bell_lattice", "random_hermitian", "compressed_povm"};
}

std::optional<ModelSpec> bundled_model(const std::string& name) {
  if (name == "two_level") return two_level();
  if (name == "bell_lattice") return bell_lattice(3, 2, 1.0, 0.5);
  if (name == "random_hermitian") return random_hermitian(16, 1);
  if (name == "compressed_povm") return compressed_povm_model(8, 4, 1);
  return std::nullopt;
}

}  // namespace belljump
