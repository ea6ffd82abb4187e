#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "belljump/rates.hpp"

namespace belljump {

struct ModelSpec {
  std::string name;
  HermitianOperator H;
  Povm pov;
  StateVector psi0;
  /// Named analytic expectations, documented as formulas (test reference only).
  std::map<std::string, std::string> closed_forms;

  std::size_t dim() const { return H.dim(); }
  RateContext context(double node_epsilon = RateContext::kDefaultNodeEpsilon) const {
    return RateContext(H, pov, psi0, node_epsilon);
  }
  /// Cross-component checks: matching dimensions and a normalized psi0.
  void validate() const;
};

/// H = [[0,1],[1,0]], basis PVM, psi0 = (1,0).
ModelSpec two_level();

/// Occupation numbers on `sites` sites with total particle number at most
/// `max_particles`, enumerated lexicographically. Nearest-neighbour hopping
/// with bosonic sqrt(n) matrix elements plus single-particle creation and
/// annihilation of amplitude `pair_amp`. `initial` selects the occupation
/// basis state used as psi0 (vacuum when empty).
ModelSpec bell_lattice(int sites, int max_particles, double hop, double pair_amp,
                       std::vector<int> initial = {});

/// Enumerates the occupation tuples of bell_lattice in label order.
std::vector<std::vector<int>> occupation_basis(int sites, int max_particles);

/// Label text used for an occupation tuple, e.g. "1.0.2".
std::string occupation_label(const std::vector<int>& occupation);

/// Gaussian Hermitian matrix (scaled by 1/sqrt(2 dim)), basis PVM and a
/// random normalized psi0, all determined by `seed`.
ModelSpec random_hermitian(int dim, std::uint64_t seed);

/// POVM V^* P0(x) V from a random isometry V of a dim_small space into a
/// dim_big one, with a random Hermitian H on the small space.
ModelSpec compressed_povm_model(int dim_big, int dim_small, std::uint64_t seed);

/// Names accepted by bundled_model().
std::vector<std::string> bundled_model_names();

/// The models the tools and acceptance suite ship with.
std::optional<ModelSpec> bundled_model(const std::string& name);

}  // namespace belljump
