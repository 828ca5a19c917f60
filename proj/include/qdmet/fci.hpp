#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "qdmet/integrals.hpp"
#include "qdmet/qubits.hpp"
#include "qdmet/rdm.hpp"

namespace qdmet {

/// Occupation bitmasks over `n_modes` interleaved spin orbitals with a fixed
/// particle number and fixed 2*S_z = n_alpha - n_beta, sorted ascending.
class SectorBasis {
 public:
  /// Pass as `two_sz` to keep every S_z.
  static constexpr int kAnySpin = std::numeric_limits<int>::min();

  /// Throws ValidationError if the sector is empty.
  SectorBasis(std::size_t n_modes, int n_particles, int two_sz = kAnySpin);

  std::size_t n_modes() const noexcept { return n_modes_; }
  int n_particles() const noexcept { return n_particles_; }
  int two_sz() const noexcept { return two_sz_; }
  std::size_t size() const noexcept { return masks_.size(); }
  const std::vector<std::uint64_t>& masks() const noexcept { return masks_; }
  std::uint64_t mask(std::size_t i) const { return masks_[i]; }
  /// Position of `mask` in the basis, or -1 when it lies outside the sector.
  std::int64_t find(std::uint64_t mask) const {
    return mask < lookup_.size() ? lookup_[mask] : -1;
  }

 private:
  std::size_t n_modes_;
  int n_particles_;
  int two_sz_;
  std::vector<std::uint64_t> masks_;
  std::vector<std::int64_t> lookup_;
};

/// Largest register (spin orbitals) the FCI solver accepts.
inline constexpr std::size_t kFciMaxModes = 16;
/// Sector dimension from which the iterative eigensolver replaces the dense one.
inline constexpr std::size_t kDenseSectorLimit = 2000;

/// Sector Hamiltonian; asserts number conservation on the sector.
Eigen::MatrixXd sector_hamiltonian(const PauliSum& h, const SectorBasis& basis);

struct LanczosResult {
  double eigenvalue = 0.0;
  Eigen::VectorXd eigenvector;
  int iterations = 0;
  double residual = 0.0;
};

/// Lowest eigenpair of a symmetric matrix by restarted Lanczos with full
/// reorthogonalization. Throws ConvergenceError if the residual norm stays
/// above `tol` after `max_restarts` restarts.
LanczosResult lanczos_lowest(const Eigen::MatrixXd& a, const Eigen::VectorXd& start,
                             double tol = 1e-10, int krylov_dim = 60, int max_restarts = 200);

struct FciResult {
  double energy = 0.0;
  RdmPair rdms;
  Eigen::VectorXd ground_vector;  ///< over `basis`
  SectorBasis basis;
};

/// Exact ground state in the (n_electrons, two_sz) sector. The energy includes
/// the core constant. Throws ValidationError when 2*n_spatial exceeds
/// kFciMaxModes or the sector is empty.
FciResult fci_ground_state(const IntegralSet& ints, int n_electrons, int two_sz = 0);
inline FciResult fci_ground_state(const IntegralSet& ints) {
  return fci_ground_state(ints, ints.n_electrons(), ints.n_electrons() % 2);
}

/// Scatters a sector vector into the full 2^n amplitude array.
std::vector<cplx> embed_sector_vector(const SectorBasis& basis, const Eigen::VectorXd& v);

}  // namespace qdmet
