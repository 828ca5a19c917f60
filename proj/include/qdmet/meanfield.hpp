#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "qdmet/integrals.hpp"

namespace qdmet {

using OrbitalSet = std::vector<std::size_t>;

/// One-body potential restricted to the diagonal blocks of a set of disjoint
/// orbital groups (the fragments).
class CorrelationPotential {
 public:
  CorrelationPotential() = default;
  /// Throws ValidationError if `u` is asymmetric or has an element coupling
  /// orbitals of different blocks (or outside every block).
  CorrelationPotential(Eigen::MatrixXd u, std::vector<OrbitalSet> blocks);

  /// Zero potential of dimension n over the given blocks.
  static CorrelationPotential zero(std::size_t n, std::vector<OrbitalSet> blocks);

  const Eigen::MatrixXd& matrix() const noexcept { return u_; }
  const std::vector<OrbitalSet>& blocks() const noexcept { return blocks_; }

  /// Number of independent parameters (upper triangle of every block).
  std::size_t n_parameters() const;
  std::vector<double> parameters() const;
  CorrelationPotential with_parameters(const std::vector<double>& params) const;

 private:
  Eigen::MatrixXd u_;
  std::vector<OrbitalSet> blocks_;
};

struct ScfConfig {
  double density_tol = 1e-10;
  int max_iter = 200;
  double damping = 0.5;
  bool use_diis = false;
  int diis_subspace = 8;
  /// Minimum HOMO-LUMO separation accepted as non-degenerate.
  double degeneracy_tol = 1e-9;
};

struct ScfIteration {
  int iteration = 0;
  double energy = 0.0;
  double density_residual = 0.0;
};

struct MeanFieldState {
  Eigen::MatrixXd coefficients;  ///< columns are MOs over the orthonormal basis
  Eigen::VectorXd orbital_energies;
  std::size_t n_occ_spatial = 0;
  Eigen::MatrixXd one_rdm;  ///< 2 C_occ C_occ^T
  Eigen::MatrixXd fock;
  double energy = 0.0;
  std::vector<ScfIteration> trace;
};

/// Closed-shell field J[D] - K[D]/2 for a spin-summed density D:
/// G_pq = sum_rs D_rs [(pq|rs) - (pr|qs)/2].
Eigen::MatrixXd two_electron_field(const TwoBodyTensor& eri, const Eigen::MatrixXd& density);

/// Restricted Hartree-Fock with density damping (or DIIS), core guess from
/// diagonalizing d + u.
///
/// Throws ValidationError for an odd electron count, DegeneracyError when the
/// converged HOMO and LUMO are degenerate and ConvergenceError after
/// `cfg.max_iter` iterations.
MeanFieldState run_rhf(const IntegralSet& ints, const ScfConfig& cfg = {});
MeanFieldState run_rhf(const IntegralSet& ints, const CorrelationPotential& u,
                       const ScfConfig& cfg = {});

/// Sub-block of the mean-field 1-RDM; throws ValidationError for an
/// out-of-range index.
Eigen::MatrixXd mean_field_rdm_block(const MeanFieldState& state, const OrbitalSet& rows,
                                     const OrbitalSet& cols);

/// Flips each column so its largest-magnitude component is positive.
void fix_column_signs(Eigen::MatrixXd& vectors);

}  // namespace qdmet
