#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qdmet/integrals.hpp"
#include "qdmet/kernels/statevector.hpp"

namespace qdmet {

/// Dense rank-4 array, element (p,q,r,s) at ((p*n+q)*n+r)*n+s.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(std::size_t n) : n_(n), data_(n * n * n * n, 0.0) {}
  std::size_t dim() const noexcept { return n_; }
  double& operator()(std::size_t p, std::size_t q, std::size_t r, std::size_t s) {
    return data_[((p * n_ + q) * n_ + r) * n_ + s];
  }
  double operator()(std::size_t p, std::size_t q, std::size_t r, std::size_t s) const {
    return data_[((p * n_ + q) * n_ + r) * n_ + s];
  }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Spin-traced reduced density matrices over spatial orbitals:
///   one_rdm(p,q)     = sum_a <a+_{p a} a_{q a}>
///   two_rdm(p,q,r,s) = sum_{a,b} <a+_{p a} a+_{q b} a_{r b} a_{s a}>  (a, b spins)
struct RdmPair {
  Eigen::MatrixXd one_rdm;
  Tensor4 two_rdm;

  std::size_t n_orbitals() const noexcept { return static_cast<std::size_t>(one_rdm.rows()); }
};

/// Real parts of the RDMs of a many-body state given over the 2n-qubit
/// interleaved spin-orbital register (qubit 2p alpha, 2p+1 beta). Works
/// directly on occupation bitstrings; zero amplitudes are skipped.
RdmPair rdms_from_amplitudes(std::span<const kernels::cplx> amplitudes, std::size_t n_spatial);

/// Expresses RDMs given in the orbital basis C (columns over the target
/// basis) in the target basis: D' = C D C^T on every index.
RdmPair rotate_rdms(const RdmPair& rdms, const Eigen::MatrixXd& c);

/// E = core + sum d_pq D_pq + 1/2 sum (pq|rs) G_prsq.
double energy_from_rdms(const IntegralSet& ints, const RdmPair& rdms);

struct RdmDiagnostics {
  double trace = 0.0;
  double asymmetry = 0.0;        ///< max |D - D^T|
  double min_occupation = 0.0;   ///< smallest eigenvalue of D
  double max_occupation = 0.0;
  double partial_trace_error = 0.0;  ///< max |sum_q G_pqqs - (N-1) D_ps|
};

RdmDiagnostics diagnose(const RdmPair& rdms, double n_electrons);

/// Throws ValidationError unless trace, symmetry, occupation bounds and the
/// partial-trace relation hold within `tol`.
void check_rdm_invariants(const RdmPair& rdms, double n_electrons, double tol);

}  // namespace qdmet
