#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "qdmet/integrals.hpp"
#include "qdmet/meanfield.hpp"
#include "qdmet/qubits.hpp"
#include "qdmet/rdm.hpp"

// Energy-sorting VQE: UCCSD operator pool over a Hartree-Fock reference,
// one-parameter screening of every operator, a single first-order Trotter
// product of the retained operators, and quasi-Newton optimization.
namespace qdmet {

/// Spin-orbital excitation a+_p a_r (single) or a+_p a+_q a_r a_s (double),
/// with p, q virtual and r, s occupied in the reference, p > q and r > s.
struct ExcitationOp {
  enum class Kind { single, double_ };
  Kind kind = Kind::single;
  std::size_t p = 0, q = 0, r = 0, s = 0;  ///< q and s unused for singles

  static ExcitationOp single(std::size_t p, std::size_t r);
  static ExcitationOp double_(std::size_t p, std::size_t q, std::size_t r, std::size_t s);

  /// T (not T - T+).
  FermionOperator excitation(std::size_t n_modes) const;
  /// Tuple used for deterministic tie-breaking.
  std::array<std::size_t, 5> key() const;
  std::string to_string() const;
  bool operator==(const ExcitationOp&) const = default;
};

/// exp(theta (T - T+)) factorizes into Pauli exponentials exp(i theta a_k P_k)
/// because the Jordan-Wigner image of one excitation generator has mutually
/// commuting strings with imaginary coefficients i a_k.
struct CompiledGenerator {
  std::vector<std::pair<PauliString, double>> rotations;  ///< (P_k, a_k)
};

/// Throws ValidationError if the image is not anti-Hermitian.
CompiledGenerator compile_generator(const ExcitationOp& op, std::size_t n_qubits);

struct ScreenedEntry {
  double delta_e = 0.0;
  ExcitationOp op;
  double theta_opt = 0.0;
  std::size_t pool_index = 0;
};

struct ScreenedPool {
  double reference_energy = 0.0;
  std::vector<ScreenedEntry> entries;  ///< sorted by |delta_e| descending
};

struct VqeConfig {
  double epsilon = 1e-5;        ///< screening threshold (hartree)
  double optimizer_tol = 1e-7;  ///< gradient-norm stop
  int max_evals = 200000;
  double bracket_lo = -3.141592653589793;  ///< 1-D screening bracket
  double bracket_hi = 3.141592653589793;
  int bracket_grid = 32;
  double line_tol = 1e-8;        ///< 1-D minimization tolerance in theta
  double fd_step = 1e-6;         ///< central-difference gradient step
  bool analytic_gradient = false;
  double theta0_damping = 0.5;
  bool fine_tuning = false;      ///< grow the ansatz beyond epsilon until converged
  double fine_tuning_tol = 1e-6;
  int fine_tuning_max_ops = 64;
};

/// Basis state with the lowest n_electrons spin orbitals occupied.
Statevector hf_reference(std::size_t n_qubits, int n_electrons);

/// All S_z-conserving singles and doubles from occupied to virtual spin
/// orbitals of the closed-shell reference; singles first, then doubles.
std::vector<ExcitationOp> build_pool(std::size_t n_spatial, int n_electrons);

/// E(theta) = <ref| e^{-theta G} H e^{theta G} |ref> minimized per operator.
/// Entries with |delta_e| > epsilon are kept (all of them when epsilon is 0).
ScreenedPool screen_pool(const std::vector<ExcitationOp>& pool, const PauliSum& h,
                         const Statevector& ref, double epsilon, const VqeConfig& cfg = {});

class AnsatzState {
 public:
  AnsatzState() = default;
  AnsatzState(std::vector<ExcitationOp> ops, std::vector<double> thetas, std::size_t n_qubits);

  const std::vector<ExcitationOp>& ops() const noexcept { return ops_; }
  const std::vector<double>& thetas() const noexcept { return thetas_; }
  const std::vector<CompiledGenerator>& generators() const noexcept { return generators_; }
  std::size_t n_qubits() const noexcept { return n_qubits_; }
  std::size_t size() const noexcept { return ops_.size(); }
  AnsatzState with_thetas(std::vector<double> thetas) const;

 private:
  std::vector<ExcitationOp> ops_;
  std::vector<double> thetas_;
  std::vector<CompiledGenerator> generators_;
  std::size_t n_qubits_ = 0;
};

/// prod_i exp(theta_i (T_i - T_i+)) |ref>, operators applied in list order.
Statevector apply_ansatz(const Statevector& ref, const AnsatzState& ansatz);

/// dE/dtheta by a backward sweep through the Trotter product.
std::vector<double> analytic_gradient(const PauliSum& h, const Statevector& ref,
                                      const AnsatzState& ansatz);
std::vector<double> finite_difference_gradient(const PauliSum& h, const Statevector& ref,
                                               const AnsatzState& ansatz, double step);

struct OptimizerIteration {
  int iteration = 0;
  double energy = 0.0;
  double gradient_norm = 0.0;
  int evaluations = 0;
};

struct VqeMinimizeResult {
  double energy = 0.0;
  std::vector<double> thetas;
  int evaluations = 0;
  bool converged = false;
  std::vector<OptimizerIteration> trace;
};

/// BFGS over the ansatz angles, clipped to [bracket_lo, bracket_hi]
/// (widened to contain theta0). Deterministic given theta0.
VqeMinimizeResult vqe_minimize(const PauliSum& h, const Statevector& ref,
                               const AnsatzState& ansatz, const VqeConfig& cfg = {});

RdmPair measure_rdms(const Statevector& psi, std::size_t n_spatial);

struct EsvqeResult {
  double energy = 0.0;
  RdmPair rdms;             ///< over the input orbital basis
  ScreenedPool screened;
  AnsatzState ansatz;       ///< final angles
  VqeMinimizeResult minimize;
  std::size_t n_qubits = 0;
  std::size_t pool_size = 0;
};

/// Full ESVQE on an integral set: RHF orbitals, qubit Hamiltonian in that
/// basis, screening, optimization, RDMs rotated back to the input basis.
EsvqeResult run_esvqe(const IntegralSet& ints, const VqeConfig& cfg = {},
                      const ScfConfig& scf = {});

}  // namespace qdmet
