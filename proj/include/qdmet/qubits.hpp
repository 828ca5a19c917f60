#pragma once

#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdmet/integrals.hpp"

// Fermion-to-qubit machinery.
//
// Conventions used throughout:
//  * spin orbital 2p is the alpha partner of spatial orbital p, 2p+1 the beta
//    partner (interleaved ordering);
//  * qubit j holds spin orbital j, and bit j of a basis-state index is its
//    occupation (qubit 0 is the least significant bit);
//  * Jordan-Wigner: a+_j = (X_j - iY_j)/2 Z_{j-1}...Z_0.
namespace qdmet {

using cplx = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 24;

struct LadderOp {
  std::size_t mode = 0;
  bool create = false;
  auto operator<=>(const LadderOp&) const = default;
};

struct FermionTerm {
  cplx coefficient{0.0, 0.0};
  std::vector<LadderOp> ops;  ///< applied right to left, as written
};

/// Sum of products of ladder operators over `n_modes` spin orbitals. The empty
/// product is the identity.
class FermionOperator {
 public:
  FermionOperator() = default;
  explicit FermionOperator(std::size_t n_modes) : n_modes_(n_modes) {}

  std::size_t n_modes() const noexcept { return n_modes_; }
  const std::vector<FermionTerm>& terms() const noexcept { return terms_; }

  /// Throws ValidationError if a mode index is out of range.
  void add_term(cplx coefficient, std::vector<LadderOp> ops);

  FermionOperator adjoint() const;
  FermionOperator operator*(const FermionOperator& rhs) const;
  FermionOperator operator+(const FermionOperator& rhs) const;
  FermionOperator operator-(const FermionOperator& rhs) const;

  /// Merges terms with identical ladder sequences, keeping first-seen order.
  FermionOperator canonicalized() const;

 private:
  std::size_t n_modes_ = 0;
  std::vector<FermionTerm> terms_;
};

inline LadderOp create(std::size_t mode) { return {mode, true}; }
inline LadderOp annihilate(std::size_t mode) { return {mode, false}; }

/// Bitmask form of a Pauli string (see kernels/statevector.hpp).
struct PauliString {
  std::uint64_t x = 0;
  std::uint64_t z = 0;
  auto operator<=>(const PauliString&) const = default;

  /// 'I', 'X', 'Y' or 'Z' on qubit q.
  char axis(std::size_t q) const;
  /// Parses "X0 Y1 Z3"; the empty string is the identity.
  static PauliString parse(const std::string& text);
  std::string to_string() const;
};

struct PauliTerm {
  cplx coefficient{1.0, 0.0};
  PauliString string;
};

/// Product of two strings: P1 P2 = phase * P3.
std::pair<cplx, PauliString> multiply(const PauliString& a, const PauliString& b);

/// Linear combination of Pauli strings over a fixed register; coefficients
/// below 1e-12 in magnitude are pruned on every merge.
class PauliSum {
 public:
  static constexpr double kPruneTol = 1e-12;

  PauliSum() = default;
  explicit PauliSum(std::size_t n_qubits) : n_qubits_(n_qubits) {}

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  const std::map<PauliString, cplx>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }

  void add(const PauliString& s, cplx coefficient);
  PauliSum& operator+=(const PauliSum& rhs);
  PauliSum operator+(const PauliSum& rhs) const;
  PauliSum operator*(const PauliSum& rhs) const;
  PauliSum operator*(cplx scalar) const;

  PauliSum adjoint() const;
  /// Largest |imag| of any coefficient, i.e. distance from a Hermitian sum.
  double hermiticity_defect() const;
  /// Coefficient of the identity string.
  cplx constant() const;

  /// Full 2^n x 2^n matrix, for tests and small oracles.
  Eigen::MatrixXcd to_dense() const;

 private:
  std::size_t n_qubits_ = 0;
  std::map<PauliString, cplx> terms_;
};

/// Normalized 2^n amplitude vector. n is limited to kMaxQubits.
class Statevector {
 public:
  Statevector() = default;
  /// |0...0>. Throws ValidationError when n_qubits > kMaxQubits.
  explicit Statevector(std::size_t n_qubits);
  /// Takes ownership of amplitudes; size must be a power of two. No
  /// normalization is applied.
  static Statevector from_amplitudes(std::vector<cplx> amplitudes);
  static Statevector basis_state(std::size_t n_qubits, std::uint64_t index);

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  std::size_t dimension() const noexcept { return amps_.size(); }
  std::span<const cplx> amplitudes() const noexcept { return amps_; }
  std::span<cplx> amplitudes() noexcept { return amps_; }
  cplx operator[](std::size_t i) const { return amps_[i]; }

  double norm() const;
  void normalize();

 private:
  std::size_t n_qubits_ = 0;
  std::vector<cplx> amps_;
};

/// E_core + sum d_pq a+_{p s} a_{q s} + 1/2 sum (pq|rs) a+_{p s} a+_{r t} a_{s t} a_{q s}.
/// Two-body products are stored with creators ascending and annihilators
/// descending; every one-body (p, q, spin) triple is listed, zeros included.
FermionOperator expand_to_spin_orbitals(const IntegralSet& ints);

PauliSum jordan_wigner(const FermionOperator& op);

/// Convenience: jordan_wigner(expand_to_spin_orbitals(ints)).
PauliSum qubit_hamiltonian(const IntegralSet& ints);

/// <psi|h|psi>. Throws ValidationError when the imaginary residue reaches 1e-9
/// (h not Hermitian) or the register sizes differ.
double expectation(const PauliSum& h, const Statevector& psi);

/// h|psi> (not normalized).
Statevector apply(const PauliSum& h, const Statevector& psi);

/// exp(i theta P)|psi> = cos(theta)|psi> + i sin(theta) P|psi>.
Statevector apply_pauli_exponential(Statevector psi, const PauliString& p, double theta);
void apply_pauli_exponential_inplace(Statevector& psi, const PauliString& p, double theta);

}  // namespace qdmet
