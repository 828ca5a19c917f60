#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qdmet {

/// Two-electron integrals (pq|rs) in chemists' notation over spatial orbitals.
///
/// Only one representative of each 8-fold symmetry class is stored, so every
/// image of (pq|rs) reads back the same value bit for bit.
class TwoBodyTensor {
 public:
  TwoBodyTensor() = default;
  explicit TwoBodyTensor(std::size_t n_orbitals);

  std::size_t n_orbitals() const noexcept { return n_; }

  double operator()(std::size_t p, std::size_t q, std::size_t r, std::size_t s) const {
    return packed_[index(p, q, r, s)];
  }
  void set(std::size_t p, std::size_t q, std::size_t r, std::size_t s, double value) {
    packed_[index(p, q, r, s)] = value;
  }

  /// Canonical position of (pq|rs) in the packed array.
  std::size_t index(std::size_t p, std::size_t q, std::size_t r, std::size_t s) const {
    return pair_index(pair_index(p, q), pair_index(r, s));
  }

  std::span<const double> packed() const noexcept { return packed_; }
  std::span<double> packed() noexcept { return packed_; }

  /// Row-major n^4 copy, element (p,q,r,s) at ((p*n+q)*n+r)*n+s.
  std::vector<double> dense() const;

  /// Reads canonical elements of a row-major n^4 array. The array is assumed
  /// symmetric; no averaging is done.
  static TwoBodyTensor from_dense(std::size_t n_orbitals, std::span<const double> dense);

  bool operator==(const TwoBodyTensor&) const = default;

  static std::size_t pair_index(std::size_t i, std::size_t j) noexcept {
    return i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> packed_;
};

/// Second-quantized Hamiltonian over an orthonormal spatial-orbital basis:
/// core constant, symmetric one-body matrix, 8-fold symmetric two-body tensor
/// and the electron count it is meant to be solved for.
class IntegralSet {
 public:
  IntegralSet() = default;
  /// Throws ValidationError on shape mismatch, asymmetric one-body matrix
  /// (beyond 1e-10) or an electron count outside [0, 2n].
  IntegralSet(int n_electrons, double core_energy, Eigen::MatrixXd one_body,
              TwoBodyTensor two_body);

  std::size_t n_spatial() const noexcept { return two_body_.n_orbitals(); }
  int n_electrons() const noexcept { return n_electrons_; }
  double core_energy() const noexcept { return core_energy_; }
  const Eigen::MatrixXd& one_body() const noexcept { return one_body_; }
  const TwoBodyTensor& two_body() const noexcept { return two_body_; }

  IntegralSet with_n_electrons(int n_electrons) const;

  bool operator==(const IntegralSet& other) const;

 private:
  int n_electrons_ = 0;
  double core_energy_ = 0.0;
  Eigen::MatrixXd one_body_;
  TwoBodyTensor two_body_;
};

/// Metric of a non-orthogonal orbital basis.
class OverlapMatrix {
 public:
  /// Throws ValidationError if `s` is not square and symmetric.
  explicit OverlapMatrix(Eigen::MatrixXd s);
  const Eigen::MatrixXd& matrix() const noexcept { return s_; }

 private:
  Eigen::MatrixXd s_;
};

IntegralSet parse_fcidump(std::istream& in);
IntegralSet parse_fcidump(const std::string& text);
IntegralSet read_fcidump_file(const std::string& path);

/// Canonical-index entries only, nonzero values with 17 significant digits.
void write_fcidump(std::ostream& out, const IntegralSet& ints);
std::string write_fcidump(const IntegralSet& ints);

struct HubbardParams {
  std::size_t n_sites = 0;
  double t = 1.0;
  double u = 0.0;
  bool periodic = false;
  /// Defaults to half filling when negative.
  int n_electrons = -1;
};

IntegralSet build_hubbard(const HubbardParams& params);

/// Rotates every integral into the basis spanned by the columns of `c`
/// (n x m): d' = C^T d C and (pq|rs)' = sum C_ap C_bq C_cr C_ds (ab|cd).
/// Core energy and electron count are carried over.
IntegralSet rotate_integrals(const IntegralSet& ints, const Eigen::MatrixXd& c);

/// Symmetric orthogonalization with X = S^{-1/2}. Throws ConditioningError when
/// the smallest eigenvalue of S is at or below 1e-10.
IntegralSet lowdin_orthogonalize(const IntegralSet& ints, const OverlapMatrix& s);

/// S^{-1/2} of a positive-definite overlap matrix.
Eigen::MatrixXd inverse_sqrt(const OverlapMatrix& s);

}  // namespace qdmet
