#pragma once

#include <complex>
#include <cstdint>
#include <span>

// Dense statevector kernels. A Pauli string is given by bitmasks (x, z):
// qubit j carries I, X, Z or Y for (x_j, z_j) = (0,0), (1,0), (0,1), (1,1).
// On a basis state |b> the string acts as
//   P|b> = i^popcount(x&z) * (-1)^popcount(z&b) |b ^ x>.
//
// `serial` holds straightforward reference loops used by the tests; `omp`
// holds the OpenMP kernels used by the library. Reductions in `omp` sum a
// fixed number of chunks in order, so results do not depend on the thread
// count.
namespace qdmet::kernels {

using cplx = std::complex<double>;

/// Phase of P|b> relative to |b ^ x>.
inline cplx pauli_phase(std::uint64_t x, std::uint64_t z, std::uint64_t b) {
  static constexpr cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const int k = __builtin_popcountll(x & z) + 2 * __builtin_popcountll(z & b);
  return kIPow[k & 3];
}

namespace serial {
/// out += coeff * P in
void apply_pauli(std::span<const cplx> in, std::span<cplx> out, std::uint64_t x,
                 std::uint64_t z, cplx coeff);
/// <psi|P|psi>
cplx pauli_expectation(std::span<const cplx> psi, std::uint64_t x, std::uint64_t z);
/// psi <- exp(i theta P) psi
void pauli_rotation(std::span<cplx> psi, std::uint64_t x, std::uint64_t z, double theta);
}  // namespace serial

namespace omp {
void apply_pauli(std::span<const cplx> in, std::span<cplx> out, std::uint64_t x,
                 std::uint64_t z, cplx coeff);
cplx pauli_expectation(std::span<const cplx> psi, std::uint64_t x, std::uint64_t z);
void pauli_rotation(std::span<cplx> psi, std::uint64_t x, std::uint64_t z, double theta);
}  // namespace omp

}  // namespace qdmet::kernels
