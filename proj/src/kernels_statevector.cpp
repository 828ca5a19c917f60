#include "qdmet/kernels/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace qdmet::kernels {

namespace serial {

void apply_pauli(std::span<const cplx> in, std::span<cplx> out, std::uint64_t x,
                 std::uint64_t z, cplx coeff) {
  for (std::uint64_t b = 0; b < in.size(); ++b) out[b ^ x] += coeff * pauli_phase(x, z, b) * in[b];
}

cplx pauli_expectation(std::span<const cplx> psi, std::uint64_t x, std::uint64_t z) {
  std::vector<cplx> p_psi(psi.size(), cplx{0.0, 0.0});
  apply_pauli(psi, p_psi, x, z, 1.0);
  cplx sum = 0.0;
  for (std::size_t b = 0; b < psi.size(); ++b) sum += std::conj(psi[b]) * p_psi[b];
  return sum;
}

void pauli_rotation(std::span<cplx> psi, std::uint64_t x, std::uint64_t z, double theta) {
  std::vector<cplx> p_psi(psi.size(), cplx{0.0, 0.0});
  apply_pauli(psi, p_psi, x, z, 1.0);
  const double c = std::cos(theta);
  const cplx is{0.0, std::sin(theta)};
  for (std::size_t b = 0; b < psi.size(); ++b) psi[b] = c * psi[b] + is * p_psi[b];
}

}  // namespace serial

namespace omp {

namespace {
constexpr std::int64_t kChunks = 64;
}

void apply_pauli(std::span<const cplx> in, std::span<cplx> out, std::uint64_t x,
                 std::uint64_t z, cplx coeff) {
  const auto dim = static_cast<std::int64_t>(in.size());
  // Each output index receives exactly one input, so writes never collide.
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < dim; ++b) {
    const auto ub = static_cast<std::uint64_t>(b);
    out[ub ^ x] += coeff * pauli_phase(x, z, ub) * in[ub];
  }
}

cplx pauli_expectation(std::span<const cplx> psi, std::uint64_t x, std::uint64_t z) {
  const auto dim = static_cast<std::int64_t>(psi.size());
  const std::int64_t chunks = std::min(kChunks, dim);
  std::vector<cplx> partial(static_cast<std::size_t>(chunks), cplx{0.0, 0.0});
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) {
    const std::int64_t lo = dim * c / chunks;
    const std::int64_t hi = dim * (c + 1) / chunks;
    cplx sum = 0.0;
    for (std::int64_t b = lo; b < hi; ++b) {
      const auto ub = static_cast<std::uint64_t>(b);
      sum += std::conj(psi[ub ^ x]) * pauli_phase(x, z, ub) * psi[ub];
    }
    partial[static_cast<std::size_t>(c)] = sum;
  }
  cplx total = 0.0;
  for (const auto& p : partial) total += p;
  return total;
}

void pauli_rotation(std::span<cplx> psi, std::uint64_t x, std::uint64_t z, double theta) {
  const auto dim = static_cast<std::int64_t>(psi.size());
  const double c = std::cos(theta);
  const cplx is{0.0, std::sin(theta)};
  if (x == 0) {
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < dim; ++b) {
      const auto ub = static_cast<std::uint64_t>(b);
      psi[ub] *= c + is * pauli_phase(x, z, ub);
    }
    return;
  }
  // P pairs b with b ^ x; update each pair once from its lower member.
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < dim; ++b) {
    const auto ub = static_cast<std::uint64_t>(b);
    const std::uint64_t partner = ub ^ x;
    if (partner < ub) continue;
    const cplx a0 = psi[ub];
    const cplx a1 = psi[partner];
    psi[ub] = c * a0 + is * pauli_phase(x, z, partner) * a1;
    psi[partner] = c * a1 + is * pauli_phase(x, z, ub) * a0;
  }
}

}  // namespace omp

}  // namespace qdmet::kernels
