#include "qdmet/fci.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <string>

#include "qdmet/error.hpp"
#include "qdmet/kernels/sector.hpp"
#include "qdmet/kernels/statevector.hpp"

namespace qdmet {

namespace {
constexpr std::size_t kSectorMaxModes = 20;
constexpr double kLeakTol = 1e-10;
}  // namespace

SectorBasis::SectorBasis(std::size_t n_modes, int n_particles, int two_sz)
    : n_modes_(n_modes), n_particles_(n_particles), two_sz_(two_sz) {
  if (n_modes > kSectorMaxModes)
    throw ValidationError("sector basis limited to " + std::to_string(kSectorMaxModes) + " modes");
  constexpr std::uint64_t kAlpha = 0x5555555555555555ULL;
  const std::uint64_t dim = std::uint64_t{1} << n_modes;
  lookup_.assign(dim, -1);
  for (std::uint64_t m = 0; m < dim; ++m) {
    if (__builtin_popcountll(m) != n_particles) continue;
    const int na = __builtin_popcountll(m & kAlpha);
    const int nb = n_particles - na;
    if (two_sz != kAnySpin && na - nb != two_sz) continue;
    lookup_[m] = static_cast<std::int64_t>(masks_.size());
    masks_.push_back(m);
  }
  if (masks_.empty())
    throw ValidationError("empty sector: " + std::to_string(n_particles) + " particles, 2Sz=" +
                          (two_sz == kAnySpin ? std::string("any") : std::to_string(two_sz)) + " in " +
                          std::to_string(n_modes) + " modes");
}

namespace kernels {

namespace serial {

Eigen::MatrixXd sector_matrix(const PauliSum& h, const SectorBasis& basis) {
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  std::map<std::pair<std::uint64_t, Eigen::Index>, cplx> leak;
  for (const auto& [s, c] : h.terms())
    for (Eigen::Index j = 0; j < dim; ++j) {
      const std::uint64_t mask = basis.mask(static_cast<std::size_t>(j));
      const std::uint64_t target = mask ^ s.x;
      const cplx amp = c * pauli_phase(s.x, s.z, mask);
      const std::int64_t i = basis.find(target);
      if (i < 0)
        leak[{target, j}] += amp;
      else
        m(i, j) += amp;
    }
  for (const auto& [key, amp] : leak)
    if (std::abs(amp) > kLeakTol)
      throw ValidationError("operator does not conserve the sector (leak " +
                            std::to_string(std::abs(amp)) + ")");
  if (dim > 0 && m.imag().cwiseAbs().maxCoeff() > kLeakTol)
    throw ValidationError("sector matrix has complex elements");
  return m.real();
}

}  // namespace serial

namespace omp {

Eigen::MatrixXd sector_matrix(const PauliSum& h, const SectorBasis& basis) {
  std::map<std::uint64_t, std::vector<std::pair<std::uint64_t, cplx>>> groups;
  for (const auto& [s, c] : h.terms()) groups[s.x].emplace_back(s.z, c);
  const std::vector<std::pair<std::uint64_t, std::vector<std::pair<std::uint64_t, cplx>>>> flat(
      groups.begin(), groups.end());

  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  std::atomic<bool> leaked{false};
  std::atomic<bool> complex_element{false};
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index j = 0; j < dim; ++j) {
    const std::uint64_t mask = basis.mask(static_cast<std::size_t>(j));
    for (const auto& [x, terms] : flat) {
      cplx amp = 0.0;
      for (const auto& [z, c] : terms) amp += c * pauli_phase(x, z, mask);
      if (std::abs(amp) <= kLeakTol) continue;
      const std::int64_t i = basis.find(mask ^ x);
      if (i < 0) {
        leaked = true;
        continue;
      }
      if (std::abs(amp.imag()) > kLeakTol) complex_element = true;
      m(i, j) += amp.real();
    }
  }
  if (leaked) throw ValidationError("operator does not conserve the sector");
  if (complex_element) throw ValidationError("sector matrix has complex elements");
  return m;
}

}  // namespace omp

}  // namespace kernels

Eigen::MatrixXd sector_hamiltonian(const PauliSum& h, const SectorBasis& basis) {
  if (h.n_qubits() > basis.n_modes())
    throw ValidationError("operator acts on more modes than the sector basis");
  Eigen::MatrixXd m = kernels::omp::sector_matrix(h, basis);
  if (m.size() > 0 && (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ValidationError("sector Hamiltonian is not Hermitian");
  return m;
}

LanczosResult lanczos_lowest(const Eigen::MatrixXd& a, const Eigen::VectorXd& start, double tol,
                             int krylov_dim, int max_restarts) {
  const Eigen::Index n = a.rows();
  if (n == 0 || start.size() != n) throw ValidationError("Lanczos start vector has wrong size");
  const Eigen::Index k = std::min<Eigen::Index>(krylov_dim, n);
  Eigen::VectorXd v = start.normalized();
  LanczosResult out;
  for (int restart = 0; restart <= max_restarts; ++restart) {
    Eigen::MatrixXd basis(n, k);
    Eigen::VectorXd alpha(k), beta(k);
    basis.col(0) = v;
    Eigen::Index used = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
      Eigen::VectorXd w = a * basis.col(j);
      ++out.iterations;
      alpha(j) = basis.col(j).dot(w);
      // Two passes of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass)
        w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
      beta(j) = w.norm();
      used = j + 1;
      if (beta(j) < 1e-14 || j + 1 == k) break;
      basis.col(j + 1) = w / beta(j);
    }
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(used, used);
    for (Eigen::Index j = 0; j < used; ++j) {
      t(j, j) = alpha(j);
      if (j + 1 < used) t(j, j + 1) = t(j + 1, j) = beta(j);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
    const Eigen::VectorXd ritz = basis.leftCols(used) * eig.eigenvectors().col(0);
    out.eigenvalue = eig.eigenvalues()(0);
    out.eigenvector = ritz.normalized();
    out.residual = (a * out.eigenvector - out.eigenvalue * out.eigenvector).norm();
    if (out.residual < tol) return out;
    v = out.eigenvector;
  }
  throw ConvergenceError("Lanczos did not converge", out.residual);
}

std::vector<cplx> embed_sector_vector(const SectorBasis& basis, const Eigen::VectorXd& v) {
  std::vector<cplx> amps(std::size_t{1} << basis.n_modes(), cplx{0.0, 0.0});
  for (std::size_t i = 0; i < basis.size(); ++i) amps[basis.mask(i)] = v(static_cast<Eigen::Index>(i));
  return amps;
}

FciResult fci_ground_state(const IntegralSet& ints, int n_electrons, int two_sz) {
  const std::size_t modes = 2 * ints.n_spatial();
  if (modes > kFciMaxModes)
    throw ValidationError("FCI limited to " + std::to_string(kFciMaxModes) + " spin orbitals, got " +
                          std::to_string(modes));
  if (n_electrons < 0 || static_cast<std::size_t>(n_electrons) > modes)
    throw ValidationError("electron count out of range for FCI");
  SectorBasis basis(modes, n_electrons, two_sz);
  const Eigen::MatrixXd h = sector_hamiltonian(qubit_hamiltonian(ints), basis);

  Eigen::VectorXd ground;
  double energy = 0.0;
  if (basis.size() < kDenseSectorLimit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    if (eig.info() != Eigen::Success) throw Error("FCI diagonalization failed");
    energy = eig.eigenvalues()(0);
    ground = eig.eigenvectors().col(0);
  } else {
    // HF-like determinant (lowest modes filled) with a small uniform admixture
    // so the start vector is not confined to one symmetry block.
    const auto dim = static_cast<Eigen::Index>(basis.size());
    Eigen::VectorXd start = Eigen::VectorXd::Constant(dim, 1e-2 / std::sqrt(static_cast<double>(dim)));
    const std::int64_t hf = basis.find((std::uint64_t{1} << n_electrons) - 1);
    start(hf >= 0 ? hf : 0) += 1.0;
    auto lz = lanczos_lowest(h, start);
    energy = lz.eigenvalue;
    ground = std::move(lz.eigenvector);
  }
  Eigen::Index imax = 0;
  ground.cwiseAbs().maxCoeff(&imax);
  if (ground(imax) < 0.0) ground = -ground;

  RdmPair rdms = rdms_from_amplitudes(embed_sector_vector(basis, ground), ints.n_spatial());
  return FciResult{energy, std::move(rdms), std::move(ground), std::move(basis)};
}

}  // namespace qdmet
