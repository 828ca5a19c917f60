#include "qdmet/rdm.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "qdmet/error.hpp"

namespace qdmet {

namespace {

inline double jw_sign(std::uint64_t state, std::size_t mode) {
  const std::uint64_t below = state & ((std::uint64_t{1} << mode) - 1);
  return (__builtin_popcountll(below) & 1) ? -1.0 : 1.0;
}

inline bool occupied(std::uint64_t state, std::size_t mode) { return (state >> mode) & 1U; }

}  // namespace

RdmPair rdms_from_amplitudes(std::span<const kernels::cplx> amps, std::size_t n) {
  const std::size_t modes = 2 * n;
  if (amps.size() != (std::size_t{1} << modes))
    throw ValidationError("statevector size does not match " + std::to_string(n) +
                          " spatial orbitals");
  RdmPair out;
  const auto dim = static_cast<Eigen::Index>(n);
  out.one_rdm = Eigen::MatrixXd::Zero(dim, dim);
  out.two_rdm = Tensor4(n);

  for (std::uint64_t b = 0; b < amps.size(); ++b) {
    const kernels::cplx ket = amps[b];
    if (ket == kernels::cplx{0.0, 0.0}) continue;

    // a+_i a_j
    for (std::size_t j = 0; j < modes; ++j) {
      if (!occupied(b, j)) continue;
      const std::uint64_t bj = b ^ (std::uint64_t{1} << j);
      const double sj = jw_sign(b, j);
      for (std::size_t i = j % 2; i < modes; i += 2) {
        if (occupied(bj, i)) continue;
        const std::uint64_t target = bj ^ (std::uint64_t{1} << i);
        const kernels::cplx bra = amps[target];
        if (bra == kernels::cplx{0.0, 0.0}) continue;
        out.one_rdm(static_cast<Eigen::Index>(i / 2), static_cast<Eigen::Index>(j / 2)) +=
            sj * jw_sign(bj, i) * (std::conj(bra) * ket).real();
      }
    }

    // a+_i a+_k a_l a_j with spin(i) = spin(j), spin(k) = spin(l)
    for (std::size_t j = 0; j < modes; ++j) {
      if (!occupied(b, j)) continue;
      const std::uint64_t bj = b ^ (std::uint64_t{1} << j);
      const double sj = jw_sign(b, j);
      for (std::size_t l = 0; l < modes; ++l) {
        if (!occupied(bj, l)) continue;
        const std::uint64_t bl = bj ^ (std::uint64_t{1} << l);
        const double sl = sj * jw_sign(bj, l);
        for (std::size_t k = l % 2; k < modes; k += 2) {
          if (occupied(bl, k)) continue;
          const std::uint64_t bk = bl ^ (std::uint64_t{1} << k);
          const double sk = sl * jw_sign(bl, k);
          for (std::size_t i = j % 2; i < modes; i += 2) {
            if (occupied(bk, i)) continue;
            const std::uint64_t target = bk ^ (std::uint64_t{1} << i);
            const kernels::cplx bra = amps[target];
            if (bra == kernels::cplx{0.0, 0.0}) continue;
            out.two_rdm(i / 2, k / 2, l / 2, j / 2) +=
                sk * jw_sign(bk, i) * (std::conj(bra) * ket).real();
          }
        }
      }
    }
  }
  return out;
}

RdmPair rotate_rdms(const RdmPair& rdms, const Eigen::MatrixXd& c) {
  const std::size_t n = rdms.n_orbitals();
  if (static_cast<std::size_t>(c.cols()) != n)
    throw ValidationError("rotation columns do not match the RDM dimension");
  const auto m = static_cast<std::size_t>(c.rows());
  RdmPair out;
  out.one_rdm = c * rdms.one_rdm * c.transpose();

  // One index at a time: t[a..][x] = sum_y C(x, y) in[a..][y], rotating slots.
  std::vector<double> cur(rdms.two_rdm.data().begin(), rdms.two_rdm.data().end());
  std::size_t dims[4] = {n, n, n, n};
  for (int pass = 0; pass < 4; ++pass) {
    const std::size_t d0 = dims[0], d1 = dims[1], d2 = dims[2], d3 = dims[3];
    std::vector<double> next(m * d0 * d1 * d2, 0.0);
    for (std::size_t a = 0; a < d0; ++a)
      for (std::size_t b = 0; b < d1; ++b)
        for (std::size_t e = 0; e < d2; ++e) {
          const double* src = &cur[((a * d1 + b) * d2 + e) * d3];
          for (std::size_t x = 0; x < m; ++x) {
            double sum = 0.0;
            for (std::size_t y = 0; y < d3; ++y)
              sum += c(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) * src[y];
            next[((x * d0 + a) * d1 + b) * d2 + e] = sum;
          }
        }
    cur = std::move(next);
    dims[3] = d2;
    dims[2] = d1;
    dims[1] = d0;
    dims[0] = m;
  }
  out.two_rdm = Tensor4(m);
  std::copy(cur.begin(), cur.end(), out.two_rdm.data().begin());
  return out;
}

double energy_from_rdms(const IntegralSet& ints, const RdmPair& rdms) {
  const std::size_t n = ints.n_spatial();
  if (rdms.n_orbitals() != n) throw ValidationError("RDM dimension does not match integrals");
  double e = ints.core_energy() + ints.one_body().cwiseProduct(rdms.one_rdm).sum();
  const auto& eri = ints.two_body();
  double e2 = 0.0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q)
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t s = 0; s < n; ++s) e2 += eri(p, q, r, s) * rdms.two_rdm(p, r, s, q);
  return e + 0.5 * e2;
}

RdmDiagnostics diagnose(const RdmPair& rdms, double n_electrons) {
  RdmDiagnostics d;
  const std::size_t n = rdms.n_orbitals();
  if (n == 0) return d;
  d.trace = rdms.one_rdm.trace();
  d.asymmetry = (rdms.one_rdm - rdms.one_rdm.transpose()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rdms.one_rdm);
  d.min_occupation = eig.eigenvalues().minCoeff();
  d.max_occupation = eig.eigenvalues().maxCoeff();
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t s = 0; s < n; ++s) {
      double sum = 0.0;
      for (std::size_t q = 0; q < n; ++q) sum += rdms.two_rdm(p, q, q, s);
      const double expected =
          (n_electrons - 1.0) * rdms.one_rdm(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(s));
      d.partial_trace_error = std::max(d.partial_trace_error, std::abs(sum - expected));
    }
  return d;
}

void check_rdm_invariants(const RdmPair& rdms, double n_electrons, double tol) {
  const auto d = diagnose(rdms, n_electrons);
  auto fail = [](const std::string& what) { throw ValidationError("RDM invariant violated: " + what); };
  if (std::abs(d.trace - n_electrons) > tol)
    fail("trace " + std::to_string(d.trace) + " != " + std::to_string(n_electrons));
  if (d.asymmetry > tol) fail("1-RDM not symmetric");
  if (d.min_occupation < -tol || d.max_occupation > 2.0 + tol) fail("occupation outside [0, 2]");
  if (d.partial_trace_error > tol) fail("partial trace of the 2-RDM");
}

}  // namespace qdmet
