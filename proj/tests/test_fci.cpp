#include <gtest/gtest.h>

#include <bit>
#include <random>

#include "qdmet/error.hpp"
#include "qdmet/fci.hpp"
#include "qdmet/meanfield.hpp"
#include "qdmet/rdm.hpp"
#include "test_support.hpp"

using namespace qdmet;
using namespace qdmet::testing;

namespace {

IntegralSet single_orbital() {
  Eigen::MatrixXd d(1, 1);
  d << -1.0;
  TwoBodyTensor eri(1);
  eri.set(0, 0, 0, 0, 0.5);
  return IntegralSet(2, 0.3, d, eri);
}

/// RDMs of a full-register state from dense ladder matrices.
RdmPair oracle_rdms(const std::vector<cplx>& amps, std::size_t n) {
  const std::size_t modes = 2 * n;
  Dense v(amps.size(), 1);
  for (std::size_t i = 0; i < amps.size(); ++i) v(static_cast<Eigen::Index>(i), 0) = amps[i];
  std::vector<Dense> a(modes);
  for (std::size_t j = 0; j < modes; ++j) a[j] = annihilator(j, modes);
  RdmPair out{Eigen::MatrixXd::Zero(n, n), Tensor4(n)};
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q)
      for (std::size_t x = 0; x < 2; ++x)
        out.one_rdm(p, q) += (v.adjoint() * a[2 * p + x].adjoint() * a[2 * q + x] * v)(0, 0).real();
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q)
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t s = 0; s < n; ++s)
          for (std::size_t x = 0; x < 2; ++x)
            for (std::size_t y = 0; y < 2; ++y)
              out.two_rdm(p, q, r, s) += (v.adjoint() * a[2 * p + x].adjoint() * a[2 * q + y].adjoint() *
                                          a[2 * r + y] * a[2 * s + x] * v)(0, 0)
                                             .real();
  return out;
}

}  // namespace

TEST(SectorBasis, EnumeratesSortedMasks) {
  const SectorBasis b(4, 2, 0);
  ASSERT_EQ(b.size(), 4u);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(std::popcount(b.mask(i)), 2);
    EXPECT_EQ(std::popcount(b.mask(i) & 0x5u), 1);  // one alpha
    EXPECT_EQ(b.find(b.mask(i)), static_cast<std::int64_t>(i));
    if (i) EXPECT_LT(b.mask(i - 1), b.mask(i));
  }
  EXPECT_EQ(b.find(0b0101), -1);
  EXPECT_EQ(SectorBasis(4, 2).size(), 6u);
  EXPECT_THROW(SectorBasis(4, 5, 1), ValidationError);
  EXPECT_THROW(SectorBasis(4, 2, 4), ValidationError);
}

TEST(SectorHamiltonian, NumberOperatorIsTwiceIdentity) {
  FermionOperator number(4);
  for (std::size_t j = 0; j < 4; ++j) number.add_term(1.0, {create(j), annihilate(j)});
  const SectorBasis basis(4, 2);
  const Eigen::MatrixXd m = sector_hamiltonian(jordan_wigner(number), basis);
  EXPECT_LE((m - 2 * Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SectorHamiltonian, TwoModeHopping) {
  // One particle in two modes: basis |01> (mode 0) and |10> (mode 1). The
  // hop carries no JW string between adjacent modes, so both elements are +1.
  FermionOperator hop(2);
  hop.add_term(1.0, {create(1), annihilate(0)});
  hop.add_term(1.0, {create(0), annihilate(1)});
  const Eigen::MatrixXd m = sector_hamiltonian(jordan_wigner(hop), SectorBasis(2, 1));
  Eigen::MatrixXd expected(2, 2);
  expected << 0, 1, 1, 0;
  EXPECT_LE((m - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SectorHamiltonian, RandomConservingOperatorMatchesDenseRestriction) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-1, 1);
  const std::size_t n = 3;
  for (int trial = 0; trial < 10; ++trial) {
    FermionOperator op(n);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q) {
        const double c = u(rng);
        op.add_term(c, {create(p), annihilate(q)});
        op.add_term(c, {create(q), annihilate(p)});
      }
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < p; ++q)
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t s = 0; s < r; ++s) {
            const double c = u(rng);
            op.add_term(c, {create(p), create(q), annihilate(r), annihilate(s)});
            op.add_term(c, {create(s), create(r), annihilate(q), annihilate(p)});
          }
    const Dense full = fermion_dense(op);
    for (int particles = 0; particles <= 3; ++particles) {
      const SectorBasis basis(n, particles);
      const Eigen::MatrixXd m = sector_hamiltonian(jordan_wigner(op), basis);
      for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = 0; j < basis.size(); ++j)
          EXPECT_NEAR(m(i, j), full(basis.mask(i), basis.mask(j)).real(), 1e-12);
      EXPECT_LE((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(SectorHamiltonian, RejectsNonConservingOperator) {
  FermionOperator op(2);
  op.add_term(1.0, {create(0)});
  op.add_term(1.0, {annihilate(0)});
  EXPECT_THROW(sector_hamiltonian(jordan_wigner(op), SectorBasis(2, 1)), ValidationError);
}

TEST(Fci, SingleOrbital) {
  const FciResult r = fci_ground_state(single_orbital());
  EXPECT_NEAR(r.energy, -1.2, 1e-14);
}

TEST(Fci, HubbardDimerClosedForm) {
  for (double u : {0.0, 1.0, 4.0, 10.0}) {
    const FciResult r = fci_ground_state(build_hubbard({2, 1.0, u, false, -1}));
    EXPECT_NEAR(r.energy, dimer_exact(u, 1.0), 1e-12) << "U=" << u;
  }
}

TEST(Fci, NonInteractingChainIsOrbitalFilling) {
  const IntegralSet ints = build_hubbard({4, 1.0, 0.0, false, -1});
  const Eigen::VectorXd eps = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ints.one_body()).eigenvalues();
  EXPECT_NEAR(fci_ground_state(ints).energy, 2 * (eps(0) + eps(1)), 1e-12);
}

TEST(Fci, MatchesReferenceFixtures) {
  for (const std::string& name : fixture_names()) {
    const FciResult r = fci_ground_state(read_fcidump_file(data_path(name + ".fcidump")));
    EXPECT_NEAR(r.energy, reference_energy(name, "fci"), 1e-9) << name;
  }
}

TEST(Fci, MatchesDirectLadderHamiltonian) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 3; ++trial) {
    const IntegralSet ints = random_integrals(3, 2 + 2 * (trial % 2), rng);
    const double oracle = sector_ground_energy(hamiltonian_dense(ints), 6, ints.n_electrons(), 0);
    EXPECT_NEAR(fci_ground_state(ints).energy, oracle, 1e-10);
  }
  const IntegralSet open = random_integrals(3, 3, rng);
  EXPECT_NEAR(fci_ground_state(open, 3, 1).energy, sector_ground_energy(hamiltonian_dense(open), 6, 3, 1),
              1e-10);
}

TEST(Fci, RotationInvariance) {
  std::mt19937_64 rng(71);
  for (const std::string& name : {"h4_gap1.0", "h4_gap2.0"}) {
    const IntegralSet ints = read_fcidump_file(data_path(std::string(name) + ".fcidump"));
    const Eigen::MatrixXd q = random_orthogonal(ints.n_spatial(), rng);
    EXPECT_NEAR(fci_ground_state(rotate_integrals(ints, q)).energy, fci_ground_state(ints).energy, 1e-9);
  }
  const IntegralSet hub = build_hubbard({6, 1.0, 4.0, false, -1});
  const Eigen::MatrixXd q = random_orthogonal(6, rng);
  EXPECT_NEAR(fci_ground_state(rotate_integrals(hub, q)).energy, fci_ground_state(hub).energy, 1e-9);
}

TEST(Fci, RdmsMatchLadderOracle) {
  std::mt19937_64 rng(73);
  const IntegralSet ints = random_integrals(3, 2, rng);
  const FciResult r = fci_ground_state(ints);
  const RdmPair oracle = oracle_rdms(embed_sector_vector(r.basis, r.ground_vector), 3);
  EXPECT_LE((r.rdms.one_rdm - oracle.one_rdm).cwiseAbs().maxCoeff(), 1e-12);
  for (std::size_t i = 0; i < oracle.two_rdm.data().size(); ++i)
    EXPECT_NEAR(r.rdms.two_rdm.data()[i], oracle.two_rdm.data()[i], 1e-12);
}

TEST(Fci, RdmInvariantsAndEnergyClosure) {
  std::vector<IntegralSet> cases;
  for (const std::string& name : fixture_names()) cases.push_back(read_fcidump_file(data_path(name + ".fcidump")));
  cases.push_back(build_hubbard({6, 1.0, 4.0, false, -1}));
  cases.push_back(build_hubbard({6, 1.0, 2.0, true, -1}));
  std::mt19937_64 rng(79);
  cases.push_back(random_integrals(4, 4, rng));
  for (const IntegralSet& ints : cases) {
    const FciResult r = fci_ground_state(ints);
    EXPECT_NO_THROW(check_rdm_invariants(r.rdms, ints.n_electrons(), 1e-8));
    EXPECT_NEAR(energy_from_rdms(ints, r.rdms), r.energy, 1e-10);
  }
}

TEST(Fci, BelowHartreeFockEnergy) {
  std::vector<IntegralSet> cases;
  for (const std::string& name : fixture_names()) cases.push_back(read_fcidump_file(data_path(name + ".fcidump")));
  for (double u : {0.5, 2.0, 8.0}) cases.push_back(build_hubbard({6, 1.0, u, false, -1}));
  for (const IntegralSet& ints : cases) {
    const MeanFieldState hf = run_rhf(ints);
    EXPECT_LE(fci_ground_state(ints).energy, hf.energy + 1e-12);
  }
}

TEST(Fci, LanczosAgreesWithDenseSolver) {
  // 8 orbitals, 6 electrons: sector dimension 3136 goes through Lanczos.
  const IntegralSet ints = build_hubbard({8, 1.0, 4.0, false, 6});
  const FciResult r = fci_ground_state(ints);
  EXPECT_GT(r.basis.size(), kDenseSectorLimit);
  const Eigen::MatrixXd h = sector_hamiltonian(qubit_hamiltonian(ints), r.basis);
  const double dense = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h, Eigen::EigenvaluesOnly).eigenvalues()(0);
  EXPECT_NEAR(r.energy, dense, 1e-9);
  EXPECT_NEAR(energy_from_rdms(ints, r.rdms), r.energy, 1e-9);

  const IntegralSet free = build_hubbard({8, 1.0, 0.0, false, -1});
  const Eigen::VectorXd eps = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(free.one_body()).eigenvalues();
  EXPECT_NEAR(fci_ground_state(free).energy, 2 * eps.head(4).sum(), 1e-9);

  Eigen::MatrixXd a = Eigen::MatrixXd::Random(300, 300);
  a = (a + a.transpose()).eval();
  const LanczosResult l = lanczos_lowest(a, Eigen::VectorXd::Ones(300));
  EXPECT_NEAR(l.eigenvalue, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues()(0), 1e-9);
}

TEST(Fci, GuardsAndErrors) {
  EXPECT_THROW(fci_ground_state(build_hubbard({9, 1.0, 1.0, false, -1})), ValidationError);
  EXPECT_THROW(fci_ground_state(build_hubbard({2, 1.0, 1.0, false, -1}), 2, 4), ValidationError);
}
