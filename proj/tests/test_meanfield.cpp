#include <gtest/gtest.h>

#include <random>

#include "qdmet/error.hpp"
#include "qdmet/meanfield.hpp"
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

void expect_state_invariants(const IntegralSet& ints, const MeanFieldState& m,
                             const Eigen::MatrixXd& u) {
  const auto n = static_cast<Eigen::Index>(ints.n_spatial());
  const Eigen::MatrixXd& c = m.coefficients;
  EXPECT_LE((c.transpose() * c - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(m.one_rdm.trace(), ints.n_electrons(), 1e-8);
  const Eigen::MatrixXd half = m.one_rdm / 2;
  EXPECT_LE((half * half - half).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE((m.one_rdm - m.one_rdm.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  for (Eigen::Index i = 1; i < n; ++i) EXPECT_LE(m.orbital_energies(i - 1), m.orbital_energies(i));

  // Fock matrix and energy from an independent contraction.
  Eigen::MatrixXd f = ints.one_body() + u;
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q < n; ++q)
      for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index s = 0; s < n; ++s)
          f(p, q) += m.one_rdm(r, s) * (ints.two_body()(p, q, r, s) - 0.5 * ints.two_body()(p, r, q, s));
  EXPECT_LE((f * m.one_rdm - m.one_rdm * f).cwiseAbs().maxCoeff(), 1e-6);
  const double e = ints.core_energy() + 0.5 * (m.one_rdm.cwiseProduct(ints.one_body() + u + f)).sum();
  EXPECT_NEAR(m.energy, e, 1e-9);
}

std::vector<HubbardParams> hubbard_suite() {
  std::vector<HubbardParams> out;
  for (std::size_t n : {2, 4, 6, 8})
    for (double u : {0.0, 1.0, 2.0, 4.0}) out.push_back({n, 1.0, u, false, -1});
  out.push_back({6, 1.0, 4.0, true, -1});
  out.push_back({10, 1.0, 2.0, true, -1});
  return out;
}

}  // namespace

TEST(Rhf, NonInteractingDimer) {
  const MeanFieldState m = run_rhf(build_hubbard({2, 1.0, 0.0, false, -1}));
  EXPECT_NEAR(m.energy, -2.0, 1e-12);
  EXPECT_LE((m.one_rdm - Eigen::MatrixXd::Ones(2, 2)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Rhf, InteractingDimerMatchesHandEvaluation) {
  // Bonding orbital (1,1)/sqrt2 doubly occupied: each site holds one electron,
  // <n_up n_dn> = 1/4 per site, so E = -2t + 2 * U/4.
  const double u = 4.0, t = 1.0;
  const MeanFieldState m = run_rhf(build_hubbard({2, t, u, false, -1}));
  EXPECT_NEAR(m.energy, -2 * t + u / 2, 1e-10);
  EXPECT_NEAR(m.energy, 0.0, 1e-10);
}

TEST(Rhf, SingleOrbital) {
  const MeanFieldState m = run_rhf(single_orbital());
  EXPECT_NEAR(m.energy, -1.2, 1e-14);
  EXPECT_EQ(m.n_occ_spatial, 1u);
}

TEST(Rhf, RejectsOddElectronCount) {
  EXPECT_THROW(run_rhf(build_hubbard({3, 1.0, 1.0, false, 3})), ValidationError);
}

TEST(Rhf, DegenerateFrontierIsAnError) {
  // 4-site ring at U=0: the two middle levels coincide at zero.
  EXPECT_THROW(run_rhf(build_hubbard({4, 1.0, 0.0, true, -1})), DegeneracyError);
}

TEST(Rhf, IterationBudgetIsAConvergenceError) {
  ScfConfig cfg;
  cfg.max_iter = 1;
  try {
    run_rhf(read_fcidump_file(data_path("h4_gap1.0.fcidump")), cfg);
    FAIL() << "converged in one iteration";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(Rhf, HubbardSuiteInvariants) {
  for (const HubbardParams& p : hubbard_suite()) {
    SCOPED_TRACE("n=" + std::to_string(p.n_sites) + " U=" + std::to_string(p.u));
    const IntegralSet ints = build_hubbard(p);
    const MeanFieldState m = run_rhf(ints);
    expect_state_invariants(ints, m, Eigen::MatrixXd::Zero(p.n_sites, p.n_sites));
  }
}

TEST(Rhf, DampedEnergyIsNonIncreasing) {
  for (const HubbardParams& p : hubbard_suite()) {
    SCOPED_TRACE("n=" + std::to_string(p.n_sites) + " U=" + std::to_string(p.u));
    const MeanFieldState m = run_rhf(build_hubbard(p));
    for (std::size_t i = 2; i < m.trace.size(); ++i)
      EXPECT_LE(m.trace[i].energy, m.trace[i - 1].energy + 1e-12) << "iteration " << i;
  }
}

TEST(Rhf, DiisReachesTheSameState) {
  for (const std::string& name : fixture_names()) {
    const IntegralSet ints = read_fcidump_file(data_path(name + ".fcidump"));
    ScfConfig diis;
    diis.use_diis = true;
    const MeanFieldState a = run_rhf(ints);
    const MeanFieldState b = run_rhf(ints, diis);
    EXPECT_NEAR(a.energy, b.energy, 1e-9) << name;
  }
}

TEST(Rhf, OneBodyOnlyIsOrbitalFilling) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const IntegralSet r = random_integrals(6, 4, rng);
    const IntegralSet ints(4, r.core_energy(), r.one_body(), TwoBodyTensor(6));
    const Eigen::VectorXd eps = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ints.one_body()).eigenvalues();
    const MeanFieldState m = run_rhf(ints);
    EXPECT_NEAR(m.energy, 2 * (eps(0) + eps(1)) + ints.core_energy(), 1e-10);
  }
}

TEST(Rhf, MatchesReferenceFixtures) {
  for (const std::string& name : fixture_names()) {
    const MeanFieldState m = run_rhf(read_fcidump_file(data_path(name + ".fcidump")));
    EXPECT_NEAR(m.energy, reference_energy(name, "rhf"), 1e-8) << name;
  }
}

TEST(Rhf, CorrelationPotentialKeepsInvariants) {
  const IntegralSet ints = build_hubbard({6, 1.0, 4.0, false, -1});
  const std::vector<OrbitalSet> blocks = {{0, 1}, {2, 3}, {4, 5}};
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(6, 6);
  u(0, 0) = 0.3;
  u(0, 1) = u(1, 0) = -0.1;
  u(3, 3) = -0.2;
  u(4, 5) = u(5, 4) = 0.05;
  const CorrelationPotential cp(u, blocks);
  const MeanFieldState m = run_rhf(ints, cp);
  expect_state_invariants(ints, m, u);
  EXPECT_GT(std::abs(m.energy - run_rhf(ints).energy), 1e-6);
}

TEST(CorrelationPotential, BlockStructureIsEnforced) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(4, 4);
  u(0, 2) = u(2, 0) = 0.1;
  EXPECT_THROW(CorrelationPotential(u, {{0, 1}, {2, 3}}), ValidationError);
  u(0, 2) = 0.0;
  EXPECT_THROW(CorrelationPotential(u, {{0, 1}, {2, 3}}), ValidationError);
  const CorrelationPotential z = CorrelationPotential::zero(4, {{0, 1}, {2, 3}});
  EXPECT_EQ(z.n_parameters(), 6u);
  const std::vector<double> params = {1, 2, 3, 4, 5, 6};
  const CorrelationPotential filled = z.with_parameters(params);
  EXPECT_EQ(filled.parameters(), params);
  EXPECT_EQ(filled.matrix(), filled.matrix().transpose());
}

TEST(RdmBlock, Examples) {
  const MeanFieldState dimer = run_rhf(build_hubbard({2, 1.0, 0.0, false, -1}));
  const Eigen::MatrixXd b = mean_field_rdm_block(dimer, {1}, {1});
  ASSERT_EQ(b.rows(), 1);
  EXPECT_NEAR(b(0, 0), 1.0, 1e-10);
  EXPECT_EQ(mean_field_rdm_block(dimer, {0, 1}, {0, 1}), dimer.one_rdm);
  EXPECT_THROW(mean_field_rdm_block(dimer, {2}, {0}), ValidationError);

  const MeanFieldState chain = run_rhf(build_hubbard({4, 1.0, 0.0, false, -1}));
  const Eigen::MatrixXd env = mean_field_rdm_block(chain, {1, 2, 3}, {1, 2, 3});
  ASSERT_EQ(env.rows(), 3);
  const Eigen::VectorXd occ = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(env).eigenvalues();
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_GE(occ(i), -1e-10);
    EXPECT_LE(occ(i), 2 + 1e-10);
  }
}

TEST(FixColumnSigns, LargestComponentPositive) {
  Eigen::MatrixXd v(3, 2);
  v << 0.1, -0.2, -0.9, 0.1, 0.3, 0.05;
  fix_column_signs(v);
  EXPECT_GT(v(1, 0), 0.0);
  EXPECT_GT(v(0, 1), 0.0);
}
