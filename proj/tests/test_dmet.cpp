#include <gtest/gtest.h>

#include <atomic>
#include <random>

#include "qdmet/dmet.hpp"
#include "qdmet/error.hpp"
#include "qdmet/fci.hpp"
#include "test_support.hpp"

using namespace qdmet;
using namespace qdmet::testing;

namespace {

FragmentPartition single_sites(std::size_t n) {
  FragmentPartition p;
  for (std::size_t i = 0; i < n; ++i) p.fragments.push_back({i});
  return p;
}

RdmPair rdm_with_diagonal(std::vector<double> diag) {
  RdmPair r{Eigen::MatrixXd::Zero(diag.size(), diag.size()), Tensor4(diag.size())};
  for (std::size_t i = 0; i < diag.size(); ++i) r.one_rdm(i, i) = diag[i];
  return r;
}

/// Hubbard chain with an uneven on-site potential, so mu = 0 is not the answer.
IntegralSet tilted_chain() {
  const IntegralSet h = build_hubbard({4, 1.0, 4.0, false, -1});
  Eigen::MatrixXd d = h.one_body();
  d(0, 0) = -0.4;
  d(1, 1) = 0.1;
  d(2, 2) = 0.25;
  return IntegralSet(4, 0.0, d, h.two_body());
}

/// Two non-interacting copies of `a` side by side.
IntegralSet two_copies(const IntegralSet& a) {
  const std::size_t n = a.n_spatial();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  d.topLeftCorner(n, n) = a.one_body();
  d.bottomRightCorner(n, n) = a.one_body();
  TwoBodyTensor eri(2 * n);
  for (std::size_t off : {std::size_t{0}, n})
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q)
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t s = 0; s < n; ++s) eri.set(p + off, q + off, r + off, s + off, a.two_body()(p, q, r, s));
  return IntegralSet(2 * a.n_electrons(), 2 * a.core_energy(), d, eri);
}

}  // namespace

TEST(Partition, Validation) {
  FragmentPartition p;
  EXPECT_THROW(p.validate(4, false), ValidationError);
  p.fragments = {{0, 1}, {1, 2}};
  EXPECT_THROW(p.validate(4, false), ValidationError);
  p.fragments = {{0, 1}, {}};
  EXPECT_THROW(p.validate(4, false), ValidationError);
  p.fragments = {{0, 1}, {4}};
  EXPECT_THROW(p.validate(4, false), ValidationError);
  p.fragments = {{0, 1}, {2}};
  EXPECT_NO_THROW(p.validate(4, false));
  EXPECT_THROW(p.validate(4, true), ValidationError);
  p.inactive = {{3}};
  EXPECT_THROW(p.validate(4, false), ValidationError);
  p.inactive = {{}, {2}};
  EXPECT_THROW(p.validate(4, false), ValidationError);
  p.inactive = {{}, {3}};
  EXPECT_NO_THROW(p.validate(4, true));
  EXPECT_EQ(p.all_inactive(), OrbitalSet{3});
}

TEST(Bath, DimerHasOneBathOrbital) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Ones(2, 2);
  const BathDecomposition b = build_bath(d, {0});
  ASSERT_EQ(b.n_bath(), 1u);
  EXPECT_EQ(b.n_core(), 0u);
  EXPECT_NEAR(b.bath_orbitals(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(b.bath_occupations(0), 1.0, 1e-15);
  EXPECT_EQ(b.environment, OrbitalSet{1});
}

TEST(Bath, DisconnectedFragmentHasNoBath) {
  // Fragment {0} doubly occupied, environment holds one electron pair in v.
  Eigen::Vector3d v(1.0, 2.0, -2.0);
  v.normalize();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(4, 4);
  d(0, 0) = 2.0;
  d.bottomRightCorner(3, 3) = 2.0 * v * v.transpose();
  const BathDecomposition b = build_bath(d, {0});
  EXPECT_EQ(b.n_bath(), 0u);
  EXPECT_EQ(b.n_core(), 1u);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(d.bottomRightCorner(3, 3)).eigenvalues();
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_TRUE(std::abs(ev(i)) < 1e-12 || std::abs(ev(i) - 2) < 1e-12);
}

TEST(Bath, SixSiteChainCountsMatchEnvironmentSpectrum) {
  const MeanFieldState mf = run_rhf(build_hubbard({6, 1.0, 4.0, false, -1}));
  const OrbitalSet frag = {0, 1};
  const BathDecomposition b = build_bath(mf.one_rdm, frag);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(mf.one_rdm.bottomRightCorner(4, 4)).eigenvalues();
  std::size_t bath = 0, core = 0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    if (ev(i) >= 2 - 1e-6) ++core;
    else if (ev(i) > 1e-6) ++bath;
  }
  EXPECT_EQ(b.n_bath(), bath);
  EXPECT_EQ(b.n_core(), core);
  EXPECT_EQ(b.n_bath(), 2u);
  EXPECT_EQ(b.n_core(), 1u);
  for (Eigen::Index i = 0; i < b.bath_occupations.size(); ++i) {
    EXPECT_GT(b.bath_occupations(i), 0.0);
    EXPECT_LT(b.bath_occupations(i), 2.0);
    if (i) EXPECT_GE(b.bath_occupations(i - 1), b.bath_occupations(i));
  }
  Eigen::MatrixXd all(4, 3);
  all << b.bath_orbitals, b.core_orbitals;
  EXPECT_LE((all.transpose() * all - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Bath, BoundAndErrors) {
  std::mt19937_64 rng(5);
  const IntegralSet ints = random_integrals(6, 6, rng);
  const MeanFieldState mf = run_rhf(ints, ScfConfig{.damping = 0.3, .use_diis = true});
  for (const OrbitalSet& frag : {OrbitalSet{0}, OrbitalSet{1, 4}, OrbitalSet{0, 2, 5}})
    EXPECT_LE(build_bath(mf.one_rdm, frag).n_bath(), frag.size());
  EXPECT_THROW(build_bath(mf.one_rdm, {0, 1, 2, 3, 4, 5}), ValidationError);
  Eigen::MatrixXd asym = mf.one_rdm;
  asym(0, 1) += 0.1;
  EXPECT_THROW(build_bath(asym, {0}), ValidationError);
  EXPECT_THROW(build_bath(mf.one_rdm, {7}), ValidationError);
}

TEST(Embedding, FullSpaceDimerReproducesFci) {
  const IntegralSet ints = build_hubbard({2, 1.0, 4.0, false, -1});
  const MeanFieldState mf = run_rhf(ints);
  const EmbeddingProblem p = build_embedding_hamiltonian(ints, {0}, build_bath(mf.one_rdm, {0}), 0.0);
  EXPECT_EQ(p.n_emb_electrons, 2);
  EXPECT_EQ(p.n_qubits(), 4u);
  EXPECT_LE((p.projector.transpose() * p.projector - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(fci_ground_state(p.ints).energy, fci_ground_state(ints).energy, 1e-12);
  EXPECT_NEAR(fci_ground_state(p.ints).energy, dimer_exact(4.0, 1.0), 1e-12);
}

TEST(Embedding, ChemicalPotentialShiftsOneEntry) {
  const IntegralSet ints = build_hubbard({2, 1.0, 4.0, false, -1});
  const MeanFieldState mf = run_rhf(ints);
  const BathDecomposition b = build_bath(mf.one_rdm, {0});
  const EmbeddingProblem p0 = build_embedding_hamiltonian(ints, {0}, b, 0.0);
  const EmbeddingProblem p1 = build_embedding_hamiltonian(ints, {0}, b, 0.1);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2, 2);
  expected(0, 0) = -0.1;
  EXPECT_LE((p1.ints.one_body() - p0.ints.one_body() - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(p0.ints.two_body(), p1.ints.two_body());
}

TEST(Embedding, NonInteractingFragmentOccupationMatchesMeanField) {
  const IntegralSet ints = build_hubbard({4, 1.0, 0.0, false, -1});
  const MeanFieldState mf = run_rhf(ints);
  const EmbeddingProblem p = build_embedding_hamiltonian(ints, {0}, build_bath(mf.one_rdm, {0}), 0.0);
  const FciResult r = fci_ground_state(p.ints, p.n_emb_electrons, 0);
  EXPECT_NEAR(r.rdms.one_rdm(0, 0), mf.one_rdm(0, 0), 1e-8);
}

TEST(Embedding, InvariantsOnFixtures) {
  for (const std::string& name : {"h4_gap1.0", "h4_gap3.0"}) {
    const IntegralSet ints = read_fcidump_file(data_path(std::string(name) + ".fcidump"));
    const MeanFieldState mf = run_rhf(ints);
    for (const OrbitalSet& frag : {OrbitalSet{0}, OrbitalSet{1}, OrbitalSet{0, 1}, OrbitalSet{1, 2}}) {
      const BathDecomposition b = build_bath(mf.one_rdm, frag);
      const EmbeddingProblem p = build_embedding_hamiltonian(ints, frag, b, 0.05);
      const auto m = static_cast<Eigen::Index>(p.n_orbitals());
      EXPECT_LE((p.projector.transpose() * p.projector - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_EQ(p.n_emb_electrons, ints.n_electrons() - 2 * static_cast<int>(b.n_core()));
      EXPECT_GE(p.n_emb_electrons, 0);
      EXPECT_LE(p.n_emb_electrons, 2 * static_cast<int>(p.n_orbitals()));
      EXPECT_LE((p.ints.one_body() - p.ints.one_body().transpose()).cwiseAbs().maxCoeff(), 1e-12);
      // Mean-field energy of the embedded problem plus nothing else equals the full RHF energy at mu = 0.
      const EmbeddingProblem p0 = build_embedding_hamiltonian(ints, frag, b, 0.0);
      const MeanFieldState emb = run_rhf(p0.ints);
      EXPECT_NEAR(emb.energy, mf.energy, 1e-8) << name;
    }
  }
}

TEST(ElectronDeviation, Examples) {
  FragmentPartition one;
  one.fragments = {{0, 1}};
  EXPECT_DOUBLE_EQ(electron_deviation({rdm_with_diagonal({1.0, 1.0, 0.7})}, one, 0.0, 2.0), 0.0);
  const double over = electron_deviation({rdm_with_diagonal({1.1, 1.1, 0.0})}, one, 0.0, 2.0);
  EXPECT_NEAR(over, 0.2, 1e-15);
  EXPECT_NEAR(over * over, 0.04, 1e-15);

  FragmentPartition two;
  two.fragments = {{0}, {1}};
  const double add = electron_deviation({rdm_with_diagonal({1.1, 0.5}), rdm_with_diagonal({1.1, 0.5})}, two, 0.0, 2.0);
  EXPECT_NEAR(add, 0.2, 1e-15);
  EXPECT_NEAR(add * add, 0.04, 1e-15);
  EXPECT_NEAR(electron_deviation({rdm_with_diagonal({1.0, 0.3})}, FragmentPartition{{{0}}, {{1}}}, 1.0, 2.0), 0.0, 1e-15);
}

TEST(DemocraticWeight, SumsToOneAcrossOwningFragments) {
  // Two fragments {0,1} and {2,3} of a 4-orbital system. In fragment A's
  // embedding numbering its own orbitals come first; any other orbital is
  // mapped past the fragment block.
  const std::vector<OrbitalSet> frags = {{0, 1}, {2, 3}};
  auto local = [&](std::size_t a, std::size_t p) -> std::size_t {
    for (std::size_t i = 0; i < frags[a].size(); ++i)
      if (frags[a][i] == p) return i;
    return frags[a].size();
  };
  for (std::size_t p = 0; p < 4; ++p)
    for (std::size_t q = 0; q < 4; ++q) {
      double one = 0.0;
      for (std::size_t a = 0; a < 2; ++a) {
        const std::size_t idx[2] = {local(a, p), local(a, q)};
        one += democratic_weight(idx, 2);
      }
      EXPECT_DOUBLE_EQ(one, 1.0);
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t s = 0; s < 4; ++s) {
          double two = 0.0;
          for (std::size_t a = 0; a < 2; ++a) {
            const std::size_t idx[4] = {local(a, p), local(a, q), local(a, r), local(a, s)};
            two += democratic_weight(idx, 2);
          }
          EXPECT_DOUBLE_EQ(two, 1.0);
        }
    }
}

TEST(FitCost, Examples) {
  FragmentPartition p;
  p.fragments = {{0}, {1}};
  const Eigen::MatrixXd d = Eigen::MatrixXd::Ones(2, 2);
  // Embedded fragment blocks equal to mean-field blocks.
  EXPECT_DOUBLE_EQ(correlation_fit_cost({rdm_with_diagonal({1.0, 1.0}), rdm_with_diagonal({1.0, 1.0})}, d, d, p, 1.0), 0.0);
  EXPECT_NEAR(correlation_fit_cost({rdm_with_diagonal({1.1, 1.0}), rdm_with_diagonal({1.0, 1.0})}, d, d, p, 1.0), 0.01, 1e-15);

  Eigen::MatrixXd other = d;
  other(1, 1) = 0.5;
  const std::vector<RdmPair> rdms = {rdm_with_diagonal({1.1, 1.0}), rdm_with_diagonal({1.0, 1.0})};
  EXPECT_EQ(correlation_fit_cost(rdms, d, other, p, 1.0), correlation_fit_cost(rdms, d, other, p, 7.0));

  FragmentPartition with_inactive;
  with_inactive.fragments = {{0}};
  with_inactive.inactive = {{1}};
  EXPECT_NEAR(correlation_fit_cost({rdm_with_diagonal({1.0, 1.0})}, d, other, with_inactive, 2.0), 2.0 * 0.25, 1e-15);
}

TEST(MuLoop, SymmetricChainConvergesImmediately) {
  const DmetResult r = optimize_mu(build_hubbard({6, 1.0, 4.0, false, -1}), single_sites(6), make_fci_solver(), {});
  EXPECT_TRUE(r.converged);
  ASSERT_EQ(r.iterations.size(), 1u);
  EXPECT_EQ(r.mu_star, 0.0);
  EXPECT_LT(std::abs(r.final_deviation()), 1e-5);
}

TEST(MuLoop, DimerConverges) {
  const IntegralSet ints = build_hubbard({2, 1.0, 4.0, false, -1});
  const DmetResult r = optimize_mu(ints, single_sites(2), make_fci_solver(), {});
  EXPECT_TRUE(r.converged);
  double total = 0.0;
  for (const auto& f : r.fragments) total += f.rdms.one_rdm(0, 0);
  EXPECT_NEAR(total, 2.0, 1e-5);
}

TEST(MuLoop, TiltedChainNeedsNewtonSteps) {
  const IntegralSet ints = tilted_chain();
  std::vector<MuIteration> seen;
  DmetConfig cfg;
  cfg.on_iteration = [&](const MuIteration& it) { seen.push_back(it); };
  const DmetResult r = optimize_mu(ints, single_sites(4), make_fci_solver(), cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_GT(r.iterations.size(), 1u);
  EXPECT_LT(std::abs(r.final_deviation()), cfg.tau);
  EXPECT_NE(r.mu_star, 0.0);
  ASSERT_EQ(seen.size(), r.iterations.size());
  for (std::size_t i = 0; i < seen.size(); ++i) {
    EXPECT_EQ(seen[i].iteration, static_cast<int>(i));
    EXPECT_EQ(seen[i].fragment_energies.size(), 4u);
  }
}

TEST(MuLoop, ZeroIterationBudget) {
  DmetConfig cfg;
  cfg.mu_max_iter = 0;
  const DmetResult r = optimize_mu(tilted_chain(), single_sites(4), make_fci_solver(), cfg);
  ASSERT_GT(std::abs(r.final_deviation()), cfg.tau);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations.size(), 1u);
}

TEST(MuLoop, FlatResponseStalls) {
  // A solver that undoes the chemical potential: the count never moves.
  const FragmentSolver deaf = [](const EmbeddingProblem& p) {
    Eigen::MatrixXd d = p.ints.one_body();
    for (std::size_t r = 0; r < p.n_fragment; ++r) d(r, r) += p.mu;
    const IntegralSet bare(p.ints.n_electrons(), p.ints.core_energy(), d, p.ints.two_body());
    const FciResult f = fci_ground_state(bare, p.n_emb_electrons, 0);
    return SolverOutput{f.energy, f.rdms};
  };
  try {
    optimize_mu(tilted_chain(), single_sites(4), deaf, {});
    FAIL() << "no stall reported";
  } catch (const MuStallError& e) {
    EXPECT_EQ(e.trace().size(), 1u);
  }
}

TEST(MuLoop, SolverFailureNamesFragment) {
  const FragmentSolver flaky = [](const EmbeddingProblem& p) -> SolverOutput {
    if (p.projector(2, 0) == 1.0) throw Error("solver exploded");
    const FciResult f = fci_ground_state(p.ints, p.n_emb_electrons, 0);
    return SolverOutput{f.energy, f.rdms};
  };
  for (bool parallel : {true, false}) {
    DmetConfig cfg;
    cfg.parallel_fragments = parallel;
    try {
      optimize_mu(build_hubbard({4, 1.0, 4.0, false, -1}), single_sites(4), flaky, cfg);
      FAIL() << "error swallowed";
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find("fragment 2"), std::string::npos) << e.what();
    }
  }
}

TEST(MuLoop, BadSolverRdmsAreRejected) {
  const FragmentSolver broken = [](const EmbeddingProblem& p) {
    FciResult f = fci_ground_state(p.ints, p.n_emb_electrons, 0);
    f.rdms.one_rdm(0, 0) += 0.5;
    return SolverOutput{f.energy, f.rdms};
  };
  EXPECT_THROW(optimize_mu(build_hubbard({4, 1.0, 4.0, false, -1}), single_sites(4), broken, {}), ValidationError);
}

TEST(DemocraticEnergy, ActiveSpaceEqualsSolverEnergy) {
  DmetConfig cfg;
  cfg.mode = DmetMode::active_space;
  const IntegralSet ints = read_fcidump_file(data_path("h4_gap1.5.fcidump"));
  FragmentPartition p;
  p.fragments = {{1, 2}};
  const DmetResult r = run_dmet(ints, p, SolverKind::fci, cfg);
  ASSERT_EQ(r.fragments.size(), 1u);
  EXPECT_EQ(r.total_energy, r.fragments.front().solver_energy);
  EXPECT_EQ(r.mu_star, 0.0);
  EXPECT_TRUE(r.converged);
}

TEST(DemocraticEnergy, NonInteractingChainsEqualRhf) {
  for (std::size_t n : {4, 6, 8}) {
    const IntegralSet ints = build_hubbard({n, 1.0, 0.0, false, -1});
    const DmetResult r = run_dmet(ints, single_sites(n), SolverKind::fci);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.total_energy, run_rhf(ints).energy, 1e-8) << n;
  }
}

TEST(DemocraticEnergy, DimerIsExact) {
  const IntegralSet ints = build_hubbard({2, 1.0, 4.0, false, -1});
  const DmetResult r = run_dmet(ints, single_sites(2), SolverKind::fci);
  EXPECT_NEAR(r.total_energy, dimer_exact(4.0, 1.0), 1e-8);
  EXPECT_NEAR(r.total_energy, fci_ground_state(ints).energy, 1e-8);
  EXPECT_THROW(democratic_energy({}, single_sites(2), ints, run_rhf(ints).one_rdm), ValidationError);
}

TEST(DemocraticEnergy, InactiveOrbitalsContributeMeanField) {
  // Inactive orbitals in a non-interacting system: still exactly RHF.
  const IntegralSet ints = build_hubbard({6, 1.0, 0.0, false, -1});
  FragmentPartition p;
  p.fragments = {{0, 1}, {2, 3}};
  p.inactive = {{4}, {5}};
  const DmetResult r = run_dmet(ints, p, SolverKind::fci);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.total_energy, run_rhf(ints).energy, 1e-8);
}

TEST(RunDmet, ActiveSpaceFullFragmentIsFci) {
  DmetConfig cfg;
  cfg.mode = DmetMode::active_space;
  const IntegralSet ints = build_hubbard({4, 1.0, 4.0, false, -1});
  const DmetResult r = run_dmet(ints, FragmentPartition{{{0, 1, 2, 3}}, {}}, SolverKind::fci, cfg);
  EXPECT_NEAR(r.total_energy, fci_ground_state(ints).energy, 1e-8);
  EXPECT_EQ(r.n_qubits(), 8u);
}

TEST(RunDmet, DimerWithEsvqeMatchesFciSolver) {
  const IntegralSet ints = build_hubbard({2, 1.0, 4.0, false, -1});
  const DmetResult f = run_dmet(ints, single_sites(2), SolverKind::fci);
  const DmetResult v = run_dmet(ints, single_sites(2), SolverKind::esvqe);
  EXPECT_NEAR(v.total_energy, f.total_energy, 1e-6);
  EXPECT_NEAR(v.total_energy, -0.828427, 1e-6);
  EXPECT_EQ(v.n_qubits(), 4u);
}

TEST(RunDmet, TwoCopyDissociationIsExact) {
  for (const std::string& name : {"h2_0.7414", "h4_gap1.0"}) {
    const IntegralSet one = read_fcidump_file(data_path(std::string(name) + ".fcidump"));
    const IntegralSet both = two_copies(one);
    const std::size_t n = one.n_spatial();
    FragmentPartition p;
    p.fragments.resize(2);
    for (std::size_t i = 0; i < n; ++i) {
      p.fragments[0].push_back(i);
      p.fragments[1].push_back(n + i);
    }
    const DmetResult r = run_dmet(both, p, SolverKind::fci);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.total_energy, 2 * fci_ground_state(one).energy, 1e-8) << name;
  }
}

TEST(RunDmet, FixtureSuiteSatisfiesElectronConstraint) {
  for (const std::string& name : fixture_names()) {
    const IntegralSet ints = read_fcidump_file(data_path(name + ".fcidump"));
    const DmetResult r = run_dmet(ints, single_sites(ints.n_spatial()), SolverKind::fci);
    EXPECT_TRUE(r.converged) << name;
    const MeanFieldState mf = run_rhf(ints);
    std::vector<RdmPair> rdms;
    for (const auto& f : r.fragments) rdms.push_back(f.rdms);
    const double dev = electron_deviation(rdms, single_sites(ints.n_spatial()), 0.0, ints.n_electrons());
    EXPECT_LT(std::abs(dev), 1e-5) << name;
    EXPECT_EQ(dev, r.final_deviation());
    (void)mf;
  }
}

TEST(RunDmet, CorrelationFittingConverges) {
  DmetConfig cfg;
  cfg.mode = DmetMode::correlation_fitting;
  const IntegralSet ints = build_hubbard({6, 1.0, 4.0, true, -1});
  FragmentPartition p;
  p.fragments = {{0, 1}, {2, 3}, {4, 5}};
  const DmetResult r = run_dmet(ints, p, SolverKind::fci, cfg);
  EXPECT_TRUE(r.converged);
  ASSERT_GE(r.fit_cost_history.size(), 2u);
  EXPECT_LE(r.fit_cost_history.back(), r.fit_cost_history.front() + 1e-12);
  EXPECT_LT(std::abs(r.final_deviation()), cfg.tau);
  // The democratic estimate is not variational; only require that it picks up correlation.
  EXPECT_LT(r.total_energy, run_rhf(ints).energy);
}

TEST(RunDmet, CorrelationFittingSurfacesMeanFieldFailure) {
  DmetConfig cfg;
  cfg.mode = DmetMode::correlation_fitting;
  const IntegralSet ring = build_hubbard({4, 1.0, 0.0, true, -1});
  EXPECT_THROW(run_dmet(ring, single_sites(4), SolverKind::fci, cfg), DegeneracyError);
}

TEST(RunDmet, ConfigValidation) {
  DmetConfig cfg;
  cfg.tau = 0.0;
  EXPECT_THROW(run_dmet(build_hubbard({2, 1.0, 4.0, false, -1}), single_sites(2), SolverKind::fci, cfg), ValidationError);
  cfg = {};
  cfg.eta = 1.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  EXPECT_EQ(parse_dmet_mode("single-shot"), DmetMode::single_shot);
  EXPECT_EQ(to_string(parse_dmet_mode(to_string(DmetMode::correlation_fitting))), "correlation_fitting");
  EXPECT_THROW(parse_dmet_mode("bootstrap"), ValidationError);
  // Single-shot requires every orbital to be owned.
  EXPECT_THROW(run_dmet(build_hubbard({4, 1.0, 4.0, false, -1}), FragmentPartition{{{0}, {1}}, {}}, SolverKind::fci),
               ValidationError);
}

TEST(NelderMead, MinimizesRosenbrock) {
  const auto f = [](const std::vector<double>& x) {
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  const SimplexResult r = nelder_mead(f, {-1.2, 1.0}, 0.1, 1e-16, 20000);
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], 1.0, 1e-4);
  EXPECT_LT(r.value, 1e-8);
}
