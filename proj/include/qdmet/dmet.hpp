#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdmet/error.hpp"
#include "qdmet/integrals.hpp"
#include "qdmet/meanfield.hpp"
#include "qdmet/rdm.hpp"
#include "qdmet/vqe.hpp"

namespace qdmet {

/// Fragments (high-level orbitals) and their mean-field-only orbitals.
struct FragmentPartition {
  std::vector<OrbitalSet> fragments;
  std::vector<OrbitalSet> inactive;  ///< empty, or one (possibly empty) set per fragment

  /// Disjointness, range and non-emptiness checks. With `require_cover`, the
  /// fragments and inactive sets must together contain every orbital.
  void validate(std::size_t n_spatial, bool require_cover) const;
  /// Union of all inactive sets, ascending.
  OrbitalSet all_inactive() const;
};

struct BathDecomposition {
  OrbitalSet environment;             ///< full-basis indices of the environment rows
  Eigen::MatrixXd bath_orbitals;      ///< environment x n_bath
  Eigen::VectorXd bath_occupations;   ///< strictly inside (eta, 2 - eta)
  Eigen::MatrixXd core_orbitals;      ///< environment x n_core

  std::size_t n_bath() const noexcept { return static_cast<std::size_t>(bath_orbitals.cols()); }
  std::size_t n_core() const noexcept { return static_cast<std::size_t>(core_orbitals.cols()); }
};

/// Diagonalizes the environment block of the mean-field 1-RDM. Throws
/// ValidationError for an asymmetric matrix, a bad fragment or an empty
/// environment.
BathDecomposition build_bath(const Eigen::MatrixXd& one_rdm_mf, const OrbitalSet& fragment,
                             double eta = 1e-6);

/// Bath of a fragment that covers every orbital: no environment at all.
BathDecomposition empty_bath();

struct EmbeddingProblem {
  IntegralSet ints;              ///< fragment orbitals first, then bath; mu applied
  int n_emb_electrons = 0;
  std::size_t n_fragment = 0;
  std::size_t n_bath = 0;
  std::size_t n_core = 0;
  double mu = 0.0;
  Eigen::MatrixXd projector;     ///< L x (n_fragment + n_bath)
  Eigen::MatrixXd bare_one_body; ///< P^T d P
  Eigen::MatrixXd core_field;    ///< P^T (J - K/2)[D_core] P

  std::size_t n_orbitals() const noexcept { return n_fragment + n_bath; }
  std::size_t n_qubits() const noexcept { return 2 * n_orbitals(); }
};

/// Interacting-bath embedding Hamiltonian of `fragment`, with -mu added to
/// the fragment diagonal.
EmbeddingProblem build_embedding_hamiltonian(const IntegralSet& ints, const OrbitalSet& fragment,
                                             const BathDecomposition& bath, double mu);

struct SolverOutput {
  double energy = 0.0;
  RdmPair rdms;
};

/// High-level solver; must be safe to call concurrently on distinct problems.
using FragmentSolver = std::function<SolverOutput(const EmbeddingProblem&)>;

FragmentSolver make_fci_solver();
/// `observer` sees every solve (for trace logging); it may be called concurrently.
using EsvqeObserver = std::function<void(const EmbeddingProblem&, const EsvqeResult&)>;
FragmentSolver make_esvqe_solver(VqeConfig cfg = {}, EsvqeObserver observer = {});

/// sum_A sum_{r < L_A} D^A_rr + n_mf - n_occ.
double electron_deviation(const std::vector<RdmPair>& fragment_rdms,
                          const FragmentPartition& partition, double n_mf, double n_occ);

struct FragmentResult {
  EmbeddingProblem problem;
  RdmPair rdms;
  double solver_energy = 0.0;    ///< eigenvalue of the (mu-shifted) embedded Hamiltonian
  double fragment_energy = 0.0;  ///< democratic share E_A
};

/// Share of a term owned by a fragment: indices below n_fragment over all indices.
double democratic_weight(std::span<const std::size_t> indices, std::size_t n_fragment);

/// E_A: embedded one-body (d + v/2) and two-body terms weighted by the share
/// of their indices that are fragment positions.
double fragment_energy(const EmbeddingProblem& problem, const RdmPair& rdms);

/// Mean-field energy of the rows owned by `orbitals`:
/// sum_{p in orbitals} sum_q D_pq (d + G[D]/2)_pq.
double inactive_energy(const IntegralSet& ints, const Eigen::MatrixXd& one_rdm_mf,
                       const OrbitalSet& orbitals);

/// core_energy + sum_A E_A + inactive mean-field energy.
double democratic_energy(const std::vector<FragmentResult>& results,
                         const FragmentPartition& partition, const IntegralSet& ints,
                         const Eigen::MatrixXd& one_rdm_mf);

/// Fit cost of a correlation potential against fixed high-level RDMs.
double correlation_fit_cost(const std::vector<RdmPair>& fragment_rdms,
                            const Eigen::MatrixXd& one_rdm_u, const Eigen::MatrixXd& one_rdm_0,
                            const FragmentPartition& partition, double gamma);

enum class DmetMode { single_shot, active_space, correlation_fitting };

DmetMode parse_dmet_mode(const std::string& name);
std::string to_string(DmetMode mode);

struct MuIteration {
  int iteration = 0;
  double mu = 0.0;
  double deviation = 0.0;
  std::vector<double> fragment_energies;  ///< solver energies at this mu
  double wall_seconds = 0.0;
};

struct DmetConfig {
  double tau = 1e-5;
  double eta = 1e-6;
  int mu_max_iter = 50;
  double mu_step = 1e-3;
  double gamma = 1.0;
  DmetMode mode = DmetMode::single_shot;
  int fit_max_iter = 50;
  double fit_tol = 1e-8;
  bool parallel_fragments = true;
  ScfConfig scf;
  /// Called after every mu evaluation of the constraint loop.
  std::function<void(const MuIteration&)> on_iteration;

  void validate() const;
};

struct DmetResult {
  double total_energy = 0.0;
  double mu_star = 0.0;
  std::vector<FragmentResult> fragments;
  std::vector<MuIteration> iterations;
  bool converged = false;
  std::vector<double> fit_cost_history;
  CorrelationPotential correlation_potential;

  /// max_A 2 (L_A + n_bath_A).
  std::size_t n_qubits() const;
  double final_deviation() const { return iterations.empty() ? 0.0 : iterations.back().deviation; }
};

/// The mu response became flat; carries the loop trace.
class MuStallError : public ConvergenceError {
 public:
  MuStallError(const std::string& what, double residual, std::vector<MuIteration> trace)
      : ConvergenceError(what, residual), trace_(std::move(trace)) {}
  const std::vector<MuIteration>& trace() const noexcept { return trace_; }

 private:
  std::vector<MuIteration> trace_;
};

/// Solves every fragment at one mu with baths built from `one_rdm_mf`.
std::vector<FragmentResult> solve_fragments(const IntegralSet& ints,
                                            const FragmentPartition& partition,
                                            const Eigen::MatrixXd& one_rdm_mf, double mu,
                                            const FragmentSolver& solver, const DmetConfig& cfg);

/// Newton iteration on the signed electron deviation. The mean-field 1-RDM
/// (and so the baths) stays fixed. Returns the unconverged result when
/// mu_max_iter is reached; throws MuStallError on a flat response.
/// `one_rdm_ref` supplies the inactive-orbital electron count and energy.
DmetResult optimize_mu(const IntegralSet& ints, const FragmentPartition& partition,
                       const FragmentSolver& solver, const DmetConfig& cfg,
                       const Eigen::MatrixXd& one_rdm_mf, const Eigen::MatrixXd& one_rdm_ref);
DmetResult optimize_mu(const IntegralSet& ints, const FragmentPartition& partition,
                       const FragmentSolver& solver, const DmetConfig& cfg);

DmetResult run_dmet(const IntegralSet& ints, const FragmentPartition& partition,
                    const FragmentSolver& solver, const DmetConfig& cfg = {});

enum class SolverKind { fci, esvqe };
DmetResult run_dmet(const IntegralSet& ints, const FragmentPartition& partition, SolverKind kind,
                    const DmetConfig& cfg = {}, const VqeConfig& vqe = {});

/// Derivative-free simplex minimization.
struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0, double initial_step = 0.05, double ftol = 1e-12,
                          int max_evals = 4000);

}  // namespace qdmet
