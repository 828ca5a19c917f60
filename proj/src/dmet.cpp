#include "qdmet/dmet.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <set>

#include "qdmet/fci.hpp"
#include "qdmet/kernels/transform.hpp"

namespace qdmet {

namespace {

using Clock = std::chrono::steady_clock;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void check_symmetric(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) throw ValidationError(std::string(what) + " is not square");
  if (m.size() > 0 && (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw ValidationError(std::string(what) + " is not symmetric");
}

[[noreturn]] void rethrow_with_fragment(std::exception_ptr ep, std::size_t fragment) {
  const std::string tag = "fragment " + std::to_string(fragment) + ": ";
  try {
    std::rethrow_exception(ep);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(tag + e.what(), e.residual());
  } catch (const DegeneracyError& e) {
    throw DegeneracyError(tag + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(tag + e.what());
  } catch (const std::exception& e) {
    throw Error(tag + e.what());
  }
}

double diagonal_sum(const Eigen::MatrixXd& d, const OrbitalSet& orbitals) {
  double s = 0.0;
  for (std::size_t p : orbitals) s += d(idx(p), idx(p));
  return s;
}

}  // namespace

void FragmentPartition::validate(std::size_t n, bool require_cover) const {
  if (fragments.empty()) throw ValidationError("partition has no fragments");
  if (!inactive.empty() && inactive.size() != fragments.size())
    throw ValidationError("partition needs one inactive set per fragment (got " +
                          std::to_string(inactive.size()) + " for " +
                          std::to_string(fragments.size()) + " fragments)");
  std::vector<int> owner(n, -1);
  auto claim = [&](const OrbitalSet& set, const std::string& name) {
    for (std::size_t p : set) {
      if (p >= n)
        throw ValidationError(name + " orbital " + std::to_string(p) + " out of range (n=" +
                              std::to_string(n) + ")");
      if (owner[p] >= 0) throw ValidationError(name + " orbital " + std::to_string(p) + " is assigned twice");
      owner[p] = 1;
    }
  };
  for (std::size_t a = 0; a < fragments.size(); ++a) {
    if (fragments[a].empty()) throw ValidationError("fragment " + std::to_string(a) + " is empty");
    claim(fragments[a], "fragment " + std::to_string(a));
  }
  for (std::size_t a = 0; a < inactive.size(); ++a) claim(inactive[a], "inactive set " + std::to_string(a));
  if (require_cover)
    for (std::size_t p = 0; p < n; ++p)
      if (owner[p] < 0)
        throw ValidationError("orbital " + std::to_string(p) +
                              " belongs to no fragment or inactive set");
}

OrbitalSet FragmentPartition::all_inactive() const {
  OrbitalSet out;
  for (const auto& s : inactive) out.insert(out.end(), s.begin(), s.end());
  std::sort(out.begin(), out.end());
  return out;
}

BathDecomposition build_bath(const Eigen::MatrixXd& d, const OrbitalSet& fragment, double eta) {
  check_symmetric(d, "mean-field 1-RDM");
  if (!(eta > 0.0 && eta < 1.0)) throw ValidationError("bath threshold must lie in (0, 1)");
  const auto n = static_cast<std::size_t>(d.rows());
  std::vector<bool> in_fragment(n, false);
  for (std::size_t p : fragment) {
    if (p >= n) throw ValidationError("fragment orbital " + std::to_string(p) + " out of range");
    if (in_fragment[p]) throw ValidationError("fragment orbital " + std::to_string(p) + " repeated");
    in_fragment[p] = true;
  }
  BathDecomposition out;
  for (std::size_t p = 0; p < n; ++p)
    if (!in_fragment[p]) out.environment.push_back(p);
  if (out.environment.empty()) throw ValidationError("fragment covers every orbital; no environment");

  const auto ne = idx(out.environment.size());
  Eigen::MatrixXd env(ne, ne);
  for (Eigen::Index i = 0; i < ne; ++i)
    for (Eigen::Index j = 0; j < ne; ++j)
      env(i, j) = d(idx(out.environment[static_cast<std::size_t>(i)]),
                    idx(out.environment[static_cast<std::size_t>(j)]));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(env);
  if (eig.info() != Eigen::Success) throw Error("environment diagonalization failed");

  std::vector<Eigen::Index> bath, core;
  for (Eigen::Index k = ne; k-- > 0;) {  // descending eigenvalue
    const double w = eig.eigenvalues()(k);
    if (w >= 2.0 - eta)
      core.push_back(k);
    else if (w > eta)
      bath.push_back(k);
  }
  if (bath.size() > fragment.size())
    throw ValidationError("bath has " + std::to_string(bath.size()) + " orbitals for a fragment of " +
                          std::to_string(fragment.size()) + "; the mean-field 1-RDM is not idempotent");
  out.bath_orbitals.resize(ne, idx(bath.size()));
  out.bath_occupations.resize(idx(bath.size()));
  for (std::size_t b = 0; b < bath.size(); ++b) {
    out.bath_orbitals.col(idx(b)) = eig.eigenvectors().col(bath[b]);
    out.bath_occupations(idx(b)) = eig.eigenvalues()(bath[b]);
  }
  out.core_orbitals.resize(ne, idx(core.size()));
  for (std::size_t c = 0; c < core.size(); ++c) out.core_orbitals.col(idx(c)) = eig.eigenvectors().col(core[c]);
  fix_column_signs(out.bath_orbitals);
  fix_column_signs(out.core_orbitals);
  return out;
}

BathDecomposition empty_bath() {
  BathDecomposition out;
  out.bath_orbitals.resize(0, 0);
  out.bath_occupations.resize(0);
  out.core_orbitals.resize(0, 0);
  return out;
}

EmbeddingProblem build_embedding_hamiltonian(const IntegralSet& ints, const OrbitalSet& fragment,
                                             const BathDecomposition& bath, double mu) {
  const std::size_t n = ints.n_spatial();
  if (fragment.size() + bath.environment.size() != n)
    throw ValidationError("fragment and bath environment do not match the integral dimension");
  if (static_cast<std::size_t>(bath.bath_orbitals.rows()) != bath.environment.size() ||
      static_cast<std::size_t>(bath.core_orbitals.rows()) != bath.environment.size())
    throw ValidationError("bath orbitals do not match the environment size");
  const std::size_t la = fragment.size(), nb = bath.n_bath(), nc = bath.n_core();

  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(idx(n), idx(la + nb));
  for (std::size_t i = 0; i < la; ++i) {
    if (fragment[i] >= n) throw ValidationError("fragment orbital out of range");
    p(idx(fragment[i]), idx(i)) = 1.0;
  }
  Eigen::MatrixXd c_core = Eigen::MatrixXd::Zero(idx(n), idx(nc));
  for (std::size_t k = 0; k < bath.environment.size(); ++k) {
    for (std::size_t b = 0; b < nb; ++b) p(idx(bath.environment[k]), idx(la + b)) = bath.bath_orbitals(idx(k), idx(b));
    for (std::size_t c = 0; c < nc; ++c) c_core(idx(bath.environment[k]), idx(c)) = bath.core_orbitals(idx(k), idx(c));
  }

  const Eigen::MatrixXd d_core = 2.0 * c_core * c_core.transpose();
  const Eigen::MatrixXd g_core = two_electron_field(ints.two_body(), d_core);
  const double core =
      ints.core_energy() + d_core.cwiseProduct(ints.one_body() + 0.5 * g_core).sum();

  EmbeddingProblem out;
  out.n_fragment = la;
  out.n_bath = nb;
  out.n_core = nc;
  out.mu = mu;
  out.bare_one_body = p.transpose() * ints.one_body() * p;
  out.core_field = p.transpose() * g_core * p;
  Eigen::MatrixXd h1 = out.bare_one_body + out.core_field;
  h1 = 0.5 * (h1 + h1.transpose()).eval();
  for (std::size_t i = 0; i < la; ++i) h1(idx(i), idx(i)) -= mu;

  out.n_emb_electrons = ints.n_electrons() - 2 * static_cast<int>(nc);
  if (out.n_emb_electrons < 0 || out.n_emb_electrons > 2 * static_cast<int>(la + nb))
    throw ValidationError("embedding holds " + std::to_string(out.n_emb_electrons) + " electrons in " +
                          std::to_string(la + nb) + " orbitals");
  out.ints = IntegralSet(out.n_emb_electrons, core, std::move(h1),
                         kernels::omp::transform_two_body(ints.two_body(), p));
  out.projector = std::move(p);
  return out;
}

FragmentSolver make_fci_solver() {
  return [](const EmbeddingProblem& prob) {
    FciResult r = fci_ground_state(prob.ints, prob.n_emb_electrons, prob.n_emb_electrons % 2);
    return SolverOutput{r.energy, std::move(r.rdms)};
  };
}

FragmentSolver make_esvqe_solver(VqeConfig cfg, EsvqeObserver observer) {
  return [cfg, observer](const EmbeddingProblem& prob) {
    EsvqeResult r = run_esvqe(prob.ints, cfg);
    if (observer) observer(prob, r);
    return SolverOutput{r.energy, std::move(r.rdms)};
  };
}

double electron_deviation(const std::vector<RdmPair>& rdms, const FragmentPartition& partition,
                          double n_mf, double n_occ) {
  if (rdms.size() != partition.fragments.size())
    throw ValidationError("expected one RDM pair per fragment");
  double total = n_mf - n_occ;
  for (std::size_t a = 0; a < rdms.size(); ++a) {
    const std::size_t la = partition.fragments[a].size();
    if (rdms[a].n_orbitals() < la) throw ValidationError("fragment RDM smaller than the fragment");
    for (std::size_t r = 0; r < la; ++r) total += rdms[a].one_rdm(idx(r), idx(r));
  }
  return total;
}

double democratic_weight(std::span<const std::size_t> indices, std::size_t n_fragment) {
  if (indices.empty()) return 0.0;
  std::size_t k = 0;
  for (std::size_t i : indices) k += i < n_fragment ? 1 : 0;
  return static_cast<double>(k) / static_cast<double>(indices.size());
}

double fragment_energy(const EmbeddingProblem& prob, const RdmPair& rdms) {
  const std::size_t m = prob.n_orbitals();
  const std::size_t la = prob.n_fragment;
  if (rdms.n_orbitals() != m) throw ValidationError("RDM dimension does not match the embedding");
  const Eigen::MatrixXd h = prob.bare_one_body + 0.5 * prob.core_field;
  double e1 = 0.0;
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q) {
      const double w = 0.5 * ((p < la ? 1.0 : 0.0) + (q < la ? 1.0 : 0.0));
      if (w != 0.0) e1 += w * h(idx(p), idx(q)) * rdms.one_rdm(idx(p), idx(q));
    }
  const auto& eri = prob.ints.two_body();
  double e2 = 0.0;
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q)
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t s = 0; s < m; ++s) {
          const int k = (p < la) + (q < la) + (r < la) + (s < la);
          if (k == 0) continue;
          e2 += 0.25 * k * eri(p, q, r, s) * rdms.two_rdm(p, r, s, q);
        }
  return e1 + 0.5 * e2;
}

double inactive_energy(const IntegralSet& ints, const Eigen::MatrixXd& d, const OrbitalSet& orbitals) {
  if (orbitals.empty()) return 0.0;
  const Eigen::MatrixXd f = ints.one_body() + 0.5 * two_electron_field(ints.two_body(), d);
  double e = 0.0;
  for (std::size_t p : orbitals) e += d.row(idx(p)).dot(f.row(idx(p)));
  return e;
}

double democratic_energy(const std::vector<FragmentResult>& results, const FragmentPartition& partition,
                         const IntegralSet& ints, const Eigen::MatrixXd& one_rdm_mf) {
  if (results.size() != partition.fragments.size())
    throw ValidationError("missing fragment result: " + std::to_string(results.size()) + " of " +
                          std::to_string(partition.fragments.size()));
  double e = ints.core_energy();
  for (const auto& r : results) e += fragment_energy(r.problem, r.rdms);
  return e + inactive_energy(ints, one_rdm_mf, partition.all_inactive());
}

double correlation_fit_cost(const std::vector<RdmPair>& rdms, const Eigen::MatrixXd& d_u,
                            const Eigen::MatrixXd& d_0, const FragmentPartition& partition,
                            double gamma) {
  if (rdms.size() != partition.fragments.size())
    throw ValidationError("expected one RDM pair per fragment");
  double cost = 0.0;
  for (std::size_t a = 0; a < rdms.size(); ++a) {
    const auto& frag = partition.fragments[a];
    for (std::size_t r = 0; r < frag.size(); ++r)
      for (std::size_t s = 0; s < frag.size(); ++s) {
        const double diff = rdms[a].one_rdm(idx(r), idx(s)) - d_u(idx(frag[r]), idx(frag[s]));
        cost += diff * diff;
      }
  }
  const OrbitalSet mf = partition.all_inactive();
  double reg = 0.0;
  for (std::size_t r : mf)
    for (std::size_t s : mf) {
      const double diff = d_u(idx(r), idx(s)) - d_0(idx(r), idx(s));
      reg += diff * diff;
    }
  return cost + gamma * reg;
}

DmetMode parse_dmet_mode(const std::string& name) {
  if (name == "single_shot" || name == "single-shot") return DmetMode::single_shot;
  if (name == "active_space" || name == "active-space") return DmetMode::active_space;
  if (name == "correlation_fitting" || name == "correlation-fitting") return DmetMode::correlation_fitting;
  throw ValidationError("unknown DMET mode '" + name + "'");
}

std::string to_string(DmetMode mode) {
  switch (mode) {
    case DmetMode::single_shot: return "single_shot";
    case DmetMode::active_space: return "active_space";
    case DmetMode::correlation_fitting: return "correlation_fitting";
  }
  return "unknown";
}

void DmetConfig::validate() const {
  if (!(tau > 0.0)) throw ValidationError("dmet.tau must be positive");
  if (!(eta > 0.0 && eta < 1.0)) throw ValidationError("dmet.eta must lie in (0, 1)");
  if (mu_max_iter < 0) throw ValidationError("dmet.mu_max_iter must be non-negative");
  if (!(mu_step > 0.0)) throw ValidationError("dmet.mu_step must be positive");
  if (!(gamma >= 0.0)) throw ValidationError("dmet.gamma must be non-negative");
  if (fit_max_iter < 1) throw ValidationError("dmet.fit_max_iter must be at least 1");
}

std::size_t DmetResult::n_qubits() const {
  std::size_t q = 0;
  for (const auto& f : fragments) q = std::max(q, f.problem.n_qubits());
  return q;
}

std::vector<FragmentResult> solve_fragments(const IntegralSet& ints, const FragmentPartition& partition,
                                            const Eigen::MatrixXd& one_rdm_mf, double mu,
                                            const FragmentSolver& solver, const DmetConfig& cfg) {
  const std::size_t nf = partition.fragments.size();
  std::vector<FragmentResult> out(nf);
  std::vector<std::exception_ptr> errors(nf);
  const auto body = [&](std::size_t a) {
    try {
      const auto& frag = partition.fragments[a];
      const BathDecomposition bath =
          frag.size() == ints.n_spatial() ? empty_bath() : build_bath(one_rdm_mf, frag, cfg.eta);
      FragmentResult r;
      r.problem = build_embedding_hamiltonian(ints, frag, bath, mu);
      SolverOutput s = solver(r.problem);
      check_rdm_invariants(s.rdms, r.problem.n_emb_electrons, 1e-6);
      r.solver_energy = s.energy;
      r.rdms = std::move(s.rdms);
      r.fragment_energy = fragment_energy(r.problem, r.rdms);
      out[a] = std::move(r);
    } catch (...) {
      errors[a] = std::current_exception();
    }
  };
  if (cfg.parallel_fragments) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t a = 0; a < nf; ++a) body(a);
  } else {
    for (std::size_t a = 0; a < nf; ++a) body(a);
  }
  for (std::size_t a = 0; a < nf; ++a)
    if (errors[a]) rethrow_with_fragment(errors[a], a);
  return out;
}

namespace {

std::vector<RdmPair> collect_rdms(const std::vector<FragmentResult>& frags) {
  std::vector<RdmPair> r;
  r.reserve(frags.size());
  for (const auto& f : frags) r.push_back(f.rdms);
  return r;
}

}  // namespace

DmetResult optimize_mu(const IntegralSet& ints, const FragmentPartition& partition,
                       const FragmentSolver& solver, const DmetConfig& cfg,
                       const Eigen::MatrixXd& one_rdm_mf, const Eigen::MatrixXd& one_rdm_ref) {
  cfg.validate();
  partition.validate(ints.n_spatial(), true);
  const double n_mf = diagonal_sum(one_rdm_ref, partition.all_inactive());
  const double n_occ = ints.n_electrons();
  auto deviation_at = [&](double mu) {
    return electron_deviation(collect_rdms(solve_fragments(ints, partition, one_rdm_mf, mu, solver, cfg)),
                              partition, n_mf, n_occ);
  };

  DmetResult res;
  double mu = 0.0;
  for (int it = 0;; ++it) {
    const auto t0 = Clock::now();
    std::vector<FragmentResult> frags = solve_fragments(ints, partition, one_rdm_mf, mu, solver, cfg);
    const double dev = electron_deviation(collect_rdms(frags), partition, n_mf, n_occ);
    MuIteration rec{it, mu, dev, {}, 0.0};
    for (const auto& f : frags) rec.fragment_energies.push_back(f.solver_energy);
    rec.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    res.iterations.push_back(rec);
    if (cfg.on_iteration) cfg.on_iteration(rec);
    res.fragments = std::move(frags);
    res.mu_star = mu;
    if (std::abs(dev) < cfg.tau) {
      res.converged = true;
      break;
    }
    if (it >= cfg.mu_max_iter) break;
    const double slope = (deviation_at(mu + cfg.mu_step) - deviation_at(mu - cfg.mu_step)) / (2.0 * cfg.mu_step);
    if (std::abs(slope) < 1e-12)
      throw MuStallError("electron count does not respond to the chemical potential", dev, res.iterations);
    mu -= dev / slope;
  }
  res.total_energy = democratic_energy(res.fragments, partition, ints, one_rdm_ref);
  res.correlation_potential = CorrelationPotential::zero(ints.n_spatial(), partition.fragments);
  return res;
}

DmetResult optimize_mu(const IntegralSet& ints, const FragmentPartition& partition,
                       const FragmentSolver& solver, const DmetConfig& cfg) {
  const MeanFieldState mf = run_rhf(ints, cfg.scf);
  return optimize_mu(ints, partition, solver, cfg, mf.one_rdm, mf.one_rdm);
}

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0, double step, double ftol, int max_evals) {
  const std::size_t n = x0.size();
  SimplexResult out;
  auto eval = [&](const std::vector<double>& x) {
    ++out.evaluations;
    return f(x);
  };
  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n > 0 ? n - 1 : 0];
    double size = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k) size = std::max(size, std::abs(pts[i][k] - pts[best][k]));
    if (n == 0 || (vals[worst] - vals[best] <= ftol && size <= 1e-9)) {
      out.converged = true;
      break;
    }
    if (out.evaluations >= max_evals) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);
    auto along = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t k = 0; k < n; ++k) x[k] = centroid[k] + t * (pts[worst][k] - centroid[k]);
      return x;
    };
    const auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < vals[best]) {
      const auto xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
    } else {
      const bool outside = fr < vals[worst];
      const auto xc = along(outside ? -0.5 : 0.5);
      const double fc = eval(xc);
      if (fc < (outside ? fr : vals[worst])) {
        pts[worst] = xc;
        vals[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
          vals[i] = eval(pts[i]);
        }
      }
    }
  }
  const std::size_t best = order.front();
  out.x = pts[best];
  out.value = vals[best];
  return out;
}

namespace {

DmetResult run_active_space(const IntegralSet& ints, const FragmentPartition& partition,
                            const FragmentSolver& solver, const DmetConfig& cfg) {
  if (partition.fragments.size() != 1)
    throw ValidationError("active-space DMET takes exactly one fragment");
  partition.validate(ints.n_spatial(), false);
  const auto t0 = Clock::now();
  const MeanFieldState mf = run_rhf(ints, cfg.scf);
  DmetResult res;
  res.fragments = solve_fragments(ints, partition, mf.one_rdm, 0.0, solver, cfg);
  const auto& frag = partition.fragments.front();
  OrbitalSet rest;
  for (std::size_t p = 0; p < ints.n_spatial(); ++p)
    if (std::find(frag.begin(), frag.end(), p) == frag.end()) rest.push_back(p);
  const double dev = electron_deviation(collect_rdms(res.fragments), partition,
                                        diagonal_sum(mf.one_rdm, rest), ints.n_electrons());
  MuIteration rec{0, 0.0, dev, {res.fragments.front().solver_energy},
                  std::chrono::duration<double>(Clock::now() - t0).count()};
  res.iterations.push_back(rec);
  if (cfg.on_iteration) cfg.on_iteration(rec);
  res.total_energy = res.fragments.front().solver_energy;
  res.converged = true;
  res.correlation_potential = CorrelationPotential::zero(ints.n_spatial(), partition.fragments);
  return res;
}

DmetResult run_correlation_fitting(const IntegralSet& ints, const FragmentPartition& partition,
                                   const FragmentSolver& solver, const DmetConfig& cfg) {
  partition.validate(ints.n_spatial(), true);
  const MeanFieldState mf0 = run_rhf(ints, cfg.scf);
  CorrelationPotential u = CorrelationPotential::zero(ints.n_spatial(), partition.fragments);
  std::vector<double> history;
  DmetResult res;
  bool fit_converged = false;
  double previous = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < cfg.fit_max_iter; ++outer) {
    const MeanFieldState mf = outer == 0 ? mf0 : run_rhf(ints, u, cfg.scf);
    res = optimize_mu(ints, partition, solver, cfg, mf.one_rdm, mf0.one_rdm);
    const std::vector<RdmPair> rdms = collect_rdms(res.fragments);
    auto cost = [&](const std::vector<double>& params) {
      const MeanFieldState m = run_rhf(ints, u.with_parameters(params), cfg.scf);
      return correlation_fit_cost(rdms, m.one_rdm, mf0.one_rdm, partition, cfg.gamma);
    };
    SimplexResult fit = nelder_mead(cost, u.parameters());
    const SimplexResult again = nelder_mead(cost, fit.x, 0.01);
    if (again.value <= fit.value) fit = again;
    u = u.with_parameters(fit.x);
    history.push_back(fit.value);
    if (std::abs(previous - fit.value) < cfg.fit_tol) {
      fit_converged = true;
      break;
    }
    previous = fit.value;
  }
  res.fit_cost_history = std::move(history);
  res.correlation_potential = u;
  res.converged = res.converged && fit_converged;
  return res;
}

}  // namespace

DmetResult run_dmet(const IntegralSet& ints, const FragmentPartition& partition,
                    const FragmentSolver& solver, const DmetConfig& cfg) {
  cfg.validate();
  switch (cfg.mode) {
    case DmetMode::active_space: return run_active_space(ints, partition, solver, cfg);
    case DmetMode::correlation_fitting: return run_correlation_fitting(ints, partition, solver, cfg);
    case DmetMode::single_shot: break;
  }
  partition.validate(ints.n_spatial(), true);
  return optimize_mu(ints, partition, solver, cfg);
}

DmetResult run_dmet(const IntegralSet& ints, const FragmentPartition& partition, SolverKind kind,
                    const DmetConfig& cfg, const VqeConfig& vqe) {
  return run_dmet(ints, partition, kind == SolverKind::fci ? make_fci_solver() : make_esvqe_solver(vqe), cfg);
}

}  // namespace qdmet
