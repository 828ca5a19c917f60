#include "qdmet/vqe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "qdmet/error.hpp"

namespace qdmet {

namespace {

constexpr double kGolden = 0.6180339887498949;

bool is_alpha(std::size_t mode) { return mode % 2 == 0; }

// Energy of ref after one generator at angle theta.
double single_op_energy(const PauliSum& h, const Statevector& ref, const CompiledGenerator& g,
                        double theta) {
  Statevector psi = ref;
  for (const auto& [p, a] : g.rotations) apply_pauli_exponential_inplace(psi, p, theta * a);
  return expectation(h, psi);
}

struct LineMin {
  double theta = 0.0;
  double energy = 0.0;
};

// Grid scan, golden section on the best cell, then one parabolic step.
template <class F>
LineMin minimize_1d(F&& f, double lo, double hi, int grid, double tol) {
  grid = std::max(grid, 2);
  const double h = (hi - lo) / grid;
  // Periodic energies tie at distant angles; keep the one nearest zero
  // unless another is lower beyond rounding.
  const double origin = std::clamp(0.0, lo, hi);
  LineMin best{origin, f(origin)};
  for (int i = 0; i <= grid; ++i) {
    const double t = lo + i * h;
    const double ft = f(t);
    const double slack = 1e-13 * std::max(1.0, std::abs(best.energy));
    if (ft < best.energy - slack || (ft <= best.energy + slack && std::abs(t) < std::abs(best.theta) && ft <= best.energy))
      best = {t, ft};
  }
  double a = std::max(lo, best.theta - h);
  double b = std::min(hi, best.theta + h);
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
    }
  }
  LineMin out = fc < fd ? LineMin{c, fc} : LineMin{d, fd};
  if (best.energy < out.energy) out = best;

  // Parabola through (x - s, x, x + s).
  const double s = std::max(tol, 1e-6);
  const double x = out.theta;
  const double fm = f(x - s), fp = f(x + s);
  const double denom = fm - 2.0 * out.energy + fp;
  if (denom > 0.0) {
    const double step = 0.5 * s * (fm - fp) / denom;
    if (std::abs(step) <= s) {
      const double t = std::clamp(x + step, lo, hi);
      const double ft = f(t);
      if (ft < out.energy) out = {t, ft};
    }
  }
  return out;
}

}  // namespace

ExcitationOp ExcitationOp::single(std::size_t p, std::size_t r) {
  ExcitationOp op;
  op.kind = Kind::single;
  op.p = p;
  op.r = r;
  return op;
}

ExcitationOp ExcitationOp::double_(std::size_t p, std::size_t q, std::size_t r, std::size_t s) {
  if (!(p > q) || !(r > s)) throw ValidationError("double excitation requires p > q and r > s");
  ExcitationOp op;
  op.kind = Kind::double_;
  op.p = p;
  op.q = q;
  op.r = r;
  op.s = s;
  return op;
}

FermionOperator ExcitationOp::excitation(std::size_t n_modes) const {
  FermionOperator t(n_modes);
  if (kind == Kind::single)
    t.add_term(1.0, {create(p), annihilate(r)});
  else
    t.add_term(1.0, {create(p), create(q), annihilate(r), annihilate(s)});
  return t;
}

std::array<std::size_t, 5> ExcitationOp::key() const {
  return {kind == Kind::single ? 0U : 1U, p, q, r, s};
}

std::string ExcitationOp::to_string() const {
  std::ostringstream os;
  if (kind == Kind::single)
    os << "a+" << p << " a" << r;
  else
    os << "a+" << p << " a+" << q << " a" << r << " a" << s;
  return os.str();
}

CompiledGenerator compile_generator(const ExcitationOp& op, std::size_t n_qubits) {
  const FermionOperator t = op.excitation(n_qubits);
  const PauliSum g = jordan_wigner(t - t.adjoint());
  CompiledGenerator out;
  for (const auto& [s, c] : g.terms()) {
    if (std::abs(c.real()) > 1e-12)
      throw ValidationError("excitation generator is not anti-Hermitian: " + op.to_string());
    out.rotations.emplace_back(s, c.imag());
  }
  // Strings of one generator commute; verify so the factorization is exact.
  for (std::size_t i = 0; i < out.rotations.size(); ++i)
    for (std::size_t j = i + 1; j < out.rotations.size(); ++j) {
      const auto& a = out.rotations[i].first;
      const auto& b = out.rotations[j].first;
      const int anti = __builtin_popcountll(a.x & b.z) + __builtin_popcountll(a.z & b.x);
      if (anti & 1) throw ValidationError("generator strings do not commute: " + op.to_string());
    }
  return out;
}

Statevector hf_reference(std::size_t n_qubits, int n_electrons) {
  if (n_electrons < 0 || static_cast<std::size_t>(n_electrons) > n_qubits)
    throw ValidationError("cannot place " + std::to_string(n_electrons) + " electrons in " +
                          std::to_string(n_qubits) + " spin orbitals");
  const std::uint64_t index =
      n_electrons == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_electrons) - 1;
  return Statevector::basis_state(n_qubits, index);
}

std::vector<ExcitationOp> build_pool(std::size_t n_spatial, int n_electrons) {
  if (n_electrons < 0 || n_electrons % 2 != 0)
    throw ValidationError("operator pool needs a closed-shell reference");
  const std::size_t modes = 2 * n_spatial;
  const auto n_occ = static_cast<std::size_t>(n_electrons);
  if (n_occ > modes) throw ValidationError("more electrons than spin orbitals");

  std::vector<ExcitationOp> pool;
  for (std::size_t r = 0; r < n_occ; ++r)
    for (std::size_t p = n_occ; p < modes; ++p)
      if (is_alpha(p) == is_alpha(r)) pool.push_back(ExcitationOp::single(p, r));
  for (std::size_t s = 0; s < n_occ; ++s)
    for (std::size_t r = s + 1; r < n_occ; ++r)
      for (std::size_t q = n_occ; q < modes; ++q)
        for (std::size_t p = q + 1; p < modes; ++p) {
          const int created = int(is_alpha(p)) + int(is_alpha(q));
          const int removed = int(is_alpha(r)) + int(is_alpha(s));
          if (created == removed) pool.push_back(ExcitationOp::double_(p, q, r, s));
        }
  return pool;
}

ScreenedPool screen_pool(const std::vector<ExcitationOp>& pool, const PauliSum& h,
                         const Statevector& ref, double epsilon, const VqeConfig& cfg) {
  if (!(epsilon >= 0.0)) throw ValidationError("screening threshold must be non-negative");
  ScreenedPool out;
  out.reference_energy = expectation(h, ref);
  std::vector<ScreenedEntry> all(pool.size());
  std::vector<std::string> errors(pool.size());

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < pool.size(); ++i) {
    try {
      const CompiledGenerator g = compile_generator(pool[i], ref.n_qubits());
      auto f = [&](double t) { return single_op_energy(h, ref, g, t); };
      LineMin m = minimize_1d(f, cfg.bracket_lo, cfg.bracket_hi, cfg.bracket_grid, cfg.line_tol);
      if (m.energy > out.reference_energy) m = {0.0, out.reference_energy};
      all[i] = ScreenedEntry{m.energy - out.reference_energy, pool[i], m.theta, i};
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw ValidationError(e);

  for (auto& e : all)
    if (epsilon == 0.0 || std::abs(e.delta_e) > epsilon) out.entries.push_back(e);
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const ScreenedEntry& a, const ScreenedEntry& b) {
                     const double fa = std::abs(a.delta_e), fb = std::abs(b.delta_e);
                     if (fa != fb) return fa > fb;
                     return a.op.key() < b.op.key();
                   });
  return out;
}

AnsatzState::AnsatzState(std::vector<ExcitationOp> ops, std::vector<double> thetas,
                         std::size_t n_qubits)
    : ops_(std::move(ops)), thetas_(std::move(thetas)), n_qubits_(n_qubits) {
  if (ops_.size() != thetas_.size())
    throw ValidationError("ansatz has " + std::to_string(ops_.size()) + " operators but " +
                          std::to_string(thetas_.size()) + " angles");
  generators_.reserve(ops_.size());
  for (const auto& op : ops_) generators_.push_back(compile_generator(op, n_qubits_));
}

AnsatzState AnsatzState::with_thetas(std::vector<double> thetas) const {
  if (thetas.size() != ops_.size()) throw ValidationError("angle count does not match the ansatz");
  AnsatzState out = *this;
  out.thetas_ = std::move(thetas);
  return out;
}

Statevector apply_ansatz(const Statevector& ref, const AnsatzState& ansatz) {
  if (ansatz.size() > 0 && ref.n_qubits() != ansatz.n_qubits())
    throw ValidationError("reference and ansatz registers differ");
  Statevector psi = ref;
  for (std::size_t i = 0; i < ansatz.size(); ++i)
    for (const auto& [p, a] : ansatz.generators()[i].rotations)
      apply_pauli_exponential_inplace(psi, p, ansatz.thetas()[i] * a);
  psi.normalize();
  return psi;
}

namespace {

// G|psi> with G = sum_k i a_k P_k.
Statevector apply_generator(const CompiledGenerator& g, const Statevector& psi) {
  std::vector<cplx> out(psi.dimension(), cplx{0.0, 0.0});
  for (const auto& [p, a] : g.rotations)
    kernels::omp::apply_pauli(psi.amplitudes(), out, p.x, p.z, cplx{0.0, a});
  return Statevector::from_amplitudes(std::move(out));
}

void undo_generator(Statevector& psi, const CompiledGenerator& g, double theta) {
  for (auto it = g.rotations.rbegin(); it != g.rotations.rend(); ++it)
    apply_pauli_exponential_inplace(psi, it->first, -theta * it->second);
}

cplx inner(const Statevector& a, const Statevector& b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

}  // namespace

std::vector<double> analytic_gradient(const PauliSum& h, const Statevector& ref,
                                      const AnsatzState& ansatz) {
  Statevector phi = apply_ansatz(ref, ansatz);
  Statevector lambda = apply(h, phi);
  std::vector<double> grad(ansatz.size(), 0.0);
  for (std::size_t k = ansatz.size(); k-- > 0;) {
    const auto& g = ansatz.generators()[k];
    grad[k] = 2.0 * inner(lambda, apply_generator(g, phi)).real();
    undo_generator(phi, g, ansatz.thetas()[k]);
    undo_generator(lambda, g, ansatz.thetas()[k]);
  }
  return grad;
}

std::vector<double> finite_difference_gradient(const PauliSum& h, const Statevector& ref,
                                               const AnsatzState& ansatz, double step) {
  std::vector<double> grad(ansatz.size(), 0.0);
  std::vector<double> t = ansatz.thetas();
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double t0 = t[k];
    t[k] = t0 + step;
    const double ep = expectation(h, apply_ansatz(ref, ansatz.with_thetas(t)));
    t[k] = t0 - step;
    const double em = expectation(h, apply_ansatz(ref, ansatz.with_thetas(t)));
    t[k] = t0;
    grad[k] = (ep - em) / (2.0 * step);
  }
  return grad;
}

VqeMinimizeResult vqe_minimize(const PauliSum& h, const Statevector& ref,
                               const AnsatzState& ansatz, const VqeConfig& cfg) {
  const std::size_t n = ansatz.size();
  VqeMinimizeResult res;
  res.thetas = ansatz.thetas();

  auto energy = [&](const std::vector<double>& t) {
    ++res.evaluations;
    return expectation(h, apply_ansatz(ref, ansatz.with_thetas(t)));
  };
  auto gradient = [&](const std::vector<double>& t) {
    const AnsatzState a = ansatz.with_thetas(t);
    if (cfg.analytic_gradient) {
      ++res.evaluations;
      return analytic_gradient(h, ref, a);
    }
    res.evaluations += static_cast<int>(2 * n);
    return finite_difference_gradient(h, ref, a, cfg.fd_step);
  };

  double lo = cfg.bracket_lo, hi = cfg.bracket_hi;
  for (double t : res.thetas) {
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  auto project = [&](Eigen::VectorXd v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::clamp(v(i), lo, hi);
    return v;
  };
  // Components pinned at a bound with the gradient pushing outward do not count.
  auto projected_norm = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if ((x(i) <= lo && g(i) > 0.0) || (x(i) >= hi && g(i) < 0.0)) continue;
      s += g(i) * g(i);
    }
    return std::sqrt(s);
  };
  auto to_vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };

  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(res.thetas.data(), static_cast<Eigen::Index>(n));
  double fx = energy(res.thetas);
  res.energy = fx;
  if (n == 0) {
    res.converged = true;
    res.trace.push_back({0, fx, 0.0, res.evaluations});
    return res;
  }
  std::vector<double> gv = gradient(res.thetas);
  Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(gv.data(), static_cast<Eigen::Index>(n));
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));

  for (int iter = 0;; ++iter) {
    const double gnorm = projected_norm(x, g);
    res.trace.push_back({iter, fx, gnorm, res.evaluations});
    if (gnorm < cfg.optimizer_tol) {
      res.converged = true;
      break;
    }
    if (res.evaluations >= cfg.max_evals) break;

    Eigen::VectorXd dir = -hinv * g;
    if (g.dot(dir) >= 0.0) {
      hinv.setIdentity();
      dir = -g;
    }
    double alpha = 1.0;
    Eigen::VectorXd xn;
    double fn = fx;
    bool accepted = false;
    for (int ls = 0; ls < 60 && res.evaluations < cfg.max_evals; ++ls, alpha *= 0.5) {
      xn = project(x + alpha * dir);
      fn = energy(to_vec(xn));
      if (fn <= fx + 1e-4 * g.dot(xn - x)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (hinv.isIdentity()) break;  // steepest descent failed too
      hinv.setIdentity();
      continue;
    }
    const std::vector<double> gn = gradient(to_vec(xn));
    const Eigen::VectorXd gnew = Eigen::Map<const Eigen::VectorXd>(gn.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd s = xn - x;
    const Eigen::VectorXd y = gnew - g;
    const double sy = s.dot(y);
    if (sy > 1e-14) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      hinv = (id - rho * s * y.transpose()) * hinv * (id - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    x = xn;
    fx = fn;
    g = gnew;
  }
  res.energy = fx;
  res.thetas = to_vec(x);
  return res;
}

RdmPair measure_rdms(const Statevector& psi, std::size_t n_spatial) {
  if (psi.n_qubits() != 2 * n_spatial)
    throw ValidationError("state register does not match " + std::to_string(n_spatial) +
                          " spatial orbitals");
  RdmPair r = rdms_from_amplitudes(psi.amplitudes(), n_spatial);
  r.one_rdm = 0.5 * (r.one_rdm + r.one_rdm.transpose()).eval();
  const std::size_t n = n_spatial;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q)
      for (std::size_t s = 0; s < n; ++s)
        for (std::size_t t = 0; t < n; ++t) {
          const double avg = 0.5 * (r.two_rdm(p, q, s, t) + r.two_rdm(t, s, q, p));
          r.two_rdm(p, q, s, t) = avg;
          r.two_rdm(t, s, q, p) = avg;
        }
  return r;
}

EsvqeResult run_esvqe(const IntegralSet& ints, const VqeConfig& cfg, const ScfConfig& scf) {
  if (!(cfg.epsilon >= 0.0)) throw ValidationError("screening threshold must be non-negative");
  const std::size_t n = ints.n_spatial();
  const int ne = ints.n_electrons();
  if (2 * n > kMaxQubits) throw ValidationError("ESVQE register exceeds " + std::to_string(kMaxQubits) + " qubits");

  // Orbitals of the problem's own mean field; without one, the input basis.
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  try {
    c = run_rhf(ints, scf).coefficients;
  } catch (const DegeneracyError&) {
  } catch (const ConvergenceError&) {
  }
  const IntegralSet mo = rotate_integrals(ints, c);
  const PauliSum h = qubit_hamiltonian(mo);
  const Statevector ref = hf_reference(2 * n, ne);
  const auto pool = build_pool(n, ne);

  const ScreenedPool full = screen_pool(pool, h, ref, 0.0, cfg);
  EsvqeResult out;
  out.n_qubits = 2 * n;
  out.pool_size = pool.size();
  out.screened.reference_energy = full.reference_energy;
  std::vector<ScreenedEntry> rest;
  for (const auto& e : full.entries) {
    if (cfg.epsilon == 0.0 || std::abs(e.delta_e) > cfg.epsilon)
      out.screened.entries.push_back(e);
    else
      rest.push_back(e);
  }

  std::vector<ExcitationOp> ops;
  std::vector<double> theta0;
  double damp = 1.0;
  for (const auto& e : out.screened.entries) {
    ops.push_back(e.op);
    theta0.push_back(e.theta_opt * damp);
    damp *= cfg.theta0_damping;
  }
  AnsatzState ansatz(ops, theta0, 2 * n);
  VqeMinimizeResult min = vqe_minimize(h, ref, ansatz, cfg);

  if (cfg.fine_tuning) {
    // Append the below-threshold operators in screened order until the energy settles.
    std::size_t next = 0;
    while (next < rest.size() && static_cast<int>(ops.size()) < cfg.fine_tuning_max_ops) {
      ops.push_back(rest[next].op);
      std::vector<double> t = min.thetas;
      t.push_back(rest[next].theta_opt);
      ++next;
      AnsatzState grown(ops, t, 2 * n);
      VqeMinimizeResult trial = vqe_minimize(h, ref, grown, cfg);
      const double gain = min.energy - trial.energy;
      trial.evaluations += min.evaluations;
      min = std::move(trial);
      if (gain < cfg.fine_tuning_tol) break;
    }
  }

  out.ansatz = AnsatzState(ops, min.thetas, 2 * n);
  const Statevector psi = apply_ansatz(ref, out.ansatz);
  out.rdms = rotate_rdms(measure_rdms(psi, n), c);
  out.energy = min.energy;
  out.minimize = std::move(min);
  return out;
}

}  // namespace qdmet
