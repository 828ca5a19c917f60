#include "qdmet/qubits.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

#include "qdmet/error.hpp"
#include "qdmet/kernels/statevector.hpp"

namespace qdmet {

// ---------------------------------------------------------------------------
// FermionOperator

void FermionOperator::add_term(cplx coefficient, std::vector<LadderOp> ops) {
  for (const auto& op : ops)
    if (op.mode >= n_modes_)
      throw ValidationError("ladder operator mode " + std::to_string(op.mode) +
                            " outside register of " + std::to_string(n_modes_));
  terms_.push_back({coefficient, std::move(ops)});
}

FermionOperator FermionOperator::adjoint() const {
  FermionOperator out(n_modes_);
  for (const auto& t : terms_) {
    std::vector<LadderOp> ops(t.ops.rbegin(), t.ops.rend());
    for (auto& op : ops) op.create = !op.create;
    out.terms_.push_back({std::conj(t.coefficient), std::move(ops)});
  }
  return out;
}

FermionOperator FermionOperator::operator*(const FermionOperator& rhs) const {
  FermionOperator out(std::max(n_modes_, rhs.n_modes_));
  for (const auto& a : terms_)
    for (const auto& b : rhs.terms_) {
      std::vector<LadderOp> ops = a.ops;
      ops.insert(ops.end(), b.ops.begin(), b.ops.end());
      out.terms_.push_back({a.coefficient * b.coefficient, std::move(ops)});
    }
  return out;
}

FermionOperator FermionOperator::operator+(const FermionOperator& rhs) const {
  FermionOperator out(std::max(n_modes_, rhs.n_modes_));
  out.terms_ = terms_;
  out.terms_.insert(out.terms_.end(), rhs.terms_.begin(), rhs.terms_.end());
  return out;
}

FermionOperator FermionOperator::operator-(const FermionOperator& rhs) const {
  FermionOperator neg = rhs;
  for (auto& t : neg.terms_) t.coefficient = -t.coefficient;
  return *this + neg;
}

FermionOperator FermionOperator::canonicalized() const {
  FermionOperator out(n_modes_);
  std::map<std::vector<LadderOp>, std::size_t> seen;
  for (const auto& t : terms_) {
    auto [it, inserted] = seen.emplace(t.ops, out.terms_.size());
    if (inserted)
      out.terms_.push_back(t);
    else
      out.terms_[it->second].coefficient += t.coefficient;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pauli strings

char PauliString::axis(std::size_t q) const {
  const bool xb = (x >> q) & 1U;
  const bool zb = (z >> q) & 1U;
  return xb ? (zb ? 'Y' : 'X') : (zb ? 'Z' : 'I');
}

PauliString PauliString::parse(const std::string& text) {
  PauliString s;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    if (tok.size() < 2) throw ValidationError("bad Pauli token '" + tok + "'");
    const std::size_t q = std::stoul(tok.substr(1));
    if (q >= 64) throw ValidationError("Pauli qubit index too large");
    const std::uint64_t bit = std::uint64_t{1} << q;
    switch (tok[0]) {
      case 'X': s.x |= bit; break;
      case 'Y': s.x |= bit; s.z |= bit; break;
      case 'Z': s.z |= bit; break;
      case 'I': break;
      default: throw ValidationError("bad Pauli axis in '" + tok + "'");
    }
  }
  return s;
}

std::string PauliString::to_string() const {
  std::string out;
  for (std::size_t q = 0; q < 64; ++q) {
    const char a = axis(q);
    if (a == 'I') continue;
    if (!out.empty()) out += ' ';
    out += a + std::to_string(q);
  }
  return out;
}

std::pair<cplx, PauliString> multiply(const PauliString& a, const PauliString& b) {
  static constexpr cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const PauliString c{a.x ^ b.x, a.z ^ b.z};
  const int k = __builtin_popcountll(a.x & a.z) + __builtin_popcountll(b.x & b.z) +
                2 * __builtin_popcountll(a.z & b.x) - __builtin_popcountll(c.x & c.z);
  return {kIPow[((k % 4) + 4) % 4], c};
}

// ---------------------------------------------------------------------------
// PauliSum

void PauliSum::add(const PauliString& s, cplx coefficient) {
  auto [it, inserted] = terms_.emplace(s, coefficient);
  if (!inserted) it->second += coefficient;
  if (std::abs(it->second) < kPruneTol) terms_.erase(it);
}

PauliSum& PauliSum::operator+=(const PauliSum& rhs) {
  n_qubits_ = std::max(n_qubits_, rhs.n_qubits_);
  for (const auto& [s, c] : rhs.terms_) add(s, c);
  return *this;
}

PauliSum PauliSum::operator+(const PauliSum& rhs) const {
  PauliSum out = *this;
  out += rhs;
  return out;
}

PauliSum PauliSum::operator*(const PauliSum& rhs) const {
  PauliSum out(std::max(n_qubits_, rhs.n_qubits_));
  for (const auto& [sa, ca] : terms_)
    for (const auto& [sb, cb] : rhs.terms_) {
      const auto [phase, sc] = multiply(sa, sb);
      out.add(sc, phase * ca * cb);
    }
  return out;
}

PauliSum PauliSum::operator*(cplx scalar) const {
  PauliSum out(n_qubits_);
  for (const auto& [s, c] : terms_) out.add(s, c * scalar);
  return out;
}

PauliSum PauliSum::adjoint() const {
  PauliSum out(n_qubits_);
  for (const auto& [s, c] : terms_) out.add(s, std::conj(c));
  return out;
}

double PauliSum::hermiticity_defect() const {
  double worst = 0.0;
  for (const auto& [s, c] : terms_) worst = std::max(worst, std::abs(c.imag()));
  return worst;
}

cplx PauliSum::constant() const {
  auto it = terms_.find(PauliString{});
  return it == terms_.end() ? cplx{0.0, 0.0} : it->second;
}

Eigen::MatrixXcd PauliSum::to_dense() const {
  if (n_qubits_ > 14) throw ValidationError("dense Pauli matrix limited to 14 qubits");
  const auto dim = std::uint64_t{1} << n_qubits_;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                               static_cast<Eigen::Index>(dim));
  for (const auto& [s, c] : terms_)
    for (std::uint64_t b = 0; b < dim; ++b)
      m(static_cast<Eigen::Index>(b ^ s.x), static_cast<Eigen::Index>(b)) +=
          c * kernels::pauli_phase(s.x, s.z, b);
  return m;
}

// ---------------------------------------------------------------------------
// Statevector

Statevector::Statevector(std::size_t n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits > kMaxQubits)
    throw ValidationError("statevector of " + std::to_string(n_qubits) +
                          " qubits exceeds the limit of " + std::to_string(kMaxQubits));
  amps_.assign(std::size_t{1} << n_qubits, cplx{0.0, 0.0});
  amps_[0] = 1.0;
}

Statevector Statevector::from_amplitudes(std::vector<cplx> amplitudes) {
  const std::size_t dim = amplitudes.size();
  if (dim == 0 || (dim & (dim - 1)) != 0)
    throw ValidationError("amplitude count must be a power of two");
  Statevector sv;
  sv.n_qubits_ = static_cast<std::size_t>(__builtin_ctzll(dim));
  if (sv.n_qubits_ > kMaxQubits) throw ValidationError("too many qubits");
  sv.amps_ = std::move(amplitudes);
  return sv;
}

Statevector Statevector::basis_state(std::size_t n_qubits, std::uint64_t index) {
  Statevector sv(n_qubits);
  if (index >= sv.dimension()) throw ValidationError("basis index out of range");
  sv.amps_[0] = 0.0;
  sv.amps_[index] = 1.0;
  return sv;
}

double Statevector::norm() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return std::sqrt(s);
}

void Statevector::normalize() {
  const double n = norm();
  if (n == 0.0) throw ValidationError("cannot normalize a zero statevector");
  for (auto& a : amps_) a /= n;
}

// ---------------------------------------------------------------------------

FermionOperator expand_to_spin_orbitals(const IntegralSet& ints) {
  const std::size_t n = ints.n_spatial();
  FermionOperator op(2 * n);
  op.add_term(ints.core_energy(), {});
  const auto& h1 = ints.one_body();
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q)
      for (std::size_t spin = 0; spin < 2; ++spin)
        op.add_term(h1(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)),
                    {create(2 * p + spin), annihilate(2 * q + spin)});

  // Collect a+_i a+_j a_k a_l with i<j, k>l so equivalent orderings merge.
  std::map<std::array<std::size_t, 4>, double> two;
  const auto& eri = ints.two_body();
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q)
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t s = 0; s < n; ++s) {
          const double v = eri(p, q, r, s);
          if (v == 0.0) continue;
          for (std::size_t sigma = 0; sigma < 2; ++sigma)
            for (std::size_t tau = 0; tau < 2; ++tau) {
              std::size_t i = 2 * p + sigma, j = 2 * r + tau, k = 2 * s + tau, l = 2 * q + sigma;
              if (i == j || k == l) continue;
              double sign = 1.0;
              if (i > j) { std::swap(i, j); sign = -sign; }
              if (k < l) { std::swap(k, l); sign = -sign; }
              two[{i, j, k, l}] += 0.5 * sign * v;
            }
        }
  for (const auto& [idx, v] : two) {
    if (v == 0.0) continue;
    op.add_term(v, {create(idx[0]), create(idx[1]), annihilate(idx[2]), annihilate(idx[3])});
  }
  return op;
}

namespace {

PauliSum ladder_image(const LadderOp& op, std::size_t n_qubits) {
  const std::uint64_t bit = std::uint64_t{1} << op.mode;
  const std::uint64_t parity = bit - 1;
  PauliSum out(n_qubits);
  out.add({bit, parity}, 0.5);                                        // X_j Z_<j
  out.add({bit, parity | bit}, op.create ? cplx{0.0, -0.5} : cplx{0.0, 0.5});  // Y_j Z_<j
  return out;
}

}  // namespace

PauliSum jordan_wigner(const FermionOperator& op) {
  const std::size_t n = op.n_modes();
  if (n > 64) throw ValidationError("Jordan-Wigner register limited to 64 modes");
  std::vector<PauliSum> images;
  images.reserve(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    images.push_back(ladder_image(annihilate(j), n));
    images.push_back(ladder_image(create(j), n));
  }
  PauliSum out(n);
  for (const auto& term : op.terms()) {
    if (term.coefficient == cplx{0.0, 0.0}) continue;
    // Expand the product string by string; intermediate values are not pruned.
    std::vector<std::pair<PauliString, cplx>> product{{PauliString{}, term.coefficient}};
    for (const auto& ladder : term.ops) {
      const PauliSum& img = images[2 * ladder.mode + (ladder.create ? 1 : 0)];
      std::vector<std::pair<PauliString, cplx>> next;
      next.reserve(product.size() * 2);
      for (const auto& [s, c] : product)
        for (const auto& [si, ci] : img.terms()) {
          const auto [phase, sc] = multiply(s, si);
          next.emplace_back(sc, phase * c * ci);
        }
      product = std::move(next);
    }
    for (const auto& [s, c] : product) out.add(s, c);
  }
  return out;
}

PauliSum qubit_hamiltonian(const IntegralSet& ints) {
  return jordan_wigner(expand_to_spin_orbitals(ints));
}

double expectation(const PauliSum& h, const Statevector& psi) {
  if (h.n_qubits() > psi.n_qubits())
    throw ValidationError("operator acts on " + std::to_string(h.n_qubits()) +
                          " qubits, state has " + std::to_string(psi.n_qubits()));
  cplx total = 0.0;
  for (const auto& [s, c] : h.terms())
    total += c * kernels::omp::pauli_expectation(psi.amplitudes(), s.x, s.z);
  if (std::abs(total.imag()) >= 1e-9)
    throw ValidationError("expectation has imaginary part " + std::to_string(total.imag()) +
                          "; operator is not Hermitian");
  return total.real();
}

Statevector apply(const PauliSum& h, const Statevector& psi) {
  if (h.n_qubits() > psi.n_qubits()) throw ValidationError("operator larger than the state");
  std::vector<cplx> out(psi.dimension(), cplx{0.0, 0.0});
  for (const auto& [s, c] : h.terms()) kernels::omp::apply_pauli(psi.amplitudes(), out, s.x, s.z, c);
  return Statevector::from_amplitudes(std::move(out));
}

void apply_pauli_exponential_inplace(Statevector& psi, const PauliString& p, double theta) {
  if (psi.n_qubits() < 64 && ((p.x | p.z) >> psi.n_qubits()) != 0)
    throw ValidationError("Pauli string acts outside the register");
  kernels::omp::pauli_rotation(psi.amplitudes(), p.x, p.z, theta);
}

Statevector apply_pauli_exponential(Statevector psi, const PauliString& p, double theta) {
  apply_pauli_exponential_inplace(psi, p, theta);
  return psi;
}

}  // namespace qdmet
