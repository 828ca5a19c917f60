#include "qdmet/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qdmet/error.hpp"

namespace qdmet {

namespace {

bool same_block(const std::vector<OrbitalSet>& blocks, Eigen::Index r, Eigen::Index s) {
  for (const auto& b : blocks) {
    const bool has_r = std::find(b.begin(), b.end(), static_cast<std::size_t>(r)) != b.end();
    const bool has_s = std::find(b.begin(), b.end(), static_cast<std::size_t>(s)) != b.end();
    if (has_r && has_s) return true;
  }
  return false;
}

}  // namespace

CorrelationPotential::CorrelationPotential(Eigen::MatrixXd u, std::vector<OrbitalSet> blocks)
    : u_(std::move(u)), blocks_(std::move(blocks)) {
  if (u_.rows() != u_.cols()) throw ValidationError("correlation potential is not square");
  for (const auto& b : blocks_)
    for (auto i : b)
      if (i >= static_cast<std::size_t>(u_.rows()))
        throw ValidationError("correlation potential block index out of range");
  for (Eigen::Index r = 0; r < u_.rows(); ++r)
    for (Eigen::Index s = 0; s < u_.cols(); ++s) {
      if (u_(r, s) != u_(s, r)) throw ValidationError("correlation potential is not symmetric");
      if (u_(r, s) != 0.0 && !same_block(blocks_, r, s))
        throw ValidationError("correlation potential couples orbitals " + std::to_string(r) +
                              " and " + std::to_string(s) + " outside a fragment block");
    }
}

CorrelationPotential CorrelationPotential::zero(std::size_t n, std::vector<OrbitalSet> blocks) {
  const auto dim = static_cast<Eigen::Index>(n);
  return CorrelationPotential(Eigen::MatrixXd::Zero(dim, dim), std::move(blocks));
}

std::size_t CorrelationPotential::n_parameters() const {
  std::size_t count = 0;
  for (const auto& b : blocks_) count += b.size() * (b.size() + 1) / 2;
  return count;
}

std::vector<double> CorrelationPotential::parameters() const {
  std::vector<double> out;
  out.reserve(n_parameters());
  for (const auto& b : blocks_)
    for (std::size_t i = 0; i < b.size(); ++i)
      for (std::size_t j = i; j < b.size(); ++j)
        out.push_back(u_(static_cast<Eigen::Index>(b[i]), static_cast<Eigen::Index>(b[j])));
  return out;
}

CorrelationPotential CorrelationPotential::with_parameters(const std::vector<double>& params) const {
  if (params.size() != n_parameters())
    throw ValidationError("expected " + std::to_string(n_parameters()) +
                          " correlation potential parameters");
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(u_.rows(), u_.cols());
  std::size_t k = 0;
  for (const auto& b : blocks_)
    for (std::size_t i = 0; i < b.size(); ++i)
      for (std::size_t j = i; j < b.size(); ++j, ++k) {
        const auto r = static_cast<Eigen::Index>(b[i]);
        const auto s = static_cast<Eigen::Index>(b[j]);
        u(r, s) = params[k];
        u(s, r) = params[k];
      }
  return CorrelationPotential(std::move(u), blocks_);
}

Eigen::MatrixXd two_electron_field(const TwoBodyTensor& eri, const Eigen::MatrixXd& density) {
  const auto n = static_cast<Eigen::Index>(eri.n_orbitals());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q <= p; ++q) {
      double sum = 0.0;
      for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index s = 0; s < n; ++s) {
          const double d = density(r, s);
          if (d == 0.0) continue;
          sum += d * (eri(p, q, r, s) - 0.5 * eri(p, r, q, s));
        }
      g(p, q) = sum;
      g(q, p) = sum;
    }
  return g;
}

void fix_column_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      // First index wins ties so the choice is deterministic.
      if (std::abs(vectors(i, j)) > best + 1e-12) {
        best = std::abs(vectors(i, j));
        imax = i;
      }
    }
    if (vectors.rows() > 0 && vectors(imax, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

namespace {

struct Diagonalized {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
};

Diagonalized diagonalize(const Eigen::MatrixXd& f) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(f);
  if (eig.info() != Eigen::Success) throw Error("Fock diagonalization failed");
  Diagonalized d{eig.eigenvectors(), eig.eigenvalues()};
  fix_column_signs(d.vectors);
  return d;
}

Eigen::MatrixXd aufbau_density(const Eigen::MatrixXd& c, std::size_t n_occ) {
  const auto occ = c.leftCols(static_cast<Eigen::Index>(n_occ));
  return 2.0 * occ * occ.transpose();
}

double energy_of(double core, const Eigen::MatrixXd& h, const Eigen::MatrixXd& f,
                 const Eigen::MatrixXd& d) {
  return core + 0.5 * (d.cwiseProduct(h + f)).sum();
}

// Pulay extrapolation on the commutator error FD - DF (orthonormal basis).
class Diis {
 public:
  explicit Diis(int capacity) : capacity_(static_cast<std::size_t>(capacity)) {}

  Eigen::MatrixXd extrapolate(const Eigen::MatrixXd& f, const Eigen::MatrixXd& d) {
    focks_.push_back(f);
    errors_.push_back(f * d - d * f);
    if (focks_.size() > capacity_) {
      focks_.erase(focks_.begin());
      errors_.erase(errors_.begin());
    }
    const auto m = static_cast<Eigen::Index>(focks_.size());
    if (m < 2) return f;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m + 1, m + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j)
        b(i, j) = errors_[static_cast<std::size_t>(i)].cwiseProduct(
                                                          errors_[static_cast<std::size_t>(j)])
                      .sum();
      b(i, m) = b(m, i) = -1.0;
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
    rhs(m) = -1.0;
    const Eigen::VectorXd w = b.colPivHouseholderQr().solve(rhs);
    if (!w.allFinite()) return f;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(f.rows(), f.cols());
    for (Eigen::Index i = 0; i < m; ++i) out += w(i) * focks_[static_cast<std::size_t>(i)];
    return out;
  }

 private:
  std::size_t capacity_;
  std::vector<Eigen::MatrixXd> focks_;
  std::vector<Eigen::MatrixXd> errors_;
};

MeanFieldState solve(const IntegralSet& ints, const Eigen::MatrixXd& h, const ScfConfig& cfg) {
  if (ints.n_electrons() % 2 != 0)
    throw ValidationError("restricted Hartree-Fock needs an even electron count, got " +
                          std::to_string(ints.n_electrons()));
  const std::size_t n = ints.n_spatial();
  const auto n_occ = static_cast<std::size_t>(ints.n_electrons() / 2);
  const auto& eri = ints.two_body();

  MeanFieldState st;
  st.n_occ_spatial = n_occ;
  Eigen::MatrixXd density = aufbau_density(diagonalize(h).vectors, n_occ);
  Diis diis(cfg.diis_subspace);
  double residual = 0.0;

  for (int it = 1; it <= cfg.max_iter; ++it) {
    const Eigen::MatrixXd f = h + two_electron_field(eri, density);
    const double energy = energy_of(ints.core_energy(), h, f, density);
    const Eigen::MatrixXd f_diag = cfg.use_diis ? diis.extrapolate(f, density) : f;
    const Eigen::MatrixXd next = aufbau_density(diagonalize(f_diag).vectors, n_occ);
    residual = n == 0 ? 0.0 : (next - density).cwiseAbs().maxCoeff();
    st.trace.push_back({it, energy, residual});
    if (residual < cfg.density_tol) {
      density = next;
      st.fock = h + two_electron_field(eri, density);
      auto d = diagonalize(st.fock);
      st.coefficients = std::move(d.vectors);
      st.orbital_energies = std::move(d.values);
      st.one_rdm = density;
      st.energy = energy_of(ints.core_energy(), h, st.fock, density);
      if (n_occ > 0 && n_occ < n) {
        const double gap = st.orbital_energies(static_cast<Eigen::Index>(n_occ)) -
                           st.orbital_energies(static_cast<Eigen::Index>(n_occ - 1));
        if (std::abs(gap) < cfg.degeneracy_tol)
          throw DegeneracyError("HOMO and LUMO are degenerate (gap " + std::to_string(gap) +
                                "); closed-shell occupation is undefined");
      }
      return st;
    }
    density = cfg.use_diis ? next : (1.0 - cfg.damping) * next + cfg.damping * density;
  }
  throw ConvergenceError("SCF did not converge in " + std::to_string(cfg.max_iter) + " iterations",
                         residual);
}

}  // namespace

MeanFieldState run_rhf(const IntegralSet& ints, const ScfConfig& cfg) {
  return solve(ints, ints.one_body(), cfg);
}

MeanFieldState run_rhf(const IntegralSet& ints, const CorrelationPotential& u,
                       const ScfConfig& cfg) {
  if (u.matrix().rows() != static_cast<Eigen::Index>(ints.n_spatial()))
    throw ValidationError("correlation potential dimension does not match the integral set");
  return solve(ints, ints.one_body() + u.matrix(), cfg);
}

Eigen::MatrixXd mean_field_rdm_block(const MeanFieldState& state, const OrbitalSet& rows,
                                     const OrbitalSet& cols) {
  const auto n = static_cast<std::size_t>(state.one_rdm.rows());
  for (auto i : rows)
    if (i >= n) throw ValidationError("row index " + std::to_string(i) + " out of range");
  for (auto j : cols)
    if (j >= n) throw ValidationError("column index " + std::to_string(j) + " out of range");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b)
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          state.one_rdm(static_cast<Eigen::Index>(rows[a]), static_cast<Eigen::Index>(cols[b]));
  return out;
}

}  // namespace qdmet
