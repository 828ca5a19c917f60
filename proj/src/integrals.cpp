#include "qdmet/integrals.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <tuple>

#include "qdmet/error.hpp"
#include "qdmet/kernels/transform.hpp"

namespace qdmet {

TwoBodyTensor::TwoBodyTensor(std::size_t n_orbitals) : n_(n_orbitals) {
  const std::size_t npair = n_ * (n_ + 1) / 2;
  packed_.assign(npair * (npair + 1) / 2, 0.0);
}

std::vector<double> TwoBodyTensor::dense() const {
  std::vector<double> out(n_ * n_ * n_ * n_);
  for (std::size_t p = 0; p < n_; ++p)
    for (std::size_t q = 0; q < n_; ++q)
      for (std::size_t r = 0; r < n_; ++r)
        for (std::size_t s = 0; s < n_; ++s)
          out[((p * n_ + q) * n_ + r) * n_ + s] = (*this)(p, q, r, s);
  return out;
}

TwoBodyTensor TwoBodyTensor::from_dense(std::size_t n, std::span<const double> dense) {
  if (dense.size() != n * n * n * n)
    throw ValidationError("two-body array size does not match n^4");
  TwoBodyTensor t(n);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q <= p; ++q)
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t s = 0; s <= r; ++s)
          if (pair_index(p, q) >= pair_index(r, s))
            t.set(p, q, r, s, dense[((p * n + q) * n + r) * n + s]);
  return t;
}

IntegralSet::IntegralSet(int n_electrons, double core_energy, Eigen::MatrixXd one_body,
                         TwoBodyTensor two_body)
    : n_electrons_(n_electrons),
      core_energy_(core_energy),
      one_body_(std::move(one_body)),
      two_body_(std::move(two_body)) {
  const auto n = static_cast<Eigen::Index>(two_body_.n_orbitals());
  if (one_body_.rows() != n || one_body_.cols() != n)
    throw ValidationError("one-body matrix is " + std::to_string(one_body_.rows()) + "x" +
                          std::to_string(one_body_.cols()) + ", expected " +
                          std::to_string(n) + "x" + std::to_string(n));
  if (n > 0 && (one_body_ - one_body_.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw ValidationError("one-body matrix is not symmetric");
  if (n_electrons_ < 0 || n_electrons_ > 2 * n)
    throw ValidationError("electron count " + std::to_string(n_electrons_) +
                          " outside [0, " + std::to_string(2 * n) + "]");
  if (!std::isfinite(core_energy_)) throw ValidationError("core energy is not finite");
  // Rounding asymmetry from rotations is removed so the invariant holds exactly.
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = 0.5 * (one_body_(i, j) + one_body_(j, i));
      one_body_(i, j) = v;
      one_body_(j, i) = v;
    }
}

IntegralSet IntegralSet::with_n_electrons(int n_electrons) const {
  return IntegralSet(n_electrons, core_energy_, one_body_, two_body_);
}

bool IntegralSet::operator==(const IntegralSet& other) const {
  return n_electrons_ == other.n_electrons_ && core_energy_ == other.core_energy_ &&
         one_body_.rows() == other.one_body_.rows() && one_body_ == other.one_body_ &&
         two_body_ == other.two_body_;
}

OverlapMatrix::OverlapMatrix(Eigen::MatrixXd s) : s_(std::move(s)) {
  if (s_.rows() != s_.cols()) throw ValidationError("overlap matrix is not square");
  if (s_.size() > 0 && (s_ - s_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ValidationError("overlap matrix is not symmetric");
}

// ---------------------------------------------------------------------------
// FCIDUMP

namespace {

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

std::optional<long> parse_int(const std::string& s) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Fortran writers sometimes use D exponents.
std::optional<double> parse_real(std::string s) {
  std::replace(s.begin(), s.end(), 'D', 'E');
  std::replace(s.begin(), s.end(), 'd', 'e');
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') return std::nullopt;
  return v;
}

struct Header {
  std::map<std::string, std::string> fields;
  std::size_t end_line = 0;
};

// Reads the namelist up to &END or '/', returns KEY -> raw value text.
Header read_header(std::istream& in, std::size_t& line_no) {
  std::string text;
  std::string line;
  bool started = false;
  bool finished = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string u = upper(line);
    if (!started) {
      auto pos = u.find("&FCI");
      if (pos == std::string::npos) {
        if (u.find_first_not_of(" \t\r") == std::string::npos) continue;
        throw ParseError(line_no, "expected '&FCI' namelist header");
      }
      started = true;
      u = u.substr(pos + 4);
    }
    auto end = u.find("&END");
    if (end == std::string::npos) end = u.find('/');
    if (end != std::string::npos) {
      text += u.substr(0, end);
      finished = true;
      break;
    }
    text += u + ",";
  }
  if (!started) throw ParseError(line_no, "missing '&FCI' namelist header");
  if (!finished) throw ParseError(line_no, "namelist header is not terminated by &END or '/'");

  // KEY=v1,v2,...  Values of a key run until the next token containing '='.
  Header h;
  h.end_line = line_no;
  std::string key;
  std::string token;
  std::istringstream tokens(text);
  while (std::getline(tokens, token, ',')) {
    token.erase(std::remove_if(token.begin(), token.end(),
                               [](unsigned char c) { return std::isspace(c); }),
                token.end());
    if (token.empty()) continue;
    auto eq = token.find('=');
    if (eq != std::string::npos) {
      key = token.substr(0, eq);
      h.fields[key] = token.substr(eq + 1);
    } else if (!key.empty()) {
      h.fields[key] += "," + token;
    }
  }
  return h;
}

long header_int(const Header& h, const std::string& key) {
  auto it = h.fields.find(key);
  if (it == h.fields.end()) throw ParseError(h.end_line, "header field " + key + " is missing");
  auto v = parse_int(it->second);
  if (!v) throw ParseError(h.end_line, "header field " + key + " is not an integer: '" +
                                           it->second + "'");
  return *v;
}

}  // namespace

IntegralSet parse_fcidump(std::istream& in) {
  std::size_t line_no = 0;
  const Header header = read_header(in, line_no);
  const long norb = header_int(header, "NORB");
  const long nelec = header_int(header, "NELEC");
  if (header.fields.count("MS2")) header_int(header, "MS2");
  if (norb < 0) throw ParseError(header.end_line, "NORB is negative");
  if (nelec < 0 || nelec > 2 * norb)
    throw ParseError(header.end_line, "NELEC outside [0, 2*NORB]");

  const auto n = static_cast<std::size_t>(norb);
  TwoBodyTensor eri(n);
  std::vector<char> eri_seen(eri.packed().size(), 0);
  Eigen::MatrixXd h1 = Eigen::MatrixXd::Zero(norb, norb);
  Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic> h1_seen =
      Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic>::Zero(norb, norb);
  double core = 0.0;
  bool core_seen = false;
  constexpr double kConflictTol = 1e-10;

  auto check = [&](bool seen, double old_value, double value) {
    if (seen && std::abs(old_value - value) > kConflictTol)
      throw ParseError(line_no, "conflicting duplicate entry (" + std::to_string(old_value) +
                                    " vs " + std::to_string(value) + ")");
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string value_text;
    if (!(fields >> value_text)) continue;
    std::string idx_text[4];
    long idx[4];
    for (int k = 0; k < 4; ++k) {
      if (!(fields >> idx_text[k])) throw ParseError(line_no, "expected 'value i j k l'");
      auto v = parse_int(idx_text[k]);
      if (!v) throw ParseError(line_no, "index '" + idx_text[k] + "' is not an integer");
      if (*v < 0 || *v > norb)
        throw ParseError(line_no, "index " + idx_text[k] + " outside [0, NORB]");
      idx[k] = *v;
    }
    const auto value = parse_real(value_text);
    if (!value) throw ParseError(line_no, "value '" + value_text + "' is not a number");
    const auto [i, j, k, l] = std::tuple{idx[0], idx[1], idx[2], idx[3]};

    if (i > 0 && j > 0 && k > 0 && l > 0) {
      const std::size_t pos = eri.index(i - 1, j - 1, k - 1, l - 1);
      check(eri_seen[pos], eri.packed()[pos], *value);
      eri.packed()[pos] = *value;
      eri_seen[pos] = 1;
    } else if (i > 0 && j > 0 && k == 0 && l == 0) {
      check(h1_seen(i - 1, j - 1), h1(i - 1, j - 1), *value);
      h1(i - 1, j - 1) = h1(j - 1, i - 1) = *value;
      h1_seen(i - 1, j - 1) = h1_seen(j - 1, i - 1) = 1;
    } else if (i == 0 && j == 0 && k == 0 && l == 0) {
      check(core_seen, core, *value);
      core = *value;
      core_seen = true;
    } else if (i > 0 && j == 0 && k == 0 && l == 0) {
      // orbital energy line, not needed
    } else {
      throw ParseError(line_no, "unrecognized index pattern");
    }
  }
  return IntegralSet(static_cast<int>(nelec), core, std::move(h1), std::move(eri));
}

IntegralSet parse_fcidump(const std::string& text) {
  std::istringstream in(text);
  return parse_fcidump(in);
}

IntegralSet read_fcidump_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open FCIDUMP file '" + path + "'");
  try {
    return parse_fcidump(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.what());
  }
}

namespace {

void write_entry(std::ostream& out, double v, std::size_t i, std::size_t j, std::size_t k,
                 std::size_t l) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%24.16e %4zu %4zu %4zu %4zu\n", v, i, j, k, l);
  out << buf;
}

}  // namespace

void write_fcidump(std::ostream& out, const IntegralSet& ints) {
  const std::size_t n = ints.n_spatial();
  out << "&FCI NORB=" << n << ",NELEC=" << ints.n_electrons() << ",MS2=0,\n ORBSYM=";
  for (std::size_t i = 0; i < n; ++i) out << "1,";
  out << "\n ISYM=1,\n&END\n";
  const auto& eri = ints.two_body();
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q <= p; ++q)
      for (std::size_t r = 0; r <= p; ++r)
        for (std::size_t s = 0; s <= r; ++s) {
          if (TwoBodyTensor::pair_index(r, s) > TwoBodyTensor::pair_index(p, q)) continue;
          const double v = eri(p, q, r, s);
          if (v != 0.0) write_entry(out, v, p + 1, q + 1, r + 1, s + 1);
        }
  const auto& h1 = ints.one_body();
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q <= p; ++q) {
      const double v = h1(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
      if (v != 0.0) write_entry(out, v, p + 1, q + 1, 0, 0);
    }
  if (ints.core_energy() != 0.0) write_entry(out, ints.core_energy(), 0, 0, 0, 0);
}

std::string write_fcidump(const IntegralSet& ints) {
  std::ostringstream out;
  write_fcidump(out, ints);
  return out.str();
}

// ---------------------------------------------------------------------------

IntegralSet build_hubbard(const HubbardParams& params) {
  const std::size_t n = params.n_sites;
  if (n == 0) throw ValidationError("Hubbard model needs at least one site");
  Eigen::MatrixXd h1 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h1(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = -params.t;
    h1(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = -params.t;
  }
  // A two-site ring has a single bond, already present.
  if (params.periodic && n >= 3) {
    h1(0, static_cast<Eigen::Index>(n - 1)) = -params.t;
    h1(static_cast<Eigen::Index>(n - 1), 0) = -params.t;
  }
  TwoBodyTensor eri(n);
  for (std::size_t i = 0; i < n; ++i) eri.set(i, i, i, i, params.u);
  const int nelec = params.n_electrons < 0 ? static_cast<int>(n) : params.n_electrons;
  return IntegralSet(nelec, 0.0, std::move(h1), std::move(eri));
}

IntegralSet rotate_integrals(const IntegralSet& ints, const Eigen::MatrixXd& c) {
  if (c.rows() != static_cast<Eigen::Index>(ints.n_spatial()))
    throw ValidationError("rotation has " + std::to_string(c.rows()) + " rows, expected " +
                          std::to_string(ints.n_spatial()));
  Eigen::MatrixXd h1 = c.transpose() * ints.one_body() * c;
  return IntegralSet(ints.n_electrons(), ints.core_energy(), std::move(h1),
                     kernels::omp::transform_two_body(ints.two_body(), c));
}

Eigen::MatrixXd inverse_sqrt(const OverlapMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.matrix());
  if (eig.info() != Eigen::Success) throw ConditioningError("overlap diagonalization failed");
  const double smallest = s.matrix().size() ? eig.eigenvalues().minCoeff() : 1.0;
  if (smallest <= 1e-10)
    throw ConditioningError("overlap matrix is not positive definite (smallest eigenvalue " +
                            std::to_string(smallest) + ")");
  return eig.eigenvectors() * eig.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
         eig.eigenvectors().transpose();
}

IntegralSet lowdin_orthogonalize(const IntegralSet& ints, const OverlapMatrix& s) {
  if (s.matrix().rows() != static_cast<Eigen::Index>(ints.n_spatial()))
    throw ValidationError("overlap dimension does not match the integral set");
  const Eigen::MatrixXd x = inverse_sqrt(s);
  if (x.isIdentity(0.0)) return ints;
  return rotate_integrals(ints, x);
}

}  // namespace qdmet
