#include "qlat/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace qlat {

namespace {

constexpr Complex kI{0.0, 1.0};

Complex i_pow(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

void walsh_hadamard_complex(std::vector<Complex>& v) {
  const std::size_t n = v.size();
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        Complex a = v[j], b = v[j + h];
        v[j] = a + b;
        v[j + h] = a - b;
      }
    }
  }
}

uint64_t key_of(uint64_t x, uint64_t z) { return (x << 32) | z; }

}  // namespace

int PauliTerm::weight() const { return std::popcount(x_mask | z_mask); }

std::string PauliTerm::axes(int n_qubits) const {
  std::string s;
  s.reserve(static_cast<std::size_t>(n_qubits));
  for (int q = 0; q < n_qubits; ++q) {
    bool x = (x_mask >> q) & 1, z = (z_mask >> q) & 1;
    s.push_back(x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I'));
  }
  return s;
}

bool PauliTerm::commutes_with(const PauliTerm& other) const {
  int sym = std::popcount(x_mask & other.z_mask) +
            std::popcount(z_mask & other.x_mask);
  return (sym & 1) == 0;
}

void PauliSum::add(const PauliTerm& term) {
  for (auto& t : terms_) {
    if (t.x_mask == term.x_mask && t.z_mask == term.z_mask) {
      t.coefficient += term.coefficient;
      return;
    }
  }
  terms_.push_back(term);
}

void PauliSum::add(uint64_t x_mask, uint64_t z_mask, Complex coefficient) {
  add(PauliTerm{x_mask, z_mask, coefficient});
}

PauliSum& PauliSum::operator+=(const PauliSum& other) {
  if (other.n_qubits_ > n_qubits_) n_qubits_ = other.n_qubits_;
  // Hash-based merge: linear add() would be quadratic at 512+ terms.
  std::unordered_map<uint64_t, std::size_t> index;
  index.reserve(terms_.size() + other.terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i)
    index[key_of(terms_[i].x_mask, terms_[i].z_mask)] = i;
  for (const auto& t : other.terms_) {
    auto [it, inserted] = index.try_emplace(key_of(t.x_mask, t.z_mask), terms_.size());
    if (inserted)
      terms_.push_back(t);
    else
      terms_[it->second].coefficient += t.coefficient;
  }
  return *this;
}

PauliSum PauliSum::scaled(Complex factor) const {
  PauliSum out(n_qubits_);
  out.terms_ = terms_;
  for (auto& t : out.terms_) t.coefficient *= factor;
  return out;
}

void PauliSum::prune(double threshold) {
  std::erase_if(terms_, [threshold](const PauliTerm& t) {
    return std::abs(t.coefficient) < threshold;
  });
}

Complex PauliSum::coefficient_of(uint64_t x_mask, uint64_t z_mask) const {
  for (const auto& t : terms_)
    if (t.x_mask == x_mask && t.z_mask == z_mask) return t.coefficient;
  return {0.0, 0.0};
}

bool PauliSum::all_terms_commute() const {
  for (std::size_t i = 0; i < terms_.size(); ++i)
    for (std::size_t j = i + 1; j < terms_.size(); ++j)
      if (!terms_[i].commutes_with(terms_[j])) return false;
  return true;
}

bool PauliSum::is_diagonal() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const PauliTerm& t) { return t.is_diagonal(); });
}

std::string PauliSum::to_text() const {
  std::string out;
  char buf[64];
  for (const auto& t : terms_) {
    double re = t.coefficient.real(), im = t.coefficient.imag();
    if (std::abs(im) < 1e-12) {
      std::snprintf(buf, sizeof(buf), "%+.5f", re);
      out += buf;
    } else {
      std::snprintf(buf, sizeof(buf), "%+.5f%+.5fj", re, im);
      out += buf;
    }
    out += ' ';
    out += t.axes(n_qubits_);
    out += '\n';
  }
  return out;
}

PauliSum PauliSum::from_text(const std::string& text, int n_qubits) {
  PauliSum out(n_qubits);
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string coef_str, axes;
    if (!(ls >> coef_str >> axes))
      throw std::runtime_error("bad pauli line: " + line);
    double re = 0.0, im = 0.0;
    if (!coef_str.empty() && coef_str.back() == 'j') {
      // "+r.rrrrr+i.iiiiij": split at the sign of the imaginary part.
      coef_str.pop_back();
      std::size_t split = coef_str.find_last_of("+-");
      re = std::stod(coef_str.substr(0, split));
      im = std::stod(coef_str.substr(split));
    } else {
      re = std::stod(coef_str);
    }
    if (static_cast<int>(axes.size()) != n_qubits)
      throw std::runtime_error("axes length mismatch: " + line);
    uint64_t x = 0, z = 0;
    for (int q = 0; q < n_qubits; ++q) {
      switch (axes[static_cast<std::size_t>(q)]) {
        case 'I': break;
        case 'X': x |= 1ull << q; break;
        case 'Y': x |= 1ull << q; z |= 1ull << q; break;
        case 'Z': z |= 1ull << q; break;
        default: throw std::runtime_error("bad axis char: " + line);
      }
    }
    out.add(x, z, Complex{re, im});
  }
  return out;
}

PauliSum map_projector(uint64_t ket_bits, uint64_t bra_bits, int n_qubits) {
  // |ket><bra| = X^{ket^bra} |bra><bra|; expand the diagonal projector over
  // Z-masks and fold the Y phase in.
  const uint64_t dim = 1ull << n_qubits;
  const uint64_t x = ket_bits ^ bra_bits;
  PauliSum out(n_qubits);
  const double scale = 1.0 / static_cast<double>(dim);
  for (uint64_t z = 0; z < dim; ++z) {
    double sign = (std::popcount(z & bra_bits) & 1) ? -1.0 : 1.0;
    Complex c = sign * scale * i_pow(-std::popcount(x & z));
    out.add(PauliTerm{x, z, c});
  }
  return out;
}

PauliSum map_matrix(const Eigen::MatrixXcd& m, double prune_threshold) {
  const auto dim = static_cast<uint64_t>(m.rows());
  if (m.cols() != m.rows() || dim == 0 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("map_matrix: dimension must be a power of 2");
  int n_qubits = std::countr_zero(dim);
  PauliSum out(n_qubits);
  std::vector<Complex> f(dim);
  const double scale = 1.0 / static_cast<double>(dim);
  for (uint64_t x = 0; x < dim; ++x) {
    // coeff(x,z) = (1/N) (-i)^{|x&z|} sum_j (-1)^{z.j} M[j^x, j]
    for (uint64_t j = 0; j < dim; ++j)
      f[j] = m(static_cast<Eigen::Index>(j ^ x), static_cast<Eigen::Index>(j));
    walsh_hadamard_complex(f);
    for (uint64_t z = 0; z < dim; ++z) {
      Complex c = scale * i_pow(-std::popcount(x & z)) * f[z];
      if (std::abs(c) >= prune_threshold) out.add(PauliTerm{x, z, c});
    }
  }
  return out;
}

PauliSum map_diagonal(const Eigen::VectorXd& d, double prune_threshold) {
  const auto dim = static_cast<uint64_t>(d.size());
  if (dim == 0 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("map_diagonal: length must be a power of 2");
  int n_qubits = std::countr_zero(dim);
  std::vector<double> f(d.data(), d.data() + dim);
  walsh_hadamard(f);
  PauliSum out(n_qubits);
  const double scale = 1.0 / static_cast<double>(dim);
  for (uint64_t z = 0; z < dim; ++z) {
    double c = scale * f[z];
    if (std::abs(c) >= prune_threshold) out.add(PauliTerm{0, z, Complex{c, 0.0}});
  }
  return out;
}

Eigen::MatrixXcd matrix_of(const PauliSum& s) {
  if (s.n_qubits() > 12)
    throw std::invalid_argument("matrix_of: refusing n_qubits > 12");
  const uint64_t dim = 1ull << s.n_qubits();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
  for (const auto& t : s.terms()) {
    Complex phase = i_pow(std::popcount(t.x_mask & t.z_mask));
    for (uint64_t j = 0; j < dim; ++j) {
      double sign = (std::popcount(t.z_mask & j) & 1) ? -1.0 : 1.0;
      m(static_cast<Eigen::Index>(j ^ t.x_mask), static_cast<Eigen::Index>(j)) +=
          t.coefficient * phase * sign;
    }
  }
  return m;
}

uint64_t gray_rank(uint64_t mask) {
  uint64_t r = mask;
  for (int s = 1; s < 64; s <<= 1) r ^= r >> s;
  return r;
}

namespace {

bool hamiltonian_path(std::vector<PauliTerm>& terms, std::size_t fixed) {
  if (fixed == terms.size()) return true;
  for (std::size_t i = fixed; i < terms.size(); ++i) {
    if (fixed > 0 &&
        std::popcount(terms[fixed - 1].z_mask ^ terms[i].z_mask) != 1)
      continue;
    std::swap(terms[fixed], terms[i]);
    if (hamiltonian_path(terms, fixed + 1)) return true;
    std::swap(terms[fixed], terms[i]);
  }
  return false;
}

}  // namespace

std::vector<PauliTerm> gray_code_order(const PauliSum& diagonal_terms) {
  std::vector<PauliTerm> out = diagonal_terms.terms();
  for (const auto& t : out)
    if (!t.is_diagonal())
      throw std::invalid_argument("gray_code_order: non-diagonal term");
  std::sort(out.begin(), out.end(), [](const PauliTerm& a, const PauliTerm& b) {
    return gray_rank(a.z_mask) < gray_rank(b.z_mask);
  });
  bool ok = true;
  for (std::size_t i = 1; ok && i < out.size(); ++i)
    ok = std::popcount(out[i - 1].z_mask ^ out[i].z_mask) == 1;
  if (!ok) {
    // Contiguous-rank sort failed: the set is gapped. Small families can
    // still admit a single-bit-step path; find it by backtracking.
    if (out.size() > 24 || !hamiltonian_path(out, 0))
      throw std::runtime_error(
          "gray_code_order: mask set has no single-bit-step ordering");
  }
  return out;
}

void walsh_hadamard(std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("walsh_hadamard: length must be a power of 2");
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        double a = v[j], b = v[j + h];
        v[j] = a + b;
        v[j + h] = a - b;
      }
    }
  }
}

}  // namespace qlat
