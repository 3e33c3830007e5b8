#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qlat {

using Complex = std::complex<double>;

/// A weighted n-qubit Pauli string stored as a pair of bitmasks.
/// Bit q of x_mask / z_mask selects X / Z on qubit q; both bits set means Y.
/// The operator is i^{popcount(x&z)} * prod_q X^x_q Z^z_q, so that the
/// (x=1,z=1) case is exactly the Pauli Y matrix.
struct PauliTerm {
  uint64_t x_mask = 0;
  uint64_t z_mask = 0;
  Complex coefficient{0.0, 0.0};

  bool is_diagonal() const { return x_mask == 0; }
  bool is_identity() const { return x_mask == 0 && z_mask == 0; }
  int weight() const;

  /// Symbol string over {I,X,Y,Z}, qubit 0 first.
  std::string axes(int n_qubits) const;

  bool commutes_with(const PauliTerm& other) const;
};

/// A deduplicated sum of Pauli terms over a fixed qubit count.
class PauliSum {
 public:
  PauliSum() = default;
  explicit PauliSum(int n_qubits) : n_qubits_(n_qubits) {}

  int n_qubits() const { return n_qubits_; }
  const std::vector<PauliTerm>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  void add(const PauliTerm& term);
  void add(uint64_t x_mask, uint64_t z_mask, Complex coefficient);
  PauliSum& operator+=(const PauliSum& other);
  PauliSum scaled(Complex factor) const;

  /// Drops terms with |coefficient| < threshold.
  void prune(double threshold = 1e-12);

  /// Coefficient of a given string, zero if absent.
  Complex coefficient_of(uint64_t x_mask, uint64_t z_mask) const;

  bool all_terms_commute() const;
  bool is_diagonal() const;

  std::string to_text() const;
  static PauliSum from_text(const std::string& text, int n_qubits);

 private:
  int n_qubits_ = 0;
  std::vector<PauliTerm> terms_;
};

/// Maps |ket_bits><bra_bits| (bitstrings over n_qubits) to 2^n Pauli terms,
/// each with coefficient magnitude 2^-n.
PauliSum map_projector(uint64_t ket_bits, uint64_t bra_bits, int n_qubits);

/// Maps a dense 2^n x 2^n matrix to its (pruned) Pauli expansion.
/// Uses the Walsh-Hadamard structure per X-offset: O(N^2 log N).
PauliSum map_matrix(const Eigen::MatrixXcd& m, double prune_threshold = 1e-12);

/// Maps a real diagonal to its {I,Z} expansion via a fast Walsh-Hadamard
/// transform scaled by 2^-n.
PauliSum map_diagonal(const Eigen::VectorXd& d, double prune_threshold = 1e-12);

/// Dense matrix of a Pauli sum. Guarded to n_qubits <= 12.
Eigen::MatrixXcd matrix_of(const PauliSum& s);

/// Orders diagonal ({I,Z}-only) terms so consecutive Z-masks differ in
/// exactly one bit (reflected Gray code). Throws if a non-diagonal term is
/// present or no such ordering exists for the given mask set.
std::vector<PauliTerm> gray_code_order(const PauliSum& diagonal_terms);

/// Rank of a mask in the standard reflected Gray sequence.
uint64_t gray_rank(uint64_t mask);

/// In-place Walsh-Hadamard transform (unnormalized), length must be 2^n.
void walsh_hadamard(std::vector<double>& v);

}  // namespace qlat
