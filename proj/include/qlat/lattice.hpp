#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qlat {

/// Periodic cubic lattice for the relative motion of a two-body system,
/// with an attractive contact interaction.
struct LatticeConfig {
  int n_x = 8, n_y = 8, n_z = 8;   // sites per axis, even powers of 2
  double spacing_a = 1.0;          // fm
  double v0 = -235.0;              // MeV, contact strength
  double hbar_c = 197.327;         // MeV fm
  double mass = 938.92;            // MeV, nucleon mass

  int total_sites() const { return n_x * n_y * n_z; }
  int n_qubits() const;
  double length_x() const { return n_x * spacing_a; }
  double length_y() const { return n_y * spacing_a; }
  double length_z() const { return n_z * spacing_a; }

  void validate() const;  // throws std::invalid_argument on bad fields
};

struct MomentumVector {
  double kx = 0.0, ky = 0.0, kz = 0.0;  // fm^-1
  double squared() const { return kx * kx + ky * ky + kz * kz; }
};

/// Relative-momentum basis |k,-k>, indexed so that each axis contributes
/// bits (z fastest, then y, then x) and the per-axis value index j maps to
/// the momentum integer j mod n (order 0, +1, ..., +(n/2-1), -n/2, ..., -1).
class TwoBodyBasis {
 public:
  explicit TwoBodyBasis(const LatticeConfig& config);

  int size() const { return static_cast<int>(momenta_.size()); }
  int n_qubits() const { return n_qubits_; }
  const LatticeConfig& config() const { return config_; }
  const MomentumVector& momentum(int index) const {
    return momenta_[static_cast<std::size_t>(index)];
  }

  /// Kinetic energy hbar_c^2 |k|^2 / m of basis state `index` (MeV).
  double kinetic(int index) const;

  /// Per-axis kinetic eigenvalues C * j_int^2 for one axis with n sites,
  /// indexed by the axis value index (length n).
  static Eigen::VectorXd axis_kinetic_diagonal(int n, double spacing_a,
                                               double hbar_c, double mass);

  /// Signed momentum integer for axis value index j on an n-site axis.
  static int momentum_integer(int j, int n);

  /// Axis value index for a signed momentum integer (wraps mod n).
  static int value_index(int k_int, int n);

 private:
  LatticeConfig config_;
  int n_qubits_ = 0;
  std::vector<MomentumVector> momenta_;
};

struct SpectralData {
  Eigen::VectorXd eigenvalues;   // ascending, MeV
  Eigen::MatrixXcd eigenvectors; // columns match eigenvalues
  double ground_energy() const { return eigenvalues(0); }
  double gap() const { return eigenvalues(1) - eigenvalues(0); }
  double spectral_width() const {
    return eigenvalues(eigenvalues.size() - 1) - eigenvalues(0);
  }
};

/// Dense N x N momentum-space Hamiltonian:
/// H[i][j] = delta_ij * kinetic(k_i) + V0/N.
Eigen::MatrixXd build_hamiltonian(const TwoBodyBasis& basis);

/// Full spectrum of a real-symmetric Hamiltonian.
SpectralData diagonalize(const Eigen::MatrixXd& h);

/// Zero-relative-momentum initial state |psi_i> = |k = 0>, basis index 0.
Eigen::VectorXcd zero_momentum_state(int dim);

/// Uniform superposition over all basis states (Hadamard product state).
Eigen::VectorXcd uniform_state(int dim);

/// Exact response function: frequencies omega_nu = E_nu - E_0 and weights
/// |<nu|O|psi>|^2 for every eigenstate nu.
struct ExactResponse {
  Eigen::VectorXd frequencies;  // MeV
  Eigen::VectorXd weights;
};
ExactResponse exact_response(const SpectralData& spectrum,
                             const Eigen::MatrixXcd& transition_op,
                             const Eigen::VectorXcd& initial_state);

/// Exact energy-filter action: normalized cos[(H - e0) t] |psi> together
/// with the ancilla-success probability <psi| cos^2 |psi>.
struct FilterResult {
  Eigen::VectorXcd state;
  double probability = 0.0;
  double energy = 0.0;  // <state|H|state>, MeV
};
FilterResult exact_filtered_state(const Eigen::MatrixXd& h,
                                  const SpectralData& spectrum, double e0,
                                  double t, const Eigen::VectorXcd& psi);

/// Permutation matrix for the transition operator exp(i (q/2).r) with
/// q/2 = 2*pi/L_z along z: cyclic momentum shift k_z -> k_z + 2*pi/L_z.
Eigen::MatrixXd momentum_shift_z(const TwoBodyBasis& basis);

/// Flat key-value config file: one "key = value" per line, '#' comments.
std::map<std::string, std::string> parse_config_file(const std::string& path);
LatticeConfig lattice_config_from(const std::map<std::string, std::string>& kv);

}  // namespace qlat
