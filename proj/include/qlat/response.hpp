#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qlat/lattice.hpp"
#include "qlat/simulator.hpp"
#include "qlat/synthesis.hpp"

namespace qlat {

/// Phase-estimation configuration for the response-function pipeline.
/// The ancilla grid covers the scaled-energy window [beta, beta + 1/alpha):
/// omega_bar(a) = a / (2^w * alpha) + beta for a in [0, 2^w).
struct QpeConfig {
  int w = 6;             // phase-estimation ancilla count
  double alpha = 1.0;    // window compression, >= 1
  double beta = 0.0;     // window offset, in [0, 1)
  int trotter_steps_per_unit = 1;  // steps for k=0; doubles with each k
  int trotter_order = 1;
  OperatorOrder operator_order = OperatorOrder::V_then_T;
  PotentialVariant potential_variant = PotentialVariant::mcu_feedforward;
  int transition_steps = 30;  // first-order steps for the transition circuit
  int momentum_units = 1;     // momentum transfer q/2 in grid units along z
  long gate_budget = 0;       // 0 = unlimited; else cap on total gate count

  int bins() const { return 1 << w; }
  int total_trotter_steps() const {
    return trotter_steps_per_unit * ((1 << w) - 1);
  }
  void validate() const;
};

/// Shifted/scaled Hamiltonian parameters: H_bar = (H - e0) / delta_h has
/// eigenvalues in [0, 1].
struct ScaledHamiltonian {
  double e0 = 0.0;       // ground energy, MeV
  double delta_h = 0.0;  // spectral width, MeV
  double scaled(double energy) const { return (energy - e0) / delta_h; }
};
ScaledHamiltonian scaled_hamiltonian(const SpectralData& spectrum);

/// Center-of-mass recoil energy q^2 / 4m for momentum transfer q = 2 * units
/// * (2 pi / L_z), in MeV.
double cm_recoil_energy(const LatticeConfig& cfg, int momentum_units = 1);

/// Scaled position of the quasi-elastic peak: relative-motion recoil on top
/// of the ground state, (q^2/4m - e0) / delta_h.
double qe_peak_omega_bar(const LatticeConfig& cfg,
                         const ScaledHamiltonian& scale,
                         int momentum_units = 1);

/// Hermitian generator G of the momentum-transfer operator exp(iG), which
/// shifts the z-axis momentum by `units` grid steps (identity for units=0).
PauliSum transition_generator(const LatticeConfig& cfg, int units = 1);

/// First-order Trotter circuit for exp(iG) on the system register.
QuantumCircuit transition_circuit(const LatticeConfig& cfg, int steps,
                                  int units = 1);

/// Exact momentum-transfer operator on the two-body basis (oracle).
Eigen::MatrixXcd transition_operator_matrix(const LatticeConfig& cfg,
                                            int units = 1);

/// Full phase-estimation circuit on registers {system, aux, w}: Hadamards on
/// the ancillas, directionally-controlled Trotter evolutions realizing a
/// branch ratio of exp(i 2 pi 2^k alpha (H_bar - beta)) per ancilla k, and an
/// inverse Fourier transform (bit-reversed readout: ancilla k carries output
/// bit w-1-k). With measure_ancillas the ancillas are read into the top w
/// classical bits.
QuantumCircuit qpe_circuit(const LatticeConfig& cfg, const QpeConfig& qc,
                           const ScaledHamiltonian& scale,
                           bool measure_ancillas = false);

/// One row of the extracted response: bin index, scaled energy, physical
/// energy, outcome probability, and strength density.
struct ResponseRow {
  int a = 0;
  double omega_bar = 0.0;
  double omega_mev = 0.0;
  double probability = 0.0;
  double strength = 0.0;
};

struct ResponseDataset {
  std::vector<ResponseRow> rows;
  QpeConfig config;
  uint64_t seed = 0;
  GateCounts gates;
  double total_evolution_time = 0.0;  // MeV^-1
  std::string to_csv() const;
};

/// Maps bin probabilities to (omega_bar, omega, strength): omega_bar =
/// a/(2^w alpha) + beta, omega = omega_bar * delta_h + e_cm, strength =
/// probability * 2^w * alpha (probability per unit omega_bar).
ResponseDataset extract_response(const std::vector<double>& probabilities,
                                 const QpeConfig& qc,
                                 const ScaledHamiltonian& scale, double e_cm);

/// Runs the full circuit pipeline (transition circuit, then phase
/// estimation) on the exact ground state and reads the exact ancilla
/// distribution from the final statevector. No sampling.
std::vector<double> run_qpe_amplitudes(const LatticeConfig& cfg,
                                       const QpeConfig& qc, uint64_t seed = 1,
                                       const NoiseModel* noise = nullptr,
                                       GateCounts* gates = nullptr);

/// Same readout, but with every controlled evolution replaced by its exact
/// eigenbasis action (no Trotter error); the ancilla Fourier transform is
/// applied as a dense matrix. Separates binning error from Trotter error.
std::vector<double> run_qpe_oracle(const LatticeConfig& cfg,
                                   const QpeConfig& qc);

/// Shot-sampled readout: measures the ancillas and histograms `shots`
/// repetitions into bin counts (index a).
std::vector<long> run_qpe_shots(const LatticeConfig& cfg, const QpeConfig& qc,
                                long shots, uint64_t seed,
                                const NoiseModel* noise = nullptr);

/// Analytic phase-estimation outcome distribution: P(a) = sum_nu w_nu
/// |K(x)|^2 with the Fejer-type kernel K = sin(pi 2^w x) / (2^w sin(pi x)),
/// x = alpha (omega_bar_nu - beta) - a/2^w, and spectral weights w_nu =
/// |<Psi_nu| O |Psi_0>|^2.
std::vector<double> exact_qpe_reference(const SpectralData& spectrum,
                                        const Eigen::MatrixXcd& transition_op,
                                        const Eigen::VectorXcd& initial_state,
                                        const QpeConfig& qc);

/// Mean and variance of the bin probabilities over noisy trajectories.
struct NoiseSweepPoint {
  double p = 0.0;
  std::vector<double> mean;
  std::vector<double> variance;
};

std::vector<NoiseSweepPoint> noise_sweep(const LatticeConfig& cfg,
                                         const QpeConfig& qc,
                                         const std::vector<double>& p_values,
                                         int trajectories, uint64_t seed);

}  // namespace qlat
