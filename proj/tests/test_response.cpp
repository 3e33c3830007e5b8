#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qlat/response.hpp"
#include "qlat/simulator.hpp"

using namespace qlat;

namespace {

LatticeConfig cube(int n) {
  LatticeConfig cfg;
  cfg.n_x = cfg.n_y = cfg.n_z = n;
  return cfg;
}

int argmax(const std::vector<double>& v) {
  return int(std::max_element(v.begin(), v.end()) - v.begin());
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST_CASE("scaled_hamiltonian_reference") {
  LatticeConfig cfg = cube(8);
  SpectralData spectrum = diagonalize(build_hamiltonian(TwoBodyBasis(cfg)));
  ScaledHamiltonian scale = scaled_hamiltonian(spectrum);
  CHECK(scale.delta_h == doctest::Approx(1232.0).epsilon(0.005));
  CHECK(scale.scaled(spectrum.eigenvalues(0)) == doctest::Approx(0.0));
  CHECK(scale.scaled(spectrum.eigenvalues(spectrum.eigenvalues.size() - 1)) ==
        doctest::Approx(1.0));
  // Energy resolution delta_h / 2^w / alpha for the windowed configuration.
  QpeConfig qc;
  qc.w = 3;
  qc.alpha = 8.0;
  CHECK(scale.delta_h / (qc.bins() * qc.alpha) ==
        doctest::Approx(19.25).epsilon(0.01));
}

TEST_CASE("cm_recoil_energy_reference") {
  LatticeConfig cfg = cube(8);
  CHECK(cm_recoil_energy(cfg, 1) == doctest::Approx(25.5814).epsilon(1e-4));
  ScaledHamiltonian scale{-4.375, 1232.0};
  CHECK(qe_peak_omega_bar(cfg, scale) ==
        doctest::Approx((25.5814 + 4.375) / 1232.0).epsilon(1e-3));
}

TEST_CASE("transition_generator_strings") {
  LatticeConfig cfg = cube(8);
  PauliSum g = transition_generator(cfg, 1);
  CHECK(g.terms().size() == 16);  // identity plus 15 weighted strings
  bool has_identity = false;
  for (const auto& t : g.terms()) {
    CHECK((t.x_mask | t.z_mask) < 8);  // z-axis qubits only
    if (t.x_mask == 0 && t.z_mask == 0) has_identity = true;
  }
  CHECK(has_identity);
  CHECK(transition_generator(cfg, 0).terms().empty());
}

TEST_CASE("transition_circuit_counts_and_fidelity") {
  LatticeConfig cfg = cube(8);
  TwoBodyBasis basis(cfg);
  GateCounts one = transition_circuit(cfg, 1).count_gates();
  CHECK(one.rz == 15);
  CHECK(one.cnot == 14);
  GateCounts thirty = transition_circuit(cfg, 30).count_gates();
  CHECK(thirty.rz == 450);
  CHECK(thirty.cnot == 420);

  // Oracle agreement: the exact operator is the unit momentum shift.
  Eigen::MatrixXcd exact = transition_operator_matrix(cfg, 1);
  CHECK((exact - momentum_shift_z(basis).cast<Complex>()).norm() < 1e-14);

  SpectralData spectrum = diagonalize(build_hamiltonian(basis));
  Eigen::VectorXcd psi0 = spectrum.eigenvectors.col(0);
  StateVector sv = StateVector::from_amplitudes(psi0);
  apply_circuit(sv, transition_circuit(cfg, 30));
  Eigen::VectorXcd want = exact * psi0;
  const double fidelity = std::norm((want.adjoint() * sv.as_vector())(0));
  CHECK(fidelity >= 0.999);
}

TEST_CASE("qpe_bit_order_on_grid_eigenstate") {
  // Top eigenstate (omega_bar = 1), beta = 5/8, alpha = 1, W = 3: phase
  // sits exactly on grid point a = 3, which pins the readout bit order.
  LatticeConfig cfg = cube(2);
  SpectralData spectrum = diagonalize(build_hamiltonian(TwoBodyBasis(cfg)));
  ScaledHamiltonian scale = scaled_hamiltonian(spectrum);
  QpeConfig qc;
  qc.w = 3;
  qc.alpha = 1.0;
  qc.beta = 5.0 / 8.0;
  qc.trotter_steps_per_unit = 48;
  qc.trotter_order = 2;
  qc.operator_order = OperatorOrder::T_V_T;
  qc.potential_variant = PotentialVariant::gray_code;
  QuantumCircuit c = qpe_circuit(cfg, qc, scale);
  Eigen::VectorXcd top =
      spectrum.eigenvectors.col(spectrum.eigenvalues.size() - 1);
  StateVector sv = StateVector::embed(top, 0, c.n_qubits());
  apply_circuit(sv, c);
  std::vector<double> marg =
      sv.marginal_probabilities(c.registers().qpe_offset(), qc.w);
  // Reconstruct P(a) with the documented bit reversal.
  std::vector<double> p(8, 0.0);
  for (int v = 0; v < 8; ++v) {
    int a = ((v & 1) << 2) | (v & 2) | ((v >> 2) & 1);
    p[static_cast<std::size_t>(a)] = marg[static_cast<std::size_t>(v)];
  }
  CHECK(argmax(p) == 3);
  CHECK(p[3] > 0.9);
  CHECK(sum(p) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("oracle_matches_analytic_reference") {
  LatticeConfig cfg = cube(8);
  TwoBodyBasis basis(cfg);
  SpectralData spectrum = diagonalize(build_hamiltonian(basis));
  QpeConfig qc;
  qc.w = 6;
  std::vector<double> oracle = run_qpe_oracle(cfg, qc);
  std::vector<double> ref = exact_qpe_reference(
      spectrum, transition_operator_matrix(cfg, 1),
      spectrum.eigenvectors.col(0), qc);
  REQUIRE(oracle.size() == 64);
  for (int a = 0; a < 64; ++a)
    CHECK(std::abs(oracle[static_cast<std::size_t>(a)] -
                   ref[static_cast<std::size_t>(a)]) < 1e-8);
  CHECK(sum(oracle) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sum(ref) == doctest::Approx(1.0).epsilon(1e-10));
  // Peak near the quasi-elastic center.
  ScaledHamiltonian scale = scaled_hamiltonian(spectrum);
  const double peak_pos = double(argmax(ref)) / 64.0;
  CHECK(std::abs(peak_pos - qe_peak_omega_bar(cfg, scale)) < 2.0 / 64.0);
}

TEST_CASE("on_grid_eigenvalue_keeps_full_weight") {
  // Synthetic two-level spectrum with an eigenvalue exactly on a grid point.
  SpectralData spectrum;
  spectrum.eigenvalues.resize(2);
  spectrum.eigenvalues << 0.0, 16.0;  // width 16, omega_bar in {0, 1}
  spectrum.eigenvectors = Eigen::MatrixXcd::Identity(2, 2);
  QpeConfig qc;
  qc.w = 2;
  Eigen::MatrixXcd op = Eigen::MatrixXcd::Identity(2, 2);
  Eigen::VectorXcd psi(2);
  psi << 1.0, 0.0;
  std::vector<double> p = exact_qpe_reference(spectrum, op, psi, qc);
  CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p[1] + p[2] + p[3] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("trotter_amplitude_run_reduced_lattice") {
  LatticeConfig cfg = cube(4);
  TwoBodyBasis basis(cfg);
  SpectralData spectrum = diagonalize(build_hamiltonian(basis));
  QpeConfig qc;
  qc.w = 4;
  qc.trotter_steps_per_unit = 4;
  qc.trotter_order = 2;
  qc.operator_order = OperatorOrder::T_V_T;
  qc.potential_variant = PotentialVariant::gray_code;
  GateCounts gates;
  std::vector<double> p = run_qpe_amplitudes(cfg, qc, 1, nullptr, &gates);
  std::vector<double> ref = exact_qpe_reference(
      spectrum, transition_operator_matrix(cfg, 1),
      spectrum.eigenvectors.col(0), qc);
  CHECK(sum(p) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(argmax(p) == argmax(ref));
  const double peak = ref[static_cast<std::size_t>(argmax(ref))];
  CHECK(std::abs(p[static_cast<std::size_t>(argmax(ref))] - peak) <
        0.1 * peak);
  CHECK(gates.cnot > 0);
}

TEST_CASE("windowed_preset_gate_counts") {
  LatticeConfig cfg = cube(8);
  SpectralData spectrum = diagonalize(build_hamiltonian(TwoBodyBasis(cfg)));
  ScaledHamiltonian scale = scaled_hamiltonian(spectrum);
  QpeConfig qc;
  qc.w = 3;
  qc.alpha = 8.0;
  qc.beta = 0.02;
  qc.trotter_steps_per_unit = 10;  // 70 steps across the three ancillas
  qc.trotter_order = 1;
  qc.potential_variant = PotentialVariant::mcu_feedforward;
  CHECK(qc.total_trotter_steps() == 70);
  GateCounts counts = qpe_circuit(cfg, qc, scale).count_gates();
  CHECK(counts.cnot == 5816);
  CHECK(counts.conditioned_cz == 490);
  CHECK(counts.t == 1960);
  CHECK(counts.rz == 1482);
  // Within a few percent of the quoted stack size.
  CHECK(std::abs(double(counts.cnot) - 5800.0) / 5800.0 < 0.05);
  CHECK(std::abs(double(counts.conditioned_cz) - 500.0) / 500.0 < 0.05);
  CHECK(std::abs(double(counts.t) - 2000.0) / 2000.0 < 0.05);
  CHECK(std::abs(double(counts.rz) - 1500.0) / 1500.0 < 0.05);
}

TEST_CASE("full_window_preset_shape") {
  LatticeConfig cfg = cube(8);
  SpectralData spectrum = diagonalize(build_hamiltonian(TwoBodyBasis(cfg)));
  ScaledHamiltonian scale = scaled_hamiltonian(spectrum);
  QpeConfig qc;
  qc.w = 6;
  qc.trotter_steps_per_unit = 1;  // 63 steps
  qc.potential_variant = PotentialVariant::mcu_feedforward;
  CHECK(qc.total_trotter_steps() == 63);
  QuantumCircuit c = qpe_circuit(cfg, qc, scale);
  CHECK(c.n_qubits() == 22);  // 9 system + 7 aux + 6 ancillas
  GateCounts counts = c.count_gates();
  CHECK(counts.cnot > 5000);
  CHECK(counts.cnot < 7000);
}

TEST_CASE("gate_budget_enforced") {
  LatticeConfig cfg = cube(2);
  SpectralData spectrum = diagonalize(build_hamiltonian(TwoBodyBasis(cfg)));
  ScaledHamiltonian scale = scaled_hamiltonian(spectrum);
  QpeConfig qc;
  qc.w = 2;
  qc.potential_variant = PotentialVariant::gray_code;
  qc.gate_budget = 10;
  CHECK_THROWS(qpe_circuit(cfg, qc, scale));
  QpeConfig bad;
  bad.alpha = 0.5;
  CHECK_THROWS(bad.validate());
  bad = QpeConfig{};
  bad.beta = 1.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("extract_response_mapping") {
  QpeConfig qc;
  qc.w = 2;
  qc.alpha = 2.0;
  qc.beta = 0.25;
  ScaledHamiltonian scale{-4.0, 1000.0};
  std::vector<double> p = {0.4, 0.3, 0.2, 0.1};
  ResponseDataset d = extract_response(p, qc, scale, 25.0);
  REQUIRE(d.rows.size() == 4);
  CHECK(d.rows[1].omega_bar == doctest::Approx(1.0 / 8.0 + 0.25));
  CHECK(d.rows[1].omega_mev == doctest::Approx((1.0 / 8.0 + 0.25) * 1000.0 +
                                               25.0));
  CHECK(d.rows[1].strength == doctest::Approx(0.3 * 8.0));
  CHECK(d.total_evolution_time ==
        doctest::Approx(2.0 * std::numbers::pi * 2.0 * 3.0 / 1000.0));
  std::string csv = d.to_csv();
  CHECK(csv.find("a,omega_bar,omega_mev,probability,strength") !=
        std::string::npos);
}

TEST_CASE("shots_mode_consistency") {
  LatticeConfig cfg = cube(2);
  QpeConfig qc;
  qc.w = 2;
  qc.trotter_steps_per_unit = 8;
  qc.trotter_order = 2;
  qc.operator_order = OperatorOrder::T_V_T;
  qc.potential_variant = PotentialVariant::gray_code;
  qc.transition_steps = 20;
  const long shots = 4000;
  std::vector<long> counts = run_qpe_shots(cfg, qc, shots, 11);
  long total = 0;
  for (long c : counts) total += c;
  CHECK(total == shots);
  std::vector<double> amp = run_qpe_amplitudes(cfg, qc);
  for (int a = 0; a < 4; ++a) {
    const double f = double(counts[static_cast<std::size_t>(a)]) / shots;
    CHECK(std::abs(f - amp[static_cast<std::size_t>(a)]) < 0.05);
  }
}

TEST_CASE("noise_sweep_statistics") {
  LatticeConfig cfg = cube(2);
  QpeConfig qc;
  qc.w = 2;
  qc.trotter_steps_per_unit = 8;
  qc.trotter_order = 2;
  qc.operator_order = OperatorOrder::T_V_T;
  qc.potential_variant = PotentialVariant::gray_code;
  qc.transition_steps = 20;
  auto points = noise_sweep(cfg, qc, {0.0, 2e-3}, 6, 3);
  REQUIRE(points.size() == 2);
  std::vector<double> clean = run_qpe_amplitudes(cfg, qc);
  for (int a = 0; a < 4; ++a) {
    CHECK(points[0].mean[static_cast<std::size_t>(a)] ==
          doctest::Approx(clean[static_cast<std::size_t>(a)]).epsilon(1e-9));
    CHECK(points[0].variance[static_cast<std::size_t>(a)] < 1e-12);
  }
  CHECK(sum(points[1].mean) == doctest::Approx(1.0).epsilon(1e-9));
}
