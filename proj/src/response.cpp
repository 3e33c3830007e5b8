#include "qlat/response.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qlat/pauli.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qlat {

namespace {

constexpr Complex I_UNIT{0.0, 1.0};

int log2_exact(int n) {
  int b = 0;
  while ((1 << b) < n) ++b;
  if ((1 << b) != n) throw std::invalid_argument("size must be a power of 2");
  return b;
}

/// Reverses the low `w` bits of v.
int bit_reverse(int v, int w) {
  int out = 0;
  for (int k = 0; k < w; ++k)
    if (v & (1 << k)) out |= 1 << (w - 1 - k);
  return out;
}

/// Appends src's gates (absolute qubit indices) and global phase to dst,
/// whose registers must contain src's.
void append_gates(QuantumCircuit& dst, const QuantumCircuit& src) {
  if (src.n_qubits() > dst.n_qubits() ||
      src.classical_bits() > dst.classical_bits())
    throw std::logic_error("append_gates: destination too small");
  for (const Gate& g : src.gates()) {
    switch (g.kind) {
      case GateKind::H: dst.h(g.q0); break;
      case GateKind::X: dst.x(g.q0); break;
      case GateKind::Z: dst.z(g.q0); break;
      case GateKind::S: dst.s(g.q0); break;
      case GateKind::Sdg: dst.sdg(g.q0); break;
      case GateKind::T: dst.t(g.q0); break;
      case GateKind::Tdg: dst.tdg(g.q0); break;
      case GateKind::CNOT: dst.cnot(g.q0, g.q1); break;
      case GateKind::CZ: dst.cz(g.q0, g.q1); break;
      case GateKind::RZ: dst.rz(g.angle, g.q0); break;
      case GateKind::RY: dst.ry(g.angle, g.q0); break;
      case GateKind::MeasureToBit: dst.measure(g.q0, g.bit); break;
      case GateKind::ClassicallyControlledCZ:
        dst.cc_cz(g.bit, g.q0, g.q1);
        break;
    }
  }
  dst.add_global_phase(src.global_phase());
}

/// Controlled phase diag(1,1,1,e^{i lambda}) on qubits (a, b) from the cU
/// primitive (X-conjugated target); posts the cU's -theta/4 to the ledger.
void append_cp(QuantumCircuit& out, double lambda, int a, int b,
               PhaseLedger& ledger) {
  const double theta = -lambda;
  QuantumCircuit cu = controlled_phase_cU(theta);
  out.x(b);
  for (const Gate& g : cu.gates()) {
    const int q0 = g.q0 == 0 ? a : b;
    switch (g.kind) {
      case GateKind::CNOT: out.cnot(q0, g.q1 == 0 ? a : b); break;
      case GateKind::RZ: out.rz(g.angle, q0); break;
      default: throw std::logic_error("unexpected gate in cU primitive");
    }
  }
  out.x(b);
  ledger.phase += -theta / 4.0;
}

/// Inverse of the swap-free Fourier transform: reading ancilla value v
/// yields phase index a = bit_reverse(v).
void append_inverse_qft(QuantumCircuit& out, int offset, int w) {
  PhaseLedger ledger;
  for (int k = w - 1; k >= 0; --k) {
    out.h(offset + k);
    for (int i = k - 1; i >= 0; --i)
      append_cp(out, -std::numbers::pi / double(1 << (k - i)), offset + i,
                offset + k, ledger);
  }
  out.add_global_phase(ledger.phase);
}

/// Normalized ground state of the two-body problem after the momentum
/// transfer, as a bare system-register vector.
Eigen::VectorXcd transferred_ground_state(const LatticeConfig& cfg,
                                          const QpeConfig& qc,
                                          const SpectralData& spectrum,
                                          GateCounts* gates) {
  Eigen::VectorXcd psi0 = spectrum.eigenvectors.col(0);
  QuantumCircuit tc =
      transition_circuit(cfg, qc.transition_steps, qc.momentum_units);
  if (gates) *gates = *gates + tc.count_gates();
  StateVector sv = StateVector::from_amplitudes(psi0);
  apply_circuit(sv, tc);
  return sv.as_vector();
}

std::vector<double> qpe_marginals(const StateVector& sv, const Registers& regs,
                                  int w) {
  std::vector<double> marg =
      sv.marginal_probabilities(regs.qpe_offset(), w);
  std::vector<double> p(marg.size());
  for (int v = 0; v < int(marg.size()); ++v)
    p[static_cast<std::size_t>(bit_reverse(v, w))] = marg[size_t(v)];
  return p;
}

}  // namespace

void QpeConfig::validate() const {
  if (w < 1 || w > 20) throw std::invalid_argument("qpe: w out of range");
  if (alpha < 1.0) throw std::invalid_argument("qpe: alpha must be >= 1");
  if (beta < 0.0 || beta >= 1.0)
    throw std::invalid_argument("qpe: beta must be in [0,1)");
  if (trotter_steps_per_unit < 1)
    throw std::invalid_argument("qpe: trotter_steps_per_unit must be >= 1");
  if (transition_steps < 1)
    throw std::invalid_argument("qpe: transition_steps must be >= 1");
  if (momentum_units < 0)
    throw std::invalid_argument("qpe: momentum_units must be >= 0");
}

ScaledHamiltonian scaled_hamiltonian(const SpectralData& spectrum) {
  ScaledHamiltonian out{spectrum.ground_energy(), spectrum.spectral_width()};
  if (out.delta_h <= 0.0)
    throw std::invalid_argument("scaled_hamiltonian: degenerate spectrum");
  return out;
}

double cm_recoil_energy(const LatticeConfig& cfg, int momentum_units) {
  // q = 2 * units * (2 pi / L_z); E_cm = (q hbar_c)^2 / (4 m).
  const double k = 2.0 * std::numbers::pi * momentum_units / cfg.length_z();
  const double q_mev = 2.0 * k * cfg.hbar_c;
  return q_mev * q_mev / (4.0 * cfg.mass);
}

double qe_peak_omega_bar(const LatticeConfig& cfg,
                         const ScaledHamiltonian& scale, int momentum_units) {
  // Relative-motion recoil q^2/4m deposited on top of the ground state.
  return (cm_recoil_energy(cfg, momentum_units) - scale.e0) / scale.delta_h;
}

PauliSum transition_generator(const LatticeConfig& cfg, int units) {
  const int n = cfg.n_z;
  const int nb = log2_exact(n);
  PauliSum out(cfg.n_qubits());
  if (units % n == 0) return out;
  // Cyclic momentum-shift generator: S^u = F diag(exp(-2 pi i m u / n)) F',
  // so G with S^u = exp(iG) has Fourier-diagonal values -2 pi ((m u) mod n)/n.
  Eigen::MatrixXcd f(n, n);
  for (int j = 0; j < n; ++j)
    for (int m = 0; m < n; ++m)
      f(j, m) = std::exp(2.0 * std::numbers::pi * I_UNIT * double(j * m) /
                         double(n)) /
                std::sqrt(double(n));
  Eigen::VectorXd phi(n);
  for (int m = 0; m < n; ++m) {
    int mm = ((m * units) % n + n) % n;
    phi(m) = -2.0 * std::numbers::pi * mm / n;
  }
  Eigen::MatrixXcd g = f * phi.asDiagonal() * f.adjoint();
  const double dim = double(1 << nb);
  for (uint64_t x = 0; x < (uint64_t(1) << nb); ++x) {
    for (uint64_t z = 0; z < (uint64_t(1) << nb); ++z) {
      PauliSum term(nb);
      term.add(x, z, 1.0);
      Eigen::MatrixXcd p = matrix_of(term);
      Complex c = (p.adjoint() * g).trace() / dim;
      if (std::abs(c) > 1e-12) out.add(x, z, c);
    }
  }
  return out;
}

QuantumCircuit transition_circuit(const LatticeConfig& cfg, int steps,
                                  int units) {
  Registers regs{cfg.n_qubits(), 0, 0};
  QuantumCircuit out(regs);
  PauliSum g = transition_generator(cfg, units);
  if (g.terms().empty()) return out;
  if (steps < 1) throw std::invalid_argument("transition_circuit: steps >= 1");
  // Partition the strings into commuting groups with a consistent per-qubit
  // basis (I merges with anything); each group is evolved as one diagonal
  // family after a shared single-qubit basis change.
  struct Group {
    uint64_t x_basis = 0;  // qubits conjugated from X
    uint64_t y_basis = 0;  // qubits conjugated from Y (fixed per group)
    uint64_t z_basis = 0;  // qubits left in Z
    std::vector<PauliTerm> terms;
  };
  std::vector<Group> groups;
  double identity_coeff = 0.0;
  for (const auto& t : g.terms()) {
    if ((t.x_mask | t.z_mask) == 0) {
      identity_coeff = t.coefficient.real();
      continue;
    }
    const uint64_t y = t.x_mask & t.z_mask;
    const uint64_t x = t.x_mask & ~y;
    const uint64_t z = t.z_mask & ~y;
    // Terms sharing the same Y pattern (and no X/Z clash) form one
    // diagonal family; distinct Y patterns stay separate so that each
    // family keeps its coset structure.
    Group* home = nullptr;
    for (Group& grp : groups) {
      if (grp.y_basis == y && (x & grp.z_basis) == 0 &&
          (z & grp.x_basis) == 0) {
        home = &grp;
        break;
      }
    }
    if (!home) {
      groups.emplace_back();
      home = &groups.back();
      home->y_basis = y;
    }
    home->x_basis |= x;
    home->z_basis |= z;
    home->terms.push_back(t);
  }
  const double dt = -1.0 / steps;  // first-order sweeps of exp(+iG/steps)
  QuantumCircuit step(regs);
  for (const Group& grp : groups) {
    PauliSum diag(cfg.n_qubits());
    for (const auto& t : grp.terms)
      diag.add(0, t.x_mask | t.z_mask, t.coefficient);
    for (int b : [&] {
           std::vector<int> bits;
           for (int q = 0; q < 64; ++q)
             if ((grp.x_basis | grp.y_basis) >> q & 1) bits.push_back(q);
           return bits;
         }()) {
      if (grp.y_basis >> b & 1) step.sdg(b);
      step.h(b);
    }
    PhaseLedger unused;
    append_gates(step, gray_code_diagonal_evolution(diag, dt, unused, regs));
    for (int q = 63; q >= 0; --q) {
      if ((grp.x_basis | grp.y_basis) >> q & 1) {
        step.h(q);
        if (grp.y_basis >> q & 1) step.s(q);
      }
    }
  }
  step = peephole_optimize(step);
  for (int r = 0; r < steps; ++r) out = out.compose(step);
  out.add_global_phase(-identity_coeff * dt * steps);
  return peephole_optimize(out);
}

Eigen::MatrixXcd transition_operator_matrix(const LatticeConfig& cfg,
                                            int units) {
  TwoBodyBasis basis(cfg);
  const int n = basis.size();
  const int nz = cfg.n_z;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int iz = i % nz;
    const int shifted = (i - iz) + (((iz + units) % nz + nz) % nz);
    out(shifted, i) = 1.0;
  }
  return out;
}

QuantumCircuit qpe_circuit(const LatticeConfig& cfg, const QpeConfig& qc,
                           const ScaledHamiltonian& scale,
                           bool measure_ancillas) {
  qc.validate();
  const int nq = cfg.n_qubits();
  const bool gray = qc.potential_variant == PotentialVariant::gray_code;
  const int aux_bits =
      qc.potential_variant == PotentialVariant::mcu_feedforward ? nq - 2 : 0;
  Registers regs{nq, gray ? 0 : nq - 2, qc.w};
  QuantumCircuit out(regs, aux_bits + (measure_ancillas ? qc.w : 0));
  for (int k = 0; k < qc.w; ++k) out.h(regs.qpe_offset() + k);
  for (int k = 0; k < qc.w; ++k) {
    // Directionally-controlled evolution: branch ratio between the ancilla's
    // |1> and |0> components equals exp(i 2 pi 2^k alpha (H_bar - beta)).
    const double t_k =
        std::numbers::pi * qc.alpha * double(1 << k) / scale.delta_h;
    TrotterConfig tc;
    tc.order = qc.trotter_order;
    tc.operator_order = qc.operator_order;
    tc.potential_variant = qc.potential_variant;
    tc.steps = qc.trotter_steps_per_unit * (1 << k);
    tc.total_time = t_k;
    PhaseLedger ledger;
    QuantumCircuit step = full_evolution(cfg, tc, ledger);
    // Fold the energy shift: intended factor exp(-i(H - e0 - beta dH) t).
    ledger.phase += (scale.e0 + qc.beta * scale.delta_h) * t_k;
    QuantumCircuit wrapped =
        directional_control_wrap(step, ledger, regs.qpe_offset() + k);
    append_gates(out, wrapped);
  }
  append_inverse_qft(out, regs.qpe_offset(), qc.w);
  if (measure_ancillas)
    for (int k = 0; k < qc.w; ++k)
      out.measure(regs.qpe_offset() + k, aux_bits + k);
  if (qc.gate_budget > 0 && out.count_gates().total() > qc.gate_budget)
    throw std::runtime_error("qpe_circuit: gate budget exceeded");
  return out;
}

ResponseDataset extract_response(const std::vector<double>& probabilities,
                                 const QpeConfig& qc,
                                 const ScaledHamiltonian& scale, double e_cm) {
  if (int(probabilities.size()) != qc.bins())
    throw std::invalid_argument("extract_response: bin count mismatch");
  ResponseDataset out;
  out.config = qc;
  out.total_evolution_time = 2.0 * std::numbers::pi * qc.alpha *
                             double(qc.bins() - 1) / scale.delta_h;
  const double bins = double(qc.bins());
  for (int a = 0; a < qc.bins(); ++a) {
    ResponseRow row;
    row.a = a;
    row.omega_bar = a / (bins * qc.alpha) + qc.beta;
    row.omega_mev = row.omega_bar * scale.delta_h + e_cm;
    row.probability = probabilities[static_cast<std::size_t>(a)];
    row.strength = row.probability * bins * qc.alpha;
    out.rows.push_back(row);
  }
  return out;
}

std::string ResponseDataset::to_csv() const {
  std::ostringstream os;
  os.precision(6);
  os << "a,omega_bar,omega_mev,probability,strength\n";
  for (const auto& r : rows)
    os << r.a << ',' << r.omega_bar << ',' << r.omega_mev << ','
       << r.probability << ',' << r.strength << '\n';
  return os.str();
}

std::vector<double> run_qpe_amplitudes(const LatticeConfig& cfg,
                                       const QpeConfig& qc, uint64_t seed,
                                       const NoiseModel* noise,
                                       GateCounts* gates) {
  TwoBodyBasis basis(cfg);
  SpectralData spectrum = diagonalize(build_hamiltonian(basis));
  ScaledHamiltonian scale = scaled_hamiltonian(spectrum);
  Eigen::VectorXcd psi = transferred_ground_state(cfg, qc, spectrum, gates);
  QuantumCircuit qpe = qpe_circuit(cfg, qc, scale, false);
  if (gates) *gates = *gates + qpe.count_gates();
  StateVector sv = StateVector::embed(psi, 0, qpe.n_qubits());
  SplitMix64 rng(seed);
  apply_circuit(sv, qpe, &rng, noise);
  return qpe_marginals(sv, qpe.registers(), qc.w);
}

std::vector<double> run_qpe_oracle(const LatticeConfig& cfg,
                                   const QpeConfig& qc) {
  qc.validate();
  TwoBodyBasis basis(cfg);
  SpectralData spectrum = diagonalize(build_hamiltonian(basis));
  ScaledHamiltonian scale = scaled_hamiltonian(spectrum);
  Eigen::VectorXcd psi =
      transition_operator_matrix(cfg, qc.momentum_units) *
      spectrum.eigenvectors.col(0);
  Eigen::VectorXcd c = spectrum.eigenvectors.adjoint() * psi;
  const int bins = qc.bins();
  std::vector<double> p(static_cast<std::size_t>(bins), 0.0);
  // Exact per-eigenstate ancilla states, then a dense inverse Fourier
  // transform on the ancilla register.
  for (int nu = 0; nu < c.size(); ++nu) {
    const double weight = std::norm(c(nu));
    if (weight < 1e-300) continue;
    const double phase = qc.alpha * (scale.scaled(spectrum.eigenvalues(nu)) -
                                     qc.beta);
    Eigen::VectorXcd anc(bins);
    for (int j = 0; j < bins; ++j)
      anc(j) = std::exp(2.0 * std::numbers::pi * I_UNIT * phase * double(j)) /
               std::sqrt(double(bins));
    for (int a = 0; a < bins; ++a) {
      Complex amp = 0.0;
      for (int j = 0; j < bins; ++j)
        amp += anc(j) * std::exp(-2.0 * std::numbers::pi * I_UNIT *
                                 double(j) * double(a) / double(bins));
      p[static_cast<std::size_t>(a)] += weight * std::norm(amp) / bins;
    }
  }
  return p;
}

std::vector<long> run_qpe_shots(const LatticeConfig& cfg, const QpeConfig& qc,
                                long shots, uint64_t seed,
                                const NoiseModel* noise) {
  TwoBodyBasis basis(cfg);
  SpectralData spectrum = diagonalize(build_hamiltonian(basis));
  ScaledHamiltonian scale = scaled_hamiltonian(spectrum);
  Eigen::VectorXcd psi = transferred_ground_state(cfg, qc, spectrum, nullptr);
  QuantumCircuit qpe = qpe_circuit(cfg, qc, scale, true);
  const int aux_bits = qpe.classical_bits() - qc.w;
  StateVector initial = StateVector::embed(psi, 0, qpe.n_qubits());
  RunResult result =
      run(qpe, initial, shots, noise ? *noise : NoiseModel{}, seed);
  std::vector<long> counts(static_cast<std::size_t>(qc.bins()), 0);
  for (const auto& [key, n] : result.histogram) {
    const int v = int((key >> aux_bits) & uint64_t(qc.bins() - 1));
    counts[static_cast<std::size_t>(bit_reverse(v, qc.w))] += n;
  }
  return counts;
}

std::vector<double> exact_qpe_reference(const SpectralData& spectrum,
                                        const Eigen::MatrixXcd& transition_op,
                                        const Eigen::VectorXcd& initial_state,
                                        const QpeConfig& qc) {
  qc.validate();
  ScaledHamiltonian scale = scaled_hamiltonian(spectrum);
  Eigen::VectorXcd c =
      spectrum.eigenvectors.adjoint() * (transition_op * initial_state);
  const int bins = qc.bins();
  std::vector<double> p(static_cast<std::size_t>(bins), 0.0);
  for (int nu = 0; nu < c.size(); ++nu) {
    const double weight = std::norm(c(nu));
    if (weight < 1e-300) continue;
    const double phi = qc.alpha * (scale.scaled(spectrum.eigenvalues(nu)) -
                                   qc.beta);
    for (int a = 0; a < bins; ++a) {
      const double x = phi - double(a) / bins;
      const double s = std::sin(std::numbers::pi * x);
      double kernel;
      if (std::abs(s) < 1e-12) {
        kernel = 1.0;  // eigenvalue exactly on this grid point
      } else {
        kernel = std::sin(std::numbers::pi * bins * x) / (bins * s);
      }
      p[static_cast<std::size_t>(a)] += weight * kernel * kernel;
    }
  }
  return p;
}

std::vector<NoiseSweepPoint> noise_sweep(const LatticeConfig& cfg,
                                         const QpeConfig& qc,
                                         const std::vector<double>& p_values,
                                         int trajectories, uint64_t seed) {
  if (trajectories < 1)
    throw std::invalid_argument("noise_sweep: trajectories >= 1");
  TwoBodyBasis basis(cfg);
  SpectralData spectrum = diagonalize(build_hamiltonian(basis));
  ScaledHamiltonian scale = scaled_hamiltonian(spectrum);
  Eigen::VectorXcd psi = transferred_ground_state(cfg, qc, spectrum, nullptr);
  QuantumCircuit qpe = qpe_circuit(cfg, qc, scale, false);
  const Eigen::VectorXcd full0 =
      StateVector::embed(psi, 0, qpe.n_qubits()).as_vector();
  std::vector<NoiseSweepPoint> out;
  const int bins = qc.bins();
  for (std::size_t pi = 0; pi < p_values.size(); ++pi) {
    NoiseModel noise{p_values[pi]};
    std::vector<double> sum(static_cast<std::size_t>(bins), 0.0);
    std::vector<double> sum2(static_cast<std::size_t>(bins), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int t = 0; t < trajectories; ++t) {
      SplitMix64 rng(seed, pi * 100003 + static_cast<uint64_t>(t));
      StateVector sv = StateVector::from_amplitudes(full0);
      apply_circuit(sv, qpe, &rng, &noise);
      std::vector<double> p = qpe_marginals(sv, qpe.registers(), qc.w);
#ifdef _OPENMP
#pragma omp critical
#endif
      for (int a = 0; a < bins; ++a) {
        sum[static_cast<std::size_t>(a)] += p[static_cast<std::size_t>(a)];
        sum2[static_cast<std::size_t>(a)] +=
            p[static_cast<std::size_t>(a)] * p[static_cast<std::size_t>(a)];
      }
    }
    NoiseSweepPoint point;
    point.p = p_values[pi];
    point.mean.resize(static_cast<std::size_t>(bins));
    point.variance.resize(static_cast<std::size_t>(bins));
    for (int a = 0; a < bins; ++a) {
      const double m = sum[static_cast<std::size_t>(a)] / trajectories;
      point.mean[static_cast<std::size_t>(a)] = m;
      point.variance[static_cast<std::size_t>(a)] =
          sum2[static_cast<std::size_t>(a)] / trajectories - m * m;
    }
    out.push_back(std::move(point));
  }
  return out;
}

}  // namespace qlat
