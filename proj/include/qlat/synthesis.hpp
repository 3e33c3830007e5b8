#pragma once

#include "qlat/circuit.hpp"
#include "qlat/lattice.hpp"
#include "qlat/pauli.hpp"

namespace qlat {

enum class PotentialVariant { gray_code, mcu_ladder, mcu_feedforward };
enum class OperatorOrder { V_then_T, T_then_V, T_V_T, V_T_V };

PotentialVariant potential_variant_from(const std::string& name);
OperatorOrder operator_order_from(const std::string& name);
std::string to_string(PotentialVariant v);
std::string to_string(OperatorOrder o);

struct TrotterConfig {
  int order = 1;
  int steps = 1;
  double total_time = 0.0;  // MeV^-1
  OperatorOrder operator_order = OperatorOrder::V_then_T;
  PotentialVariant potential_variant = PotentialVariant::gray_code;

  double dt() const { return total_time / steps; }
  void validate() const;
};

/// Tracks the circuit-external phase of synthesized evolutions: the intended
/// operator is e^{i phase} times the raw gate product. The kinetic_shift
/// flag records that the multi-controlled potential construction's theta/4
/// phase has been charged here (equivalent to shifting T by V0/4).
struct PhaseLedger {
  double phase = 0.0;
  bool kinetic_shift = false;
};

/// exp(-iT dt) on the system register: three per-axis diagonal blocks.
/// For 8-site axes uses the fixed 6-CNOT/6-RZ per-axis template; other axis
/// sizes synthesize their (full-set) diagonal family directly. The all-I
/// coefficient goes to the ledger.
QuantumCircuit kinetic_evolution(const LatticeConfig& cfg, double dt,
                                 PhaseLedger& ledger, Registers regs = {});

/// exp(-i D dt) for a commuting {I,Z} family, Gray-ordered with CNOT
/// cancellation. Full mask sets get the 2^m-2 CNOT / 2^m-1 RZ construction.
QuantumCircuit gray_code_diagonal_evolution(const PauliSum& diag_terms,
                                            double dt, PhaseLedger& ledger,
                                            Registers regs = {});

/// exp(-iV dt) with theta = V0*dt. Gray variant: Hadamard shell + full
/// diagonal family. MCU variants: Hadamard/X shells + c^{nq-1}U; the raw
/// product is e^{i theta/4} exp(-iV dt) and -theta/4 is posted to the ledger.
QuantumCircuit potential_evolution(int nq, double theta,
                                   PotentialVariant variant,
                                   PhaseLedger& ledger);

/// Fig.-1-style Toffoli up to diagonal phases: qubits (a,b,target)=(0,1,2);
/// 4 T, 3 CNOT, 2 H; self-inverse.
QuantumCircuit relative_phase_toffoli();

/// e^{i theta/4} * cU with U = diag(e^{-i theta}, 1); control 0, target 1;
/// 3 RZ + 2 CNOT. The -theta/4 compensation is the caller's to track.
QuantumCircuit controlled_phase_cU(double theta);

struct HwpReport {
  int rotations = 0;
  int t_gates = 0;
  int ancillas = 0;
};

/// Replaces n parallel equal-angle RZ(theta) on system qubits 0..n-1 with
/// floor(log2 n)+1 rotations via a Hamming-weight adder tree (n-1 AND
/// ancillas on the aux register, measurement-based uncompute). Induced map
/// on the targets equals the parallel rotations times e^{i ledger phase}.
QuantumCircuit hamming_weight_phasing(int n, double theta, PhaseLedger& ledger,
                                      HwpReport* report = nullptr);

/// One Trotter step of exp(-iH dt) per the configured ordering/variant.
QuantumCircuit trotter_step(const LatticeConfig& cfg, const TrotterConfig& tc,
                            double dt, PhaseLedger& ledger);

/// r steps with interior half-steps merged for order 2.
QuantumCircuit full_evolution(const LatticeConfig& cfg, const TrotterConfig& tc,
                              PhaseLedger& ledger);

enum class AxisOp { kinetic_minus_e0, potential };

/// exp(-i Op (x) Y_a dt) where a is aux qubit 0 (global index n_system).
/// Op = T - e0*I (param = e0) or V (param ignored; theta = V0*dt).
/// extra_const, when nonzero, is folded into the single ancilla rotation
/// (used to merge the MCU theta/4 compensation across a filter step).
QuantumCircuit axis_coupled_evolution(const LatticeConfig& cfg, AxisOp op,
                                      double param, double dt,
                                      PotentialVariant variant,
                                      double extra_const = 0.0);

/// Directionally-controlled step: control=|0> applies the step, control=|1>
/// its inverse. Every RZ is CNOT-sandwiched from the control; the ledger's
/// dt-dependent phase is converted to one RZ on the control and cleared.
QuantumCircuit directional_control_wrap(const QuantumCircuit& step,
                                        PhaseLedger& ledger, int control);

/// First-quantized pairwise contact potential: A particles on `sites`
/// coordinates (log2(sites) qubits each), phase theta when a pair coincides.
QuantumCircuit many_body_potential_evolution(int a_particles, int sites,
                                             double theta,
                                             PhaseLedger& ledger);

/// Product of exp(-i c_P P dt) over the sum's terms (single first-order
/// sweep); general strings via basis-change + CNOT ladders, then peephole.
QuantumCircuit pauli_evolution(const PauliSum& sum, double dt,
                               PhaseLedger& ledger, Registers regs = {});

/// Cancels literally adjacent self-inverse pairs (H-H, X-X, CNOT-CNOT,
/// CZ-CZ, S-Sdg, T-Tdg) until fixpoint.
QuantumCircuit peephole_optimize(const QuantumCircuit& c);

}  // namespace qlat
