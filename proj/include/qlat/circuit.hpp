#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qlat {

enum class GateKind {
  H, X, Z, S, Sdg, T, Tdg,
  CNOT, CZ, RZ, RY,
  MeasureToBit, ClassicallyControlledCZ,
};

std::string gate_kind_name(GateKind kind);

struct Gate {
  GateKind kind;
  int q0 = -1;      // single-qubit target, or control for 2-qubit kinds
  int q1 = -1;      // target for 2-qubit kinds
  double angle = 0.0;
  int bit = -1;     // classical bit for MeasureToBit / ClassicallyControlledCZ

  bool is_two_qubit() const {
    return kind == GateKind::CNOT || kind == GateKind::CZ ||
           kind == GateKind::ClassicallyControlledCZ;
  }
  bool is_measurement() const { return kind == GateKind::MeasureToBit; }
};

/// Qubit registers in fixed global order: system, then aux, then qpe.
struct Registers {
  int system = 0;
  int aux = 0;
  int qpe = 0;

  int total() const { return system + aux + qpe; }
  int aux_offset() const { return system; }
  int qpe_offset() const { return system + aux; }
  bool operator==(const Registers&) const = default;
};

struct GateCounts {
  long cnot = 0, cz = 0, conditioned_cz = 0, rz = 0, ry = 0;
  long t = 0, s = 0, h = 0, x = 0, z = 0, measure = 0;

  long total() const {
    return cnot + cz + conditioned_cz + rz + ry + t + s + h + x + z + measure;
  }
  GateCounts operator+(const GateCounts& o) const;
  GateCounts operator-(const GateCounts& o) const;
  bool operator==(const GateCounts&) const = default;
  std::string to_csv() const;  // "kind,count" rows
};

class QuantumCircuit {
 public:
  QuantumCircuit() = default;
  explicit QuantumCircuit(Registers regs, int classical_bits = 0)
      : registers_(regs), classical_bits_(classical_bits) {}

  const Registers& registers() const { return registers_; }
  int n_qubits() const { return registers_.total(); }
  int classical_bits() const { return classical_bits_; }
  const std::vector<Gate>& gates() const { return gates_; }
  double global_phase() const { return global_phase_; }
  void add_global_phase(double phi) { global_phase_ += phi; }

  bool has_measurement() const;

  // Appenders validate bounds and distinctness immediately.
  void append(const Gate& g);
  void h(int q) { append({GateKind::H, q}); }
  void x(int q) { append({GateKind::X, q}); }
  void z(int q) { append({GateKind::Z, q}); }
  void s(int q) { append({GateKind::S, q}); }
  void sdg(int q) { append({GateKind::Sdg, q}); }
  void t(int q) { append({GateKind::T, q}); }
  void tdg(int q) { append({GateKind::Tdg, q}); }
  void cnot(int control, int target) { append({GateKind::CNOT, control, target}); }
  void cz(int control, int target) { append({GateKind::CZ, control, target}); }
  void rz(double angle, int target) { append({GateKind::RZ, target, -1, angle}); }
  void ry(double angle, int target) { append({GateKind::RY, target, -1, angle}); }
  void measure(int qubit, int bit) {
    append({GateKind::MeasureToBit, qubit, -1, 0.0, bit});
  }
  void cc_cz(int bit, int control, int target) {
    append({GateKind::ClassicallyControlledCZ, control, target, 0.0, bit});
  }

  QuantumCircuit compose(const QuantumCircuit& other) const;
  QuantumCircuit inverse() const;
  GateCounts count_gates() const;

  std::string to_text() const;
  static QuantumCircuit from_text(const std::string& text);
  std::string to_qasm() const;

 private:
  Registers registers_;
  int classical_bits_ = 0;
  std::vector<Gate> gates_;
  double global_phase_ = 0.0;
  std::vector<bool> bit_written_;
};

struct UnitaryWithPhase {
  Eigen::MatrixXcd matrix;   // raw gate product, phase excluded
  double phase = 0.0;        // intended operator = e^{i phase} * matrix
};

/// Dense gate product of a measurement-free circuit; guarded to <= 14 qubits.
UnitaryWithPhase unitary_of(const QuantumCircuit& c);

/// 2x2 / 4x4 matrix of a single gate kind (for oracles and tests).
Eigen::MatrixXcd gate_matrix(const Gate& g);

}  // namespace qlat
