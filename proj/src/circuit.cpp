#include "qlat/circuit.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace qlat {

std::string gate_kind_name(GateKind kind) {
  switch (kind) {
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::Z: return "Z";
    case GateKind::S: return "S";
    case GateKind::Sdg: return "SDG";
    case GateKind::T: return "T";
    case GateKind::Tdg: return "TDG";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CZ: return "CZ";
    case GateKind::RZ: return "RZ";
    case GateKind::RY: return "RY";
    case GateKind::MeasureToBit: return "MEASURE";
    case GateKind::ClassicallyControlledCZ: return "CCZ";
  }
  return "?";
}

GateCounts GateCounts::operator+(const GateCounts& o) const {
  GateCounts r = *this;
  r.cnot += o.cnot; r.cz += o.cz; r.conditioned_cz += o.conditioned_cz;
  r.rz += o.rz; r.ry += o.ry; r.t += o.t; r.s += o.s; r.h += o.h;
  r.x += o.x; r.z += o.z; r.measure += o.measure;
  return r;
}

GateCounts GateCounts::operator-(const GateCounts& o) const {
  GateCounts r = *this;
  r.cnot -= o.cnot; r.cz -= o.cz; r.conditioned_cz -= o.conditioned_cz;
  r.rz -= o.rz; r.ry -= o.ry; r.t -= o.t; r.s -= o.s; r.h -= o.h;
  r.x -= o.x; r.z -= o.z; r.measure -= o.measure;
  return r;
}

std::string GateCounts::to_csv() const {
  std::ostringstream out;
  out << "kind,count\n"
      << "cnot," << cnot << "\ncz," << cz << "\nconditioned_cz," << conditioned_cz
      << "\nrz," << rz << "\nry," << ry << "\nt," << t << "\ns," << s
      << "\nh," << h << "\nx," << x << "\nz," << z << "\nmeasure," << measure
      << "\n";
  return out.str();
}

bool QuantumCircuit::has_measurement() const {
  for (const auto& g : gates_)
    if (g.is_measurement()) return true;
  return false;
}

void QuantumCircuit::append(const Gate& g) {
  const int nq = n_qubits();
  auto check_qubit = [nq](int q) {
    if (q < 0 || q >= nq) throw std::out_of_range("qubit index out of range");
  };
  if (!std::isfinite(g.angle)) throw std::invalid_argument("non-finite angle");
  check_qubit(g.q0);
  if (g.is_two_qubit()) {
    check_qubit(g.q1);
    if (g.q0 == g.q1) throw std::invalid_argument("control equals target");
  }
  if (g.kind == GateKind::MeasureToBit ||
      g.kind == GateKind::ClassicallyControlledCZ) {
    if (g.bit < 0 || g.bit >= classical_bits_)
      throw std::out_of_range("classical bit out of range");
    if (static_cast<int>(bit_written_.size()) < classical_bits_)
      bit_written_.resize(static_cast<std::size_t>(classical_bits_), false);
    if (g.kind == GateKind::MeasureToBit)
      bit_written_[static_cast<std::size_t>(g.bit)] = true;
    else if (!bit_written_[static_cast<std::size_t>(g.bit)])
      throw std::logic_error("classically controlled gate reads unwritten bit");
  }
  gates_.push_back(g);
}

QuantumCircuit QuantumCircuit::compose(const QuantumCircuit& other) const {
  if (!(registers_ == other.registers_))
    throw std::invalid_argument("compose: register shape mismatch");
  QuantumCircuit out(registers_, std::max(classical_bits_, other.classical_bits_));
  out.gates_ = gates_;
  out.bit_written_ = bit_written_;
  out.global_phase_ = global_phase_;
  for (const auto& g : other.gates_) out.append(g);
  out.global_phase_ += other.global_phase_;
  return out;
}

QuantumCircuit QuantumCircuit::inverse() const {
  if (has_measurement())
    throw std::logic_error("cannot invert a circuit with measurements");
  QuantumCircuit out(registers_, classical_bits_);
  out.global_phase_ = -global_phase_;
  for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) {
    Gate g = *it;
    switch (g.kind) {
      case GateKind::S: g.kind = GateKind::Sdg; break;
      case GateKind::Sdg: g.kind = GateKind::S; break;
      case GateKind::T: g.kind = GateKind::Tdg; break;
      case GateKind::Tdg: g.kind = GateKind::T; break;
      case GateKind::RZ:
      case GateKind::RY: g.angle = -g.angle; break;
      default: break;  // H, X, Z, CNOT, CZ are self-inverse
    }
    out.append(g);
  }
  return out;
}

GateCounts QuantumCircuit::count_gates() const {
  GateCounts c;
  for (const auto& g : gates_) {
    switch (g.kind) {
      case GateKind::H: ++c.h; break;
      case GateKind::X: ++c.x; break;
      case GateKind::Z: ++c.z; break;
      case GateKind::S:
      case GateKind::Sdg: ++c.s; break;
      case GateKind::T:
      case GateKind::Tdg: ++c.t; break;
      case GateKind::CNOT: ++c.cnot; break;
      case GateKind::CZ: ++c.cz; break;
      case GateKind::RZ: ++c.rz; break;
      case GateKind::RY: ++c.ry; break;
      case GateKind::MeasureToBit: ++c.measure; break;
      case GateKind::ClassicallyControlledCZ: ++c.conditioned_cz; break;
    }
  }
  return c;
}

std::string QuantumCircuit::to_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "REGISTERS " << registers_.system << ' ' << registers_.aux << ' '
      << registers_.qpe << '\n';
  out << "BITS " << classical_bits_ << '\n';
  out << "PHASE " << global_phase_ << '\n';
  for (const auto& g : gates_) {
    out << gate_kind_name(g.kind);
    switch (g.kind) {
      case GateKind::CNOT:
      case GateKind::CZ:
        out << ' ' << g.q0 << ' ' << g.q1; break;
      case GateKind::RZ:
      case GateKind::RY:
        out << ' ' << g.q0 << ' ' << g.angle; break;
      case GateKind::MeasureToBit:
        out << ' ' << g.q0 << ' ' << g.bit; break;
      case GateKind::ClassicallyControlledCZ:
        out << ' ' << g.bit << ' ' << g.q0 << ' ' << g.q1; break;
      default:
        out << ' ' << g.q0; break;
    }
    out << '\n';
  }
  return out.str();
}

QuantumCircuit QuantumCircuit::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  Registers regs;
  int bits = 0;
  double phase = 0.0;
  in >> word;
  if (word != "REGISTERS") throw std::runtime_error("missing REGISTERS header");
  in >> regs.system >> regs.aux >> regs.qpe;
  in >> word >> bits;
  in >> word >> phase;
  QuantumCircuit c(regs, bits);
  c.global_phase_ = phase;
  while (in >> word) {
    Gate g;
    if (word == "CNOT" || word == "CZ") {
      g.kind = word == "CNOT" ? GateKind::CNOT : GateKind::CZ;
      in >> g.q0 >> g.q1;
    } else if (word == "RZ" || word == "RY") {
      g.kind = word == "RZ" ? GateKind::RZ : GateKind::RY;
      in >> g.q0 >> g.angle;
    } else if (word == "MEASURE") {
      g.kind = GateKind::MeasureToBit;
      in >> g.q0 >> g.bit;
    } else if (word == "CCZ") {
      g.kind = GateKind::ClassicallyControlledCZ;
      in >> g.bit >> g.q0 >> g.q1;
    } else if (word == "H") { g.kind = GateKind::H; in >> g.q0;
    } else if (word == "X") { g.kind = GateKind::X; in >> g.q0;
    } else if (word == "Z") { g.kind = GateKind::Z; in >> g.q0;
    } else if (word == "S") { g.kind = GateKind::S; in >> g.q0;
    } else if (word == "SDG") { g.kind = GateKind::Sdg; in >> g.q0;
    } else if (word == "T") { g.kind = GateKind::T; in >> g.q0;
    } else if (word == "TDG") { g.kind = GateKind::Tdg; in >> g.q0;
    } else {
      throw std::runtime_error("unknown gate kind: " + word);
    }
    c.append(g);
  }
  return c;
}

std::string QuantumCircuit::to_qasm() const {
  std::ostringstream out;
  out.precision(17);
  out << "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";
  out << "qreg q[" << n_qubits() << "];\n";
  if (classical_bits_ > 0) out << "creg c[" << classical_bits_ << "];\n";
  for (const auto& g : gates_) {
    switch (g.kind) {
      case GateKind::H: out << "h q[" << g.q0 << "];\n"; break;
      case GateKind::X: out << "x q[" << g.q0 << "];\n"; break;
      case GateKind::Z: out << "z q[" << g.q0 << "];\n"; break;
      case GateKind::S: out << "s q[" << g.q0 << "];\n"; break;
      case GateKind::Sdg: out << "sdg q[" << g.q0 << "];\n"; break;
      case GateKind::T: out << "t q[" << g.q0 << "];\n"; break;
      case GateKind::Tdg: out << "tdg q[" << g.q0 << "];\n"; break;
      case GateKind::CNOT:
        out << "cx q[" << g.q0 << "],q[" << g.q1 << "];\n"; break;
      case GateKind::CZ:
        out << "cz q[" << g.q0 << "],q[" << g.q1 << "];\n"; break;
      case GateKind::RZ:
        out << "rz(" << g.angle << ") q[" << g.q0 << "];\n"; break;
      case GateKind::RY:
        out << "ry(" << g.angle << ") q[" << g.q0 << "];\n"; break;
      case GateKind::MeasureToBit:
        out << "measure q[" << g.q0 << "] -> c[" << g.bit << "];\n"; break;
      case GateKind::ClassicallyControlledCZ:
        out << "if (c[" << g.bit << "] == 1) cz q[" << g.q0 << "],q[" << g.q1
            << "];\n";
        break;
    }
  }
  return out.str();
}

Eigen::MatrixXcd gate_matrix(const Gate& g) {
  using C = std::complex<double>;
  const C i{0.0, 1.0};
  const double s2 = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXcd m;
  switch (g.kind) {
    case GateKind::H:
      m.resize(2, 2); m << s2, s2, s2, -s2; return m;
    case GateKind::X:
      m.resize(2, 2); m << 0, 1, 1, 0; return m;
    case GateKind::Z:
      m.resize(2, 2); m << 1, 0, 0, -1; return m;
    case GateKind::S:
      m.resize(2, 2); m << 1, 0, 0, i; return m;
    case GateKind::Sdg:
      m.resize(2, 2); m << 1, 0, 0, -i; return m;
    case GateKind::T:
      m.resize(2, 2); m << 1, 0, 0, std::exp(i * (M_PI / 4)); return m;
    case GateKind::Tdg:
      m.resize(2, 2); m << 1, 0, 0, std::exp(-i * (M_PI / 4)); return m;
    case GateKind::RZ:
      m.resize(2, 2);
      m << std::exp(-i * (g.angle / 2)), 0, 0, std::exp(i * (g.angle / 2));
      return m;
    case GateKind::RY:
      m.resize(2, 2);
      m << std::cos(g.angle / 2), -std::sin(g.angle / 2),
           std::sin(g.angle / 2), std::cos(g.angle / 2);
      return m;
    case GateKind::CNOT:
      // Local basis index = bit(q0) + 2*bit(q1); q0 is the control.
      m = Eigen::MatrixXcd::Zero(4, 4);
      m(0, 0) = 1; m(2, 2) = 1; m(3, 1) = 1; m(1, 3) = 1;
      return m;
    case GateKind::CZ:
      m = Eigen::MatrixXcd::Identity(4, 4);
      m(3, 3) = -1;
      return m;
    default:
      throw std::invalid_argument("gate_matrix: non-unitary gate kind");
  }
}

}  // namespace qlat
