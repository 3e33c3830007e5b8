#include <doctest.h>

#include <numbers>

#include "qlat/circuit.hpp"
#include "qlat/simulator.hpp"

using namespace qlat;

namespace {

QuantumCircuit small(int n) { return QuantumCircuit(Registers{n, 0, 0}); }

double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("append_validation") {
  QuantumCircuit c(Registers{2, 1, 0}, 1);
  CHECK_NOTHROW(c.h(2));          // aux qubit is global index 2
  CHECK_THROWS(c.h(3));
  CHECK_THROWS(c.cnot(1, 1));     // control == target
  CHECK_THROWS(c.rz(std::nan(""), 0));
  CHECK_THROWS(c.measure(0, 1));  // bit out of range
  // Conditioned gate must read a written bit.
  CHECK_THROWS(c.cc_cz(0, 0, 1));
  c.measure(0, 0);
  CHECK_NOTHROW(c.cc_cz(0, 0, 1));
}

TEST_CASE("compose_and_counts") {
  QuantumCircuit a = small(2), b = small(2);
  a.h(0); a.cnot(0, 1); a.add_global_phase(0.25);
  b.rz(0.5, 1); b.t(0); b.tdg(1); b.add_global_phase(-0.1);
  QuantumCircuit ab = a.compose(b);
  CHECK(ab.gates().size() == 5);
  CHECK(ab.global_phase() == doctest::Approx(0.15));
  GateCounts counts = ab.count_gates();
  CHECK(counts.h == 1);
  CHECK(counts.cnot == 1);
  CHECK(counts.rz == 1);
  CHECK(counts.t == 2);  // T and Tdg tally together
  CHECK(counts.total() == 5);
  CHECK((a.count_gates() + b.count_gates()) == counts);

  QuantumCircuit mismatched(Registers{3, 0, 0});
  CHECK_THROWS(a.compose(mismatched));
  CHECK(a.compose(small(2)).gates().size() == a.gates().size());
}

TEST_CASE("inverse_properties") {
  QuantumCircuit c = small(2);
  c.h(0); c.s(1); c.t(0); c.cnot(0, 1); c.rz(0.7, 1); c.ry(-0.3, 0);
  c.add_global_phase(0.5);
  QuantumCircuit inv = c.inverse();
  CHECK(inv.global_phase() == doctest::Approx(-0.5));
  CHECK(inv.gates().front().kind == GateKind::RY);
  CHECK(inv.gates().front().angle == doctest::Approx(0.3));

  auto u = unitary_of(c.compose(inv));
  CHECK(max_abs_diff(u.matrix, Eigen::MatrixXcd::Identity(4, 4)) < 1e-12);
  CHECK(u.phase == doctest::Approx(0.0));

  QuantumCircuit same = inv.inverse();
  REQUIRE(same.gates().size() == c.gates().size());
  for (std::size_t i = 0; i < c.gates().size(); ++i) {
    CHECK(same.gates()[i].kind == c.gates()[i].kind);
    CHECK(same.gates()[i].angle == doctest::Approx(c.gates()[i].angle));
  }

  QuantumCircuit meas(Registers{1, 0, 0}, 1);
  meas.measure(0, 0);
  CHECK_THROWS(meas.inverse());
}

TEST_CASE("gate_matrices_are_unitary") {
  for (GateKind k : {GateKind::H, GateKind::X, GateKind::Z, GateKind::S,
                     GateKind::Sdg, GateKind::T, GateKind::Tdg}) {
    Eigen::MatrixXcd m = gate_matrix({k, 0});
    CHECK(max_abs_diff(m * m.adjoint(), Eigen::MatrixXcd::Identity(2, 2)) <
          1e-14);
  }
  for (double angle : {0.3, -1.7}) {
    for (GateKind k : {GateKind::RZ, GateKind::RY}) {
      Eigen::MatrixXcd m = gate_matrix({k, 0, -1, angle});
      CHECK(max_abs_diff(m * m.adjoint(), Eigen::MatrixXcd::Identity(2, 2)) <
            1e-14);
    }
  }
  for (GateKind k : {GateKind::CNOT, GateKind::CZ}) {
    Eigen::MatrixXcd m = gate_matrix({k, 0, 1});
    CHECK(max_abs_diff(m * m.adjoint(), Eigen::MatrixXcd::Identity(4, 4)) <
          1e-14);
  }
}

TEST_CASE("unitary_of_simple_identities") {
  QuantumCircuit hh = small(1);
  hh.h(0); hh.h(0);
  CHECK(max_abs_diff(unitary_of(hh).matrix, Eigen::MatrixXcd::Identity(2, 2)) <
        1e-14);

  // Bell circuit columns.
  QuantumCircuit bell = small(2);
  bell.h(0); bell.cnot(0, 1);
  Eigen::MatrixXcd u = unitary_of(bell).matrix;
  CHECK(std::abs(u(0, 0) - 1.0 / std::sqrt(2.0)) < 1e-14);
  CHECK(std::abs(u(3, 0) - 1.0 / std::sqrt(2.0)) < 1e-14);

  // Multiplicative over compose.
  QuantumCircuit a = small(2), b = small(2);
  a.h(0); a.rz(0.4, 1);
  b.cnot(1, 0); b.t(0);
  CHECK(max_abs_diff(unitary_of(a.compose(b)).matrix,
                     unitary_of(b).matrix * unitary_of(a).matrix) < 1e-13);
}

TEST_CASE("text_round_trip_and_qasm") {
  QuantumCircuit c(Registers{2, 1, 1}, 2);
  c.h(0); c.x(3); c.cnot(0, 2); c.rz(0.123456789, 1);
  c.measure(2, 0); c.cc_cz(0, 0, 1);
  c.add_global_phase(1.5);
  QuantumCircuit back = QuantumCircuit::from_text(c.to_text());
  CHECK(back.to_text() == c.to_text());
  CHECK(back.registers() == c.registers());
  CHECK(back.global_phase() == doctest::Approx(1.5));

  std::string qasm = c.to_qasm();
  CHECK(qasm.find("OPENQASM 2.0") != std::string::npos);
  CHECK(qasm.find("cx q[0],q[2];") != std::string::npos);
  CHECK(qasm.find("measure q[2] -> c[0];") != std::string::npos);

  std::string csv = c.count_gates().to_csv();
  CHECK(csv.find("cnot,1") != std::string::npos);
  CHECK(csv.find("conditioned_cz,1") != std::string::npos);
}
