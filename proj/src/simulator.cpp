#include "qlat/simulator.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qlat {

namespace {
constexpr Complex kI{0.0, 1.0};
}

void NoiseModel::validate() const {
  if (two_qubit_depolarizing_p < 0.0 || two_qubit_depolarizing_p > 1.0)
    throw std::invalid_argument("depolarizing probability must be in [0,1]");
}

std::string RunResult::to_csv() const {
  std::ostringstream out;
  out << "bitstring,count,frequency\n";
  for (const auto& [bits, count] : histogram)
    out << bits << ',' << count << ','
        << double(count) / double(shots ? shots : 1) << '\n';
  return out.str();
}

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 0 || n_qubits > 28)
    throw std::invalid_argument("unsupported qubit count");
  amps_.assign(uint64_t(1) << n_qubits, Complex{0.0, 0.0});
  amps_[0] = 1.0;
}

StateVector StateVector::from_amplitudes(const Eigen::VectorXcd& amps) {
  const auto dim = static_cast<uint64_t>(amps.size());
  if (dim == 0 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("amplitude length must be a power of 2");
  StateVector s(std::countr_zero(dim));
  for (uint64_t i = 0; i < dim; ++i)
    s.amps_[i] = amps(static_cast<Eigen::Index>(i));
  return s;
}

StateVector StateVector::embed(const Eigen::VectorXcd& sub, int offset,
                               int n_total) {
  const auto sub_dim = static_cast<uint64_t>(sub.size());
  if (sub_dim == 0 || (sub_dim & (sub_dim - 1)) != 0)
    throw std::invalid_argument("embed: sub length must be a power of 2");
  StateVector s(n_total);
  s.amps_[0] = 0.0;
  for (uint64_t i = 0; i < sub_dim; ++i)
    s.amps_[i << offset] = sub(static_cast<Eigen::Index>(i));
  return s;
}

double StateVector::norm() const {
  double n2 = 0.0;
  for (const auto& a : amps_) n2 += std::norm(a);
  return std::sqrt(n2);
}

void StateVector::apply_h(int q) {
  const uint64_t mask = uint64_t(1) << q;
  const double s2 = 1.0 / std::sqrt(2.0);
  const uint64_t dim = amps_.size();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < int64_t(dim); ++i) {
    if (uint64_t(i) & mask) continue;
    Complex a = amps_[uint64_t(i)];
    Complex b = amps_[uint64_t(i) | mask];
    amps_[uint64_t(i)] = s2 * (a + b);
    amps_[uint64_t(i) | mask] = s2 * (a - b);
  }
}

void StateVector::apply_x(int q) {
  const uint64_t mask = uint64_t(1) << q;
  const uint64_t dim = amps_.size();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < int64_t(dim); ++i) {
    if (uint64_t(i) & mask) continue;
    std::swap(amps_[uint64_t(i)], amps_[uint64_t(i) | mask]);
  }
}

void StateVector::apply_diag(int q, Complex d0, Complex d1) {
  const uint64_t mask = uint64_t(1) << q;
  const uint64_t dim = amps_.size();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < int64_t(dim); ++i)
    amps_[uint64_t(i)] *= (uint64_t(i) & mask) ? d1 : d0;
}

void StateVector::apply_ry(int q, double angle) {
  const uint64_t mask = uint64_t(1) << q;
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  const uint64_t dim = amps_.size();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < int64_t(dim); ++i) {
    if (uint64_t(i) & mask) continue;
    Complex a = amps_[uint64_t(i)];
    Complex b = amps_[uint64_t(i) | mask];
    amps_[uint64_t(i)] = c * a - s * b;
    amps_[uint64_t(i) | mask] = s * a + c * b;
  }
}

void StateVector::apply_cnot(int control, int target) {
  const uint64_t cm = uint64_t(1) << control, tm = uint64_t(1) << target;
  const uint64_t dim = amps_.size();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < int64_t(dim); ++i) {
    const auto u = uint64_t(i);
    if ((u & cm) && !(u & tm)) std::swap(amps_[u], amps_[u | tm]);
  }
}

void StateVector::apply_cz(int control, int target) {
  const uint64_t both = (uint64_t(1) << control) | (uint64_t(1) << target);
  const uint64_t dim = amps_.size();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < int64_t(dim); ++i)
    if ((uint64_t(i) & both) == both) amps_[uint64_t(i)] = -amps_[uint64_t(i)];
}

void StateVector::apply_pauli(uint64_t x_mask, uint64_t z_mask) {
  const Complex phase = [&] {
    switch (std::popcount(x_mask & z_mask) % 4) {
      case 0: return Complex{1, 0};
      case 1: return Complex{0, 1};
      case 2: return Complex{-1, 0};
      default: return Complex{0, -1};
    }
  }();
  const uint64_t dim = amps_.size();
  // P|j> = phase * (-1)^{z.j} |j^x>; act on amplitudes: out[j^x] = ...
  // Work in place by pairing j < j^x (or j == j^x when x_mask == 0).
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < int64_t(dim); ++i) {
    const auto j = uint64_t(i);
    const uint64_t k = j ^ x_mask;
    if (k < j) continue;
    const double sj = (std::popcount(z_mask & j) & 1) ? -1.0 : 1.0;
    if (k == j) {
      amps_[j] *= phase * sj;
    } else {
      const double sk = (std::popcount(z_mask & k) & 1) ? -1.0 : 1.0;
      Complex aj = amps_[j], ak = amps_[k];
      amps_[k] = phase * sj * aj;
      amps_[j] = phase * sk * ak;
    }
  }
}

double StateVector::probability_of(int q, int value) const {
  const uint64_t mask = uint64_t(1) << q;
  double p = 0.0;
  for (uint64_t i = 0; i < amps_.size(); ++i)
    if (((i & mask) != 0) == (value != 0)) p += std::norm(amps_[i]);
  return p;
}

int StateVector::measure(int q, SplitMix64& rng) {
  const double p1 = probability_of(q, 1);
  const int outcome = rng.uniform() < p1 ? 1 : 0;
  const double p = outcome ? p1 : 1.0 - p1;
  const double scale = 1.0 / std::sqrt(p);
  const uint64_t mask = uint64_t(1) << q;
  for (uint64_t i = 0; i < amps_.size(); ++i) {
    if (((i & mask) != 0) == (outcome != 0))
      amps_[i] *= scale;
    else
      amps_[i] = 0.0;
  }
  // Measure-and-reset: leave the qubit in |0> so it can be reused as a fresh
  // ancilla. The recorded outcome drives any classically controlled gates.
  if (outcome) {
    for (uint64_t i = 0; i < amps_.size(); ++i) {
      if (i & mask) {
        amps_[i ^ mask] = amps_[i];
        amps_[i] = 0.0;
      }
    }
  }
  return outcome;
}

double StateVector::post_select(int q, int value) {
  const double p = probability_of(q, value);
  if (p < 1e-14)
    throw std::runtime_error("post_select: probability below 1e-14");
  const double scale = 1.0 / std::sqrt(p);
  const uint64_t mask = uint64_t(1) << q;
  for (uint64_t i = 0; i < amps_.size(); ++i) {
    if (((i & mask) != 0) == (value != 0))
      amps_[i] *= scale;
    else
      amps_[i] = 0.0;
  }
  return p;
}

std::vector<double> StateVector::marginal_probabilities(int first_qubit,
                                                        int count) const {
  std::vector<double> out(uint64_t(1) << count, 0.0);
  const uint64_t mask = (uint64_t(1) << count) - 1;
  for (uint64_t i = 0; i < amps_.size(); ++i)
    out[(i >> first_qubit) & mask] += std::norm(amps_[i]);
  return out;
}

void apply_circuit(StateVector& state, const QuantumCircuit& c,
                   SplitMix64* rng, const NoiseModel* noise,
                   std::vector<int>* bits) {
  if (state.n_qubits() != c.n_qubits())
    throw std::invalid_argument("apply_circuit: register shape mismatch");
  if (noise) noise->validate();
  const double p = noise ? noise->two_qubit_depolarizing_p : 0.0;
  if ((c.has_measurement() || p > 0.0) && !rng)
    throw std::invalid_argument("apply_circuit: RNG required");
  std::vector<int> local_bits(static_cast<std::size_t>(c.classical_bits()), 0);
  auto maybe_noise = [&](int qa, int qb) {
    if (p <= 0.0) return;
    if (rng->uniform() >= p) return;
    uint64_t k = rng->below(15) + 1;  // 15 non-identity two-qubit Paulis
    uint64_t pa = k & 3, pb = (k >> 2) & 3;  // 0=I,1=X,2=Z,3=Y
    uint64_t x = 0, z = 0;
    if (pa & 1) x |= uint64_t(1) << qa;
    if (pa & 2) z |= uint64_t(1) << qa;
    if (pb & 1) x |= uint64_t(1) << qb;
    if (pb & 2) z |= uint64_t(1) << qb;
    state.apply_pauli(x, z);
  };
  const double quarter = std::numbers::pi / 4;
  for (const auto& g : c.gates()) {
    switch (g.kind) {
      case GateKind::H: state.apply_h(g.q0); break;
      case GateKind::X: state.apply_x(g.q0); break;
      case GateKind::Z: state.apply_diag(g.q0, 1.0, -1.0); break;
      case GateKind::S: state.apply_diag(g.q0, 1.0, kI); break;
      case GateKind::Sdg: state.apply_diag(g.q0, 1.0, -kI); break;
      case GateKind::T:
        state.apply_diag(g.q0, 1.0, std::exp(kI * quarter));
        break;
      case GateKind::Tdg:
        state.apply_diag(g.q0, 1.0, std::exp(-kI * quarter));
        break;
      case GateKind::RZ:
        state.apply_diag(g.q0, std::exp(-kI * (g.angle / 2)),
                         std::exp(kI * (g.angle / 2)));
        break;
      case GateKind::RY: state.apply_ry(g.q0, g.angle); break;
      case GateKind::CNOT:
        state.apply_cnot(g.q0, g.q1);
        maybe_noise(g.q0, g.q1);
        break;
      case GateKind::CZ:
        state.apply_cz(g.q0, g.q1);
        maybe_noise(g.q0, g.q1);
        break;
      case GateKind::MeasureToBit:
        local_bits[static_cast<std::size_t>(g.bit)] = state.measure(g.q0, *rng);
        break;
      case GateKind::ClassicallyControlledCZ:
        if (local_bits[static_cast<std::size_t>(g.bit)]) {
          state.apply_cz(g.q0, g.q1);
          maybe_noise(g.q0, g.q1);
        }
        break;
    }
  }
  if (bits) *bits = std::move(local_bits);
}

RunResult run(const QuantumCircuit& c, const StateVector& initial, long shots,
              const NoiseModel& noise, uint64_t seed) {
  noise.validate();
  RunResult result;
  result.shots = shots;
  result.seed = seed;
  for (long shot = 0; shot < shots; ++shot) {
    SplitMix64 rng(seed, static_cast<uint64_t>(shot));
    StateVector state = initial;
    std::vector<int> bits;
    apply_circuit(state, c, &rng, &noise, &bits);
    uint64_t key = 0;
    for (std::size_t b = 0; b < bits.size(); ++b)
      if (bits[b]) key |= uint64_t(1) << b;
    ++result.histogram[key];
  }
  return result;
}

double expectation(const Eigen::MatrixXcd& h, const StateVector& state) {
  auto v = state.as_vector();
  if (h.rows() != v.size())
    throw std::invalid_argument("expectation: dimension mismatch");
  return std::real(v.dot(h * v));
}

double expectation(const PauliSum& h, const StateVector& state) {
  // <psi|P|psi> accumulated term by term without forming matrices.
  Complex total{0.0, 0.0};
  const auto& amps = state.amplitudes();
  for (const auto& t : h.terms()) {
    Complex phase = [&] {
      switch (std::popcount(t.x_mask & t.z_mask) % 4) {
        case 0: return Complex{1, 0};
        case 1: return Complex{0, 1};
        case 2: return Complex{-1, 0};
        default: return Complex{0, -1};
      }
    }();
    Complex acc{0.0, 0.0};
    for (uint64_t j = 0; j < amps.size(); ++j) {
      double sign = (std::popcount(t.z_mask & j) & 1) ? -1.0 : 1.0;
      acc += std::conj(amps[j ^ t.x_mask]) * (phase * sign) * amps[j];
    }
    total += t.coefficient * acc;
  }
  return total.real();
}

UnitaryWithPhase unitary_of(const QuantumCircuit& c) {
  if (c.n_qubits() > 14)
    throw std::invalid_argument("unitary_of: refusing more than 14 qubits");
  if (c.has_measurement())
    throw std::logic_error("unitary_of: circuit contains measurements");
  const uint64_t dim = uint64_t(1) << c.n_qubits();
  UnitaryWithPhase out;
  out.matrix.resize(static_cast<Eigen::Index>(dim),
                    static_cast<Eigen::Index>(dim));
  out.phase = c.global_phase();
  for (uint64_t col = 0; col < dim; ++col) {
    StateVector s(c.n_qubits());
    s[0] = 0.0;
    s[col] = 1.0;
    apply_circuit(s, c);
    for (uint64_t row = 0; row < dim; ++row)
      out.matrix(static_cast<Eigen::Index>(row),
                 static_cast<Eigen::Index>(col)) = s[row];
  }
  return out;
}

}  // namespace qlat
