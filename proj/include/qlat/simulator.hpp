#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "qlat/circuit.hpp"
#include "qlat/pauli.hpp"

namespace qlat {

/// Counter-based splittable RNG; per-trajectory streams are derived
/// deterministically from (seed, trajectory_index).
struct SplitMix64 {
  uint64_t state = 0;

  explicit SplitMix64(uint64_t seed) : state(seed) {}
  // Scatter the combined (seed, stream) value through the output mix so
  // that distinct streams start from unrelated states; a plain golden-ratio
  // offset would make stream t+1 a one-step-shifted copy of stream t.
  SplitMix64(uint64_t seed, uint64_t stream)
      : state(mix(seed + (stream + 1) * 0x9E3779B97F4A7C15ull)) {}

  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  uint64_t next() { return mix(state += 0x9E3779B97F4A7C15ull); }
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }
  uint64_t below(uint64_t n) { return next() % n; }
};

struct NoiseModel {
  double two_qubit_depolarizing_p = 0.0;
  void validate() const;
};

struct RunResult {
  std::map<uint64_t, long> histogram;  // measured classical bits -> count
  long shots = 0;
  uint64_t seed = 0;
  long trajectories = 1;
  std::string to_csv() const;  // bitstring,count,frequency
};

/// Dense statevector; qubit q corresponds to bit q of the amplitude index.
class StateVector {
 public:
  explicit StateVector(int n_qubits);
  static StateVector from_amplitudes(const Eigen::VectorXcd& amps);

  int n_qubits() const { return n_qubits_; }
  uint64_t dim() const { return uint64_t(1) << n_qubits_; }
  Complex& operator[](uint64_t i) { return amps_[i]; }
  const Complex& operator[](uint64_t i) const { return amps_[i]; }
  const std::vector<Complex>& amplitudes() const { return amps_; }
  Eigen::Map<const Eigen::VectorXcd> as_vector() const {
    return {amps_.data(), static_cast<Eigen::Index>(amps_.size())};
  }
  double norm() const;

  /// Places `sub` on qubits [offset, offset + sub.size qubits), |0> elsewhere.
  static StateVector embed(const Eigen::VectorXcd& sub, int offset,
                           int n_total);

  void apply_h(int q);
  void apply_x(int q);
  void apply_diag(int q, Complex d0, Complex d1);
  void apply_ry(int q, double angle);
  void apply_cnot(int control, int target);
  void apply_cz(int control, int target);
  void apply_pauli(uint64_t x_mask, uint64_t z_mask);

  /// Samples qubit q, collapses, renormalizes, and resets the qubit to |0>
  /// (measure-and-reset, so ancillas can be reused); returns the outcome.
  int measure(int q, SplitMix64& rng);

  /// Projects qubit q onto |value>, renormalizes; returns the probability.
  /// Throws if the probability is below 1e-14.
  double post_select(int q, int value);

  /// Probability that qubit q reads `value` (no collapse).
  double probability_of(int q, int value) const;

  /// Marginal outcome distribution over a contiguous qubit range.
  std::vector<double> marginal_probabilities(int first_qubit, int count) const;

 private:
  int n_qubits_ = 0;
  std::vector<Complex> amps_;
};

/// Applies a circuit in place. Measurements require an RNG; outcomes are
/// written to `bits` (resized to the circuit's classical bit count). With a
/// noise model, each executed two-qubit gate is followed, with probability p,
/// by a uniformly random non-identity two-qubit Pauli on its pair.
void apply_circuit(StateVector& state, const QuantumCircuit& c,
                   SplitMix64* rng = nullptr,
                   const NoiseModel* noise = nullptr,
                   std::vector<int>* bits = nullptr);

/// Shot execution from a fixed initial state.
RunResult run(const QuantumCircuit& c, const StateVector& initial, long shots,
              const NoiseModel& noise, uint64_t seed);

double expectation(const Eigen::MatrixXcd& h, const StateVector& state);
double expectation(const PauliSum& h, const StateVector& state);

}  // namespace qlat
