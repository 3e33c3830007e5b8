#pragma once

#include <limits>
#include <string>
#include <vector>

#include "qlat/lattice.hpp"
#include "qlat/synthesis.hpp"

namespace qlat {

enum class FilterMode { exact, trotter };

/// Plan for the measurement-based energy filter: apply
/// exp[-i (H - e0) t (x) Y_a] and post-select the ancilla on |0>, leaving
/// the normalized state proportional to cos[(H - e0) t] |psi>.
struct FilterPlan {
  Eigen::VectorXcd initial_state;  // dimension 2^n_q, normalized
  double t = 0.0;                  // MeV^-1; <= 0 selects pi / (2 * gap)
  double e0 = 0.0;                 // MeV; reference energy subtracted from H
  TrotterConfig trotter;           // used only in trotter mode
};

struct FilterOutcome {
  Eigen::VectorXcd state;     // post-selected, normalized, system register
  double probability = 0.0;   // ancilla-|0> success probability
  double energy = 0.0;        // <state|H|state>, MeV
};

/// One Trotterized factor group of exp[-i (H - e0) dt (x) Y_a] following the
/// configured operator ordering and potential variant. For the MCU variants
/// the theta/4 compensation is folded into the kinetic factor's ancilla
/// rotation, so the potential factor carries exactly three rotations.
QuantumCircuit filter_step_circuit(const LatticeConfig& cfg,
                                   const TrotterConfig& tc, double e0,
                                   double dt);

/// Full r-step filter evolution circuit, registers {n_q, 1 + and-ancillas, 0}.
QuantumCircuit filter_evolution_circuit(const LatticeConfig& cfg,
                                        const TrotterConfig& tc, double e0,
                                        double t);

FilterOutcome energy_filter(const LatticeConfig& cfg, const FilterPlan& plan,
                            FilterMode mode, uint64_t seed = 1);

struct ScanRow {
  int order = 1;
  OperatorOrder ordering = OperatorOrder::V_then_T;
  int steps = 1;
  double energy = 0.0;
  double probability = 0.0;
};

/// Filter energies versus Trotter step count for each requested
/// (order, ordering) pair; the data behind the convergence figure.
std::vector<ScanRow> filter_convergence_scan(
    const LatticeConfig& cfg,
    const std::vector<std::pair<int, OperatorOrder>>& orderings,
    const std::vector<int>& steps_list, double t = 0.0,
    PotentialVariant variant = PotentialVariant::gray_code);

std::string scan_to_csv(const std::vector<ScanRow>& rows);

/// Measurement-based initialization plan (amplitudes indexed by bitstring).
struct InitPlan {
  Eigen::VectorXcd target;  // g_j, normalized
  Eigen::VectorXd base;     // b_j > 0, normalized (ignored if ry angle set)
  double base_ry_angle = std::numeric_limits<double>::quiet_NaN();
  double gamma = 0.0;       // <= 0 selects gamma_max
  double truncation_epsilon = 0.0;  // drop |coeff| < eps Pauli terms of D
};

struct InitAngles {
  Eigen::VectorXd d;          // arccos(gamma |g_j| / b_j)
  double gamma = 0.0;
  double probability = 0.0;   // gamma^2
};

InitAngles compute_init_angles(const InitPlan& plan);

Eigen::VectorXd uniform_base(int dim);

/// Product state (RY(angle) on every qubit): b_x = cos(a/2)^{n-w} sin(a/2)^w.
Eigen::VectorXd ry_product_base(int nq, double angle);

/// Best uniform RY angle for the target (maximizes gamma_max^2); returns the
/// angle, and the success probability through best_p.
double optimize_ry_angle(const Eigen::VectorXcd& target, int nq,
                         double* best_p = nullptr);

/// Alternative qubit mapping: basis states sorted by |k|^2 are assigned to
/// bitstrings sorted by (Hamming weight, value), so low-|k| shells sit on
/// low-weight strings and |k=0> maps to the all-zero string.
struct EnergySortedMapping {
  std::vector<int> bitstring_of_basis;  // basis index -> bitstring
  std::vector<int> basis_of_bitstring;  // bitstring -> basis index

  Eigen::VectorXcd to_bitstring_order(const Eigen::VectorXcd& v) const;
  Eigen::VectorXd to_bitstring_order(const Eigen::VectorXd& v) const;
};

EnergySortedMapping energy_sorted_mapping(const LatticeConfig& cfg);

struct InitCircuitInfo {
  int retained_terms = 0;
  int dropped_terms = 0;
  double gamma = 0.0;
  double probability = 0.0;
};

/// Base-state preparation followed by exp[-i D (x) Y_a] with D = diag(d_j)
/// (exact, no Trotterization needed for a diagonal generator) and, when the
/// target has non-real phases, a diagonal phase circuit. The caller
/// post-selects the ancilla (qubit n_q) on |0>.
QuantumCircuit state_init_circuit(const InitPlan& plan,
                                  InitCircuitInfo* info = nullptr);

/// Convenience: run the initializer on |0...0>, post-select, and report the
/// produced state with its success probability.
FilterOutcome run_state_init(const InitPlan& plan,
                             const Eigen::MatrixXd& hamiltonian_bitstring_order,
                             InitCircuitInfo* info = nullptr);

}  // namespace qlat
