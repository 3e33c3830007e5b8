#include "qlat/state_prep.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qlat/pauli.hpp"
#include "qlat/simulator.hpp"

namespace qlat {

namespace {

/// exp(-i D dt (x) Z_a) with the ancilla as parity accumulator. Full mask
/// families follow the global Gray sequence (one CNOT per rotation); pruned
/// families use per-term ladders with peephole cancellation.
void append_diagonal_times_za(QuantumCircuit& c, const PauliSum& diag_terms,
                              double dt, int ancilla) {
  std::vector<PauliTerm> terms = diag_terms.terms();
  const int nq = diag_terms.n_qubits();
  const uint64_t full = uint64_t(1) << nq;
  if (terms.size() == full) {
    uint64_t prev = 0;
    for (uint64_t j = 0; j < full; ++j) {
      uint64_t mask = j ^ (j >> 1);
      uint64_t changed = mask ^ prev;
      if (changed) c.cnot(std::countr_zero(changed), ancilla);
      c.rz(2.0 * diag_terms.coefficient_of(0, mask).real() * dt, ancilla);
      prev = mask;
    }
    for (int b = 0; b < nq; ++b)
      if (prev & (uint64_t(1) << b)) c.cnot(b, ancilla);
    return;
  }
  std::sort(terms.begin(), terms.end(),
            [](const PauliTerm& a, const PauliTerm& b) {
              return gray_rank(a.z_mask) < gray_rank(b.z_mask);
            });
  for (const auto& t : terms) {
    for (int b = 0; b < nq; ++b)
      if (t.z_mask & (uint64_t(1) << b)) c.cnot(b, ancilla);
    c.rz(2.0 * t.coefficient.real() * dt, ancilla);
    for (int b = 0; b < nq; ++b)
      if (t.z_mask & (uint64_t(1) << b)) c.cnot(b, ancilla);
  }
}

/// Post-selects every auxiliary qubit onto its (pure) value and returns the
/// system-register slice of the state.
Eigen::VectorXcd collapse_to_system(StateVector& sv, int n_sys,
                                    double* ancilla_probability) {
  *ancilla_probability = sv.post_select(n_sys, 0);
  for (int q = n_sys + 1; q < sv.n_qubits(); ++q) {
    // AND ancillas end in a definite computational state (uncomputed to |0>
    // or collapsed by feedforward measurement); project without loss.
    int value = sv.probability_of(q, 1) > 0.5 ? 1 : 0;
    sv.post_select(q, value);
  }
  Eigen::VectorXcd out(int64_t(1) << n_sys);
  // Locate the single populated slice over the remaining aux qubits.
  const uint64_t dim_sys = uint64_t(1) << n_sys;
  for (uint64_t j = 0; j < dim_sys; ++j) out(static_cast<int64_t>(j)) = 0.0;
  for (uint64_t i = 0; i < sv.dim(); ++i) {
    if (std::abs(sv[i]) > 0.0) out(static_cast<int64_t>(i % dim_sys)) = sv[i];
  }
  return out;
}

double default_filter_time(const LatticeConfig& cfg) {
  TwoBodyBasis basis(cfg);
  SpectralData spectrum = diagonalize(build_hamiltonian(basis));
  return std::numbers::pi / (2.0 * spectrum.gap());
}

}  // namespace

QuantumCircuit filter_step_circuit(const LatticeConfig& cfg,
                                   const TrotterConfig& tc, double e0,
                                   double dt) {
  tc.validate();
  const bool mcu = tc.potential_variant != PotentialVariant::gray_code;
  // The MCU potential factor's +V0/4 ancilla constant is merged into the
  // kinetic factor; the total extra time matches because the kinetic and
  // potential factors cover the same dt within every step.
  const double extra_kin = mcu ? cfg.v0 / 4.0 : 0.0;
  const double extra_pot = mcu ? -cfg.v0 / 4.0 : 0.0;
  auto kin = [&](double d) {
    return axis_coupled_evolution(cfg, AxisOp::kinetic_minus_e0, e0, d,
                                  tc.potential_variant, extra_kin);
  };
  auto pot = [&](double d) {
    return axis_coupled_evolution(cfg, AxisOp::potential, 0.0, d,
                                  tc.potential_variant, extra_pot);
  };
  switch (tc.operator_order) {
    case OperatorOrder::V_then_T: return pot(dt).compose(kin(dt));
    case OperatorOrder::T_then_V: return kin(dt).compose(pot(dt));
    case OperatorOrder::T_V_T:
      return kin(dt / 2).compose(pot(dt)).compose(kin(dt / 2));
    default:
      return pot(dt / 2).compose(kin(dt)).compose(pot(dt / 2));
  }
}

QuantumCircuit filter_evolution_circuit(const LatticeConfig& cfg,
                                        const TrotterConfig& tc, double e0,
                                        double t) {
  tc.validate();
  const bool gray = tc.potential_variant == PotentialVariant::gray_code;
  Registers regs{cfg.n_qubits(), 1 + (gray ? 0 : cfg.n_qubits() - 2), 0};
  QuantumCircuit out(regs);
  if (tc.steps == 0 || t == 0.0) return out;
  const double dt = t / tc.steps;
  for (int r = 0; r < tc.steps; ++r)
    out = out.compose(filter_step_circuit(cfg, tc, e0, dt));
  return out;
}

FilterOutcome energy_filter(const LatticeConfig& cfg, const FilterPlan& plan,
                            FilterMode mode, uint64_t seed) {
  TwoBodyBasis basis(cfg);
  Eigen::MatrixXd h = build_hamiltonian(basis);
  const double t = plan.t > 0.0 ? plan.t : default_filter_time(cfg);
  if (mode == FilterMode::exact) {
    SpectralData spectrum = diagonalize(h);
    FilterResult r =
        exact_filtered_state(h, spectrum, plan.e0, t, plan.initial_state);
    return {r.state, r.probability, r.energy};
  }
  QuantumCircuit c = filter_evolution_circuit(cfg, plan.trotter, plan.e0, t);
  StateVector sv = StateVector::embed(plan.initial_state, 0,
                                      c.registers().total());
  SplitMix64 rng(seed);
  apply_circuit(sv, c, &rng);
  FilterOutcome out;
  Eigen::VectorXcd sys = collapse_to_system(sv, cfg.n_qubits(),
                                            &out.probability);
  sys.normalize();
  out.state = sys;
  out.energy = (sys.adjoint() * h.cast<Complex>() * sys)(0).real();
  return out;
}

std::vector<ScanRow> filter_convergence_scan(
    const LatticeConfig& cfg,
    const std::vector<std::pair<int, OperatorOrder>>& orderings,
    const std::vector<int>& steps_list, double t, PotentialVariant variant) {
  TwoBodyBasis basis(cfg);
  SpectralData spectrum = diagonalize(build_hamiltonian(basis));
  FilterPlan plan;
  plan.initial_state = zero_momentum_state(basis.size());
  plan.e0 = spectrum.ground_energy();
  plan.t = t > 0.0 ? t : std::numbers::pi / (2.0 * spectrum.gap());
  std::vector<ScanRow> rows;
  for (auto [order, ordering] : orderings) {
    for (int r : steps_list) {
      plan.trotter.order = order;
      plan.trotter.operator_order = ordering;
      plan.trotter.potential_variant = variant;
      plan.trotter.steps = r;
      plan.trotter.total_time = plan.t;
      FilterOutcome out = energy_filter(cfg, plan, FilterMode::trotter);
      rows.push_back({order, ordering, r, out.energy, out.probability});
    }
  }
  return rows;
}

std::string scan_to_csv(const std::vector<ScanRow>& rows) {
  std::ostringstream out;
  out << "order,ordering,steps,energy_mev,success_probability\n";
  out.precision(6);
  for (const auto& r : rows)
    out << r.order << ',' << to_string(r.ordering) << ',' << r.steps << ','
        << r.energy << ',' << r.probability << '\n';
  return out.str();
}

InitAngles compute_init_angles(const InitPlan& plan) {
  Eigen::VectorXd base = std::isnan(plan.base_ry_angle)
                             ? plan.base
                             : ry_product_base(
                                   std::countr_zero(static_cast<uint64_t>(
                                       plan.target.size())),
                                   plan.base_ry_angle);
  if (base.size() != plan.target.size())
    throw std::invalid_argument("base/target dimension mismatch");
  double gamma_max = std::numeric_limits<double>::infinity();
  for (int64_t j = 0; j < base.size(); ++j) {
    if (base(j) <= 0.0)
      throw std::invalid_argument("base amplitudes must be positive");
    const double g = std::abs(plan.target(j));
    if (g > 0.0) gamma_max = std::min(gamma_max, base(j) / g);
  }
  InitAngles out;
  out.gamma = plan.gamma > 0.0 ? plan.gamma : gamma_max;
  if (out.gamma > gamma_max * (1.0 + 1e-12))
    throw std::invalid_argument("gamma exceeds gamma_max");
  out.probability = out.gamma * out.gamma;
  out.d.resize(base.size());
  for (int64_t j = 0; j < base.size(); ++j) {
    double ratio = out.gamma * std::abs(plan.target(j)) / base(j);
    out.d(j) = std::acos(std::clamp(ratio, 0.0, 1.0));
  }
  return out;
}

Eigen::VectorXd uniform_base(int dim) {
  return Eigen::VectorXd::Constant(dim, 1.0 / std::sqrt(double(dim)));
}

Eigen::VectorXd ry_product_base(int nq, double angle) {
  const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  Eigen::VectorXd b(int64_t(1) << nq);
  for (int64_t x = 0; x < b.size(); ++x) {
    int w = std::popcount(static_cast<uint64_t>(x));
    b(x) = std::pow(c, nq - w) * std::pow(s, w);
  }
  return b;
}

double optimize_ry_angle(const Eigen::VectorXcd& target, int nq,
                         double* best_p) {
  auto probability = [&](double angle) {
    Eigen::VectorXd b = ry_product_base(nq, angle);
    double gamma_max = std::numeric_limits<double>::infinity();
    for (int64_t j = 0; j < b.size(); ++j) {
      double g = std::abs(target(j));
      if (g > 0.0) gamma_max = std::min(gamma_max, b(j) / g);
    }
    return gamma_max * gamma_max;
  };
  // Coarse grid then golden-section refinement on the best bracket.
  double best_angle = 0.0, best = -1.0;
  const int grid = 400;
  for (int i = 1; i < grid; ++i) {
    double a = std::numbers::pi * i / grid;
    double p = probability(a);
    if (p > best) {
      best = p;
      best_angle = a;
    }
  }
  double lo = best_angle - std::numbers::pi / grid;
  double hi = best_angle + std::numbers::pi / grid;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 60; ++it) {
    double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
    if (probability(m1) < probability(m2))
      lo = m1;
    else
      hi = m2;
  }
  best_angle = (lo + hi) / 2.0;
  if (best_p) *best_p = probability(best_angle);
  return best_angle;
}

EnergySortedMapping energy_sorted_mapping(const LatticeConfig& cfg) {
  TwoBodyBasis basis(cfg);
  const int n = basis.size();
  std::vector<int> by_energy(n);
  for (int i = 0; i < n; ++i) by_energy[i] = i;
  std::stable_sort(by_energy.begin(), by_energy.end(), [&](int a, int b) {
    return basis.momentum(a).squared() < basis.momentum(b).squared();
  });
  std::vector<int> strings(n);
  for (int i = 0; i < n; ++i) strings[i] = i;
  std::stable_sort(strings.begin(), strings.end(), [](int a, int b) {
    int wa = std::popcount(static_cast<unsigned>(a));
    int wb = std::popcount(static_cast<unsigned>(b));
    return wa != wb ? wa < wb : a < b;
  });
  EnergySortedMapping m;
  m.bitstring_of_basis.resize(n);
  m.basis_of_bitstring.resize(n);
  for (int rank = 0; rank < n; ++rank) {
    m.bitstring_of_basis[by_energy[rank]] = strings[rank];
    m.basis_of_bitstring[strings[rank]] = by_energy[rank];
  }
  return m;
}

Eigen::VectorXcd EnergySortedMapping::to_bitstring_order(
    const Eigen::VectorXcd& v) const {
  Eigen::VectorXcd out(v.size());
  for (int64_t i = 0; i < v.size(); ++i)
    out(bitstring_of_basis[static_cast<std::size_t>(i)]) = v(i);
  return out;
}

Eigen::VectorXd EnergySortedMapping::to_bitstring_order(
    const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(v.size());
  for (int64_t i = 0; i < v.size(); ++i)
    out(bitstring_of_basis[static_cast<std::size_t>(i)]) = v(i);
  return out;
}

QuantumCircuit state_init_circuit(const InitPlan& plan, InitCircuitInfo* info) {
  const int nq = std::countr_zero(static_cast<uint64_t>(plan.target.size()));
  InitAngles angles = compute_init_angles(plan);
  Registers regs{nq, 1, 0};
  QuantumCircuit c(regs);
  if (std::isnan(plan.base_ry_angle)) {
    // Uniform base -> plain Hadamards; other explicit bases are out of scope.
    Eigen::VectorXd u = uniform_base(static_cast<int>(plan.target.size()));
    if ((plan.base - u).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument(
          "explicit bases other than uniform are unsupported; "
          "use base_ry_angle");
    for (int q = 0; q < nq; ++q) c.h(q);
  } else {
    for (int q = 0; q < nq; ++q) c.ry(plan.base_ry_angle, q);
  }
  PauliSum d_terms = map_diagonal(angles.d, 1e-14);
  int total = static_cast<int>(d_terms.terms().size());
  if (plan.truncation_epsilon > 0.0) {
    PauliSum pruned(nq);
    for (const auto& t : d_terms.terms())
      if (std::abs(t.coefficient) >= plan.truncation_epsilon) pruned.add(t);
    d_terms = pruned;
  }
  if (info) {
    info->retained_terms = static_cast<int>(d_terms.terms().size());
    info->dropped_terms = total - info->retained_terms;
    info->gamma = angles.gamma;
    info->probability = angles.probability;
  }
  const int ancilla = nq;
  c.sdg(ancilla);
  c.h(ancilla);
  append_diagonal_times_za(c, d_terms, 1.0, ancilla);
  c.h(ancilla);
  c.s(ancilla);
  // Non-real targets get their phases restored after the post-selection.
  double max_phase = 0.0;
  Eigen::VectorXd theta(plan.target.size());
  for (int64_t j = 0; j < plan.target.size(); ++j) {
    theta(j) = std::abs(plan.target(j)) > 0.0 ? std::arg(plan.target(j)) : 0.0;
    max_phase = std::max(max_phase, std::abs(theta(j)));
  }
  if (max_phase > 1e-12) {
    PhaseLedger ledger;
    QuantumCircuit phase =
        gray_code_diagonal_evolution(map_diagonal(theta, 1e-14), -1.0, ledger,
                                     regs);
    phase.add_global_phase(ledger.phase);
    c = c.compose(phase);
  }
  return peephole_optimize(c);
}

FilterOutcome run_state_init(const InitPlan& plan,
                             const Eigen::MatrixXd& hamiltonian_bitstring_order,
                             InitCircuitInfo* info) {
  QuantumCircuit c = state_init_circuit(plan, info);
  const int nq = c.registers().system;
  StateVector sv(c.registers().total());
  apply_circuit(sv, c);
  FilterOutcome out;
  Eigen::VectorXcd sys = collapse_to_system(sv, nq, &out.probability);
  sys.normalize();
  // The simulated state carries the circuit's global phase; align on the
  // largest component so downstream overlap checks are phase-free.
  out.state = sys;
  out.energy = (sys.adjoint() *
                hamiltonian_bitstring_order.cast<Complex>() * sys)(0)
                   .real();
  return out;
}

}  // namespace qlat
