#include "qlat/synthesis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>

namespace qlat {

namespace {

std::vector<int> mask_bits(uint64_t mask) {
  std::vector<int> bits;
  for (int b = 0; mask; ++b, mask >>= 1)
    if (mask & 1) bits.push_back(b);
  return bits;
}

/// Full diagonal family over `bits`: every nonzero local mask present.
/// Emits 2^m - 2 CNOTs and 2^m - 1 RZ by running, per top bit k, a Gray
/// sequence over the lower bits with qubit `bits[k]` as parity accumulator.
void append_full_family(QuantumCircuit& c,
                        const std::map<uint64_t, double>& local_coeff,
                        const std::vector<int>& bits, double dt) {
  const int m = static_cast<int>(bits.size());
  for (int k = 0; k < m; ++k) {
    const uint64_t top = uint64_t(1) << k;
    c.rz(2.0 * local_coeff.at(top) * dt, bits[k]);
    for (uint64_t j = 1; j < top; ++j) {
      c.cnot(bits[std::countr_zero(j)], bits[k]);
      uint64_t g = j ^ (j >> 1);
      c.rz(2.0 * local_coeff.at(top | g) * dt, bits[k]);
    }
    if (k >= 1) c.cnot(bits[k - 1], bits[k]);
  }
}

/// Generic diagonal synthesis: per-term CNOT ladder into the lowest bit,
/// ordered by Gray rank so that peephole cancellation removes shared ladder
/// segments between neighbours.
void append_generic_diagonal(QuantumCircuit& c,
                             std::vector<PauliTerm> terms, double dt) {
  std::sort(terms.begin(), terms.end(),
            [](const PauliTerm& a, const PauliTerm& b) {
              return gray_rank(a.z_mask) < gray_rank(b.z_mask);
            });
  for (const auto& t : terms) {
    auto bits = mask_bits(t.z_mask);
    const int target = bits.front();
    for (std::size_t i = bits.size(); i-- > 1;) c.cnot(bits[i], target);
    c.rz(2.0 * t.coefficient.real() * dt, target);
    for (std::size_t i = 1; i < bits.size(); ++i) c.cnot(bits[i], target);
  }
}

/// exp(-i sum_i c_i Z_{m_i} (x) Z_a dt) with the ancilla as accumulator;
/// `ordered` must have single-bit transitions between consecutive masks
/// (the empty system mask is allowed anywhere an adjacent step permits).
void append_family_times_za(QuantumCircuit& c,
                            const std::vector<std::pair<uint64_t, double>>& ordered,
                            int ancilla, double dt) {
  if (ordered.empty()) return;
  for (int b : mask_bits(ordered.front().first)) c.cnot(b, ancilla);
  c.rz(2.0 * ordered.front().second * dt, ancilla);
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    uint64_t changed = ordered[i].first ^ ordered[i - 1].first;
    if (std::popcount(changed) != 1)
      throw std::logic_error("ancilla accumulator needs single-bit steps");
    c.cnot(std::countr_zero(changed), ancilla);
    c.rz(2.0 * ordered[i].second * dt, ancilla);
  }
  for (int b : mask_bits(ordered.back().first)) c.cnot(b, ancilla);
}

/// A coset family is {and_mask | s : s subset of varying bits} with a
/// nonempty common intersection; it admits a pivot-accumulator chain with
/// one CNOT per Gray transition.
bool is_coset_family(const std::vector<PauliTerm>& terms, uint64_t& and_mask,
                     uint64_t& varying) {
  and_mask = ~uint64_t(0);
  uint64_t or_mask = 0;
  for (const auto& t : terms) {
    and_mask &= t.z_mask;
    or_mask |= t.z_mask;
  }
  if (and_mask == 0) return false;
  varying = or_mask & ~and_mask;
  // Masks are distinct and each is and_mask | (subset of varying), so a
  // count of 2^|varying| means every subset appears exactly once.
  return terms.size() == (std::size_t(1) << std::popcount(varying));
}

void append_coset_family(QuantumCircuit& c,
                         const std::vector<PauliTerm>& terms,
                         uint64_t and_mask, uint64_t varying, double dt) {
  const int pivot = std::countr_zero(and_mask);
  std::map<uint64_t, double> coef;
  for (const auto& t : terms) coef[t.z_mask] = t.coefficient.real();
  auto ladder = [&](uint64_t mask) {
    for (int b : mask_bits(mask))
      if (b != pivot) c.cnot(b, pivot);
  };
  const auto vbits = mask_bits(varying);
  const uint64_t count = uint64_t(1) << vbits.size();
  auto subset = [&](uint64_t g) {
    uint64_t s = 0;
    for (std::size_t k = 0; k < vbits.size(); ++k)
      if (g & (uint64_t(1) << k)) s |= uint64_t(1) << vbits[k];
    return s;
  };
  ladder(and_mask);
  for (uint64_t j = 0; j < count; ++j) {
    const uint64_t g = j ^ (j >> 1);
    if (j) c.cnot(vbits[static_cast<std::size_t>(std::countr_zero(j))], pivot);
    c.rz(2.0 * coef.at(and_mask | subset(g)) * dt, pivot);
  }
  ladder(subset((count - 1) ^ ((count - 1) >> 1)));
  ladder(and_mask);
}

bool is_full_family(const std::vector<PauliTerm>& terms, uint64_t union_bits) {
  const uint64_t want = (uint64_t(1) << std::popcount(union_bits)) - 1;
  if (terms.size() != want) return false;
  // All masks distinct (PauliSum invariant) and within union_bits, so the
  // count matching 2^m - 1 means the set is exactly the nonzero masks.
  return true;
}

void append_diagonal(QuantumCircuit& c, const std::vector<PauliTerm>& terms,
                     double dt) {
  if (terms.empty()) return;
  uint64_t union_bits = 0;
  for (const auto& t : terms) union_bits |= t.z_mask;
  if (is_full_family(terms, union_bits)) {
    auto bits = mask_bits(union_bits);
    std::map<uint64_t, double> local;
    for (const auto& t : terms) {
      uint64_t lm = 0;
      for (std::size_t i = 0; i < bits.size(); ++i)
        if (t.z_mask & (uint64_t(1) << bits[i])) lm |= uint64_t(1) << i;
      local[lm] = t.coefficient.real();
    }
    append_full_family(c, local, bits, dt);
    return;
  }
  uint64_t and_mask = 0, varying = 0;
  if (is_coset_family(terms, and_mask, varying)) {
    append_coset_family(c, terms, and_mask, varying, dt);
    return;
  }
  append_generic_diagonal(c, terms, dt);
}

void append_and_compute(QuantumCircuit& c, int a, int b, int t, bool with_s) {
  c.h(t);
  c.tdg(t);
  c.cnot(a, t);
  c.t(t);
  c.cnot(b, t);
  c.tdg(t);
  c.cnot(a, t);
  c.t(t);
  c.h(t);
  if (with_s) c.s(t);
}

void append_and_uncompute_unitary(QuantumCircuit& c, int a, int b, int t,
                                  bool with_sdg) {
  if (with_sdg) c.sdg(t);
  // The relative-phase Toffoli is self-inverse; compute/uncompute branch
  // phases cancel pairwise.
  c.h(t);
  c.tdg(t);
  c.cnot(a, t);
  c.t(t);
  c.cnot(b, t);
  c.tdg(t);
  c.cnot(a, t);
  c.t(t);
  c.h(t);
}

void append_and_uncompute_measured(QuantumCircuit& c, int a, int b, int t,
                                   int bit) {
  c.h(t);
  c.measure(t, bit);
  c.cc_cz(bit, a, b);
}

void append_cu(QuantumCircuit& c, double theta, int control, int target) {
  c.cnot(control, target);
  c.rz(-theta / 2, target);
  c.cnot(control, target);
  c.rz(theta / 2, target);
  c.rz(-theta / 2, control);
}

/// Phase e^{-i theta} on |1...1> of `controls` (x) |0> of `target`, via an
/// AND ladder on aux qubits starting at aux_start. Posts -theta/4 per cU to
/// the ledger.
void append_mcu_zero_phase(QuantumCircuit& c, const std::vector<int>& controls,
                           int target, double theta, PotentialVariant variant,
                           int aux_start, int* next_bit, PhaseLedger& ledger) {
  if (controls.empty()) {
    // diag(e^{-i theta}, 1) on target alone.
    c.rz(theta, target);
    ledger.phase += -theta / 2;
    return;
  }
  if (controls.size() == 1) {
    append_cu(c, theta, controls[0], target);
    ledger.phase += -theta / 4;
    return;
  }
  const bool feedforward = variant == PotentialVariant::mcu_feedforward;
  const int n_and = static_cast<int>(controls.size()) - 1;
  std::vector<std::array<int, 3>> ands;  // {a, b, t}
  int prev = controls[0];
  for (int i = 0; i < n_and; ++i) {
    int anc = aux_start + i;
    append_and_compute(c, prev, controls[static_cast<std::size_t>(i) + 1], anc,
                       feedforward);
    ands.push_back({prev, controls[static_cast<std::size_t>(i) + 1], anc});
    prev = anc;
  }
  append_cu(c, theta, prev, target);
  ledger.phase += -theta / 4;
  for (auto it = ands.rbegin(); it != ands.rend(); ++it) {
    if (feedforward)
      append_and_uncompute_measured(c, (*it)[0], (*it)[1], (*it)[2],
                                    (*next_bit)++);
    else
      append_and_uncompute_unitary(c, (*it)[0], (*it)[1], (*it)[2], false);
  }
}

PauliSum axis_kinetic_terms(const LatticeConfig& cfg, int axis_sites,
                            int offset) {
  Eigen::VectorXd d = TwoBodyBasis::axis_kinetic_diagonal(
      axis_sites, cfg.spacing_a, cfg.hbar_c, cfg.mass);
  PauliSum local = map_diagonal(d, 1e-9);
  PauliSum shifted(cfg.n_qubits());
  for (const auto& t : local.terms())
    shifted.add(0, t.z_mask << offset, t.coefficient);
  return shifted;
}

struct AxisBlock {
  int offset;
  int n_bits;
  std::vector<PauliTerm> terms;  // non-identity, global masks
  double identity = 0.0;
};

std::vector<AxisBlock> kinetic_blocks(const LatticeConfig& cfg) {
  std::vector<AxisBlock> blocks;
  int offset = 0;
  for (int axis_sites : {cfg.n_z, cfg.n_y, cfg.n_x}) {
    AxisBlock blk;
    blk.offset = offset;
    blk.n_bits = std::countr_zero(static_cast<unsigned>(axis_sites));
    PauliSum terms = axis_kinetic_terms(cfg, axis_sites, offset);
    for (const auto& t : terms.terms()) {
      if (t.z_mask == 0)
        blk.identity = t.coefficient.real();
      else
        blk.terms.push_back(t);
    }
    offset += blk.n_bits;
    blocks.push_back(std::move(blk));
  }
  return blocks;
}

/// Eq.-7-style template for an 8-site axis: 6 CNOTs, 6 RZ.
void append_kinetic_block_3(QuantumCircuit& c, const AxisBlock& blk,
                            double dt) {
  auto coeff = [&](uint64_t local) {
    for (const auto& t : blk.terms)
      if (t.z_mask == (local << blk.offset)) return t.coefficient.real();
    throw std::runtime_error("kinetic template: missing expected mask");
  };
  for (const auto& t : blk.terms)
    if (t.z_mask == (uint64_t(0b111) << blk.offset))
      throw std::runtime_error("kinetic template: unexpected 3-bit mask");
  const int q0 = blk.offset, q1 = blk.offset + 1, q2 = blk.offset + 2;
  c.cnot(q2, q0);
  c.rz(2.0 * coeff(0b101) * dt, q0);
  c.rz(2.0 * coeff(0b100) * dt, q2);
  c.cnot(q2, q0);
  c.cnot(q1, q0);
  c.rz(2.0 * coeff(0b011) * dt, q0);
  c.rz(2.0 * coeff(0b010) * dt, q1);
  c.cnot(q1, q0);
  c.cnot(q1, q2);
  c.rz(2.0 * coeff(0b001) * dt, q0);
  c.rz(2.0 * coeff(0b110) * dt, q2);
  c.cnot(q1, q2);
}

}  // namespace

PotentialVariant potential_variant_from(const std::string& name) {
  if (name == "gray_code" || name == "gray") return PotentialVariant::gray_code;
  if (name == "mcu_ladder") return PotentialVariant::mcu_ladder;
  if (name == "mcu_feedforward") return PotentialVariant::mcu_feedforward;
  throw std::invalid_argument("unknown potential variant: " + name);
}

OperatorOrder operator_order_from(const std::string& name) {
  if (name == "V_then_T" || name == "V+T") return OperatorOrder::V_then_T;
  if (name == "T_then_V" || name == "T+V") return OperatorOrder::T_then_V;
  if (name == "T_V_T" || name == "T+V+T") return OperatorOrder::T_V_T;
  if (name == "V_T_V" || name == "V+T+V") return OperatorOrder::V_T_V;
  throw std::invalid_argument("unknown operator order: " + name);
}

std::string to_string(PotentialVariant v) {
  switch (v) {
    case PotentialVariant::gray_code: return "gray_code";
    case PotentialVariant::mcu_ladder: return "mcu_ladder";
    default: return "mcu_feedforward";
  }
}

std::string to_string(OperatorOrder o) {
  switch (o) {
    case OperatorOrder::V_then_T: return "V_then_T";
    case OperatorOrder::T_then_V: return "T_then_V";
    case OperatorOrder::T_V_T: return "T_V_T";
    default: return "V_T_V";
  }
}

void TrotterConfig::validate() const {
  if (order != 1 && order != 2)
    throw std::invalid_argument("trotter order must be 1 or 2");
  if (steps < 0) throw std::invalid_argument("steps must be nonnegative");
  const bool second_order_ordering =
      operator_order == OperatorOrder::T_V_T ||
      operator_order == OperatorOrder::V_T_V;
  if (order == 2 && !second_order_ordering)
    throw std::invalid_argument("order 2 requires T_V_T or V_T_V");
  if (order == 1 && second_order_ordering)
    throw std::invalid_argument("order 1 requires V_then_T or T_then_V");
}

QuantumCircuit kinetic_evolution(const LatticeConfig& cfg, double dt,
                                 PhaseLedger& ledger, Registers regs) {
  if (regs.total() == 0) regs = Registers{cfg.n_qubits(), 0, 0};
  QuantumCircuit c(regs);
  for (const auto& blk : kinetic_blocks(cfg)) {
    ledger.phase += -blk.identity * dt;
    if (blk.n_bits == 3)
      append_kinetic_block_3(c, blk, dt);
    else
      append_diagonal(c, blk.terms, dt);
  }
  return c;
}

QuantumCircuit gray_code_diagonal_evolution(const PauliSum& diag_terms,
                                            double dt, PhaseLedger& ledger,
                                            Registers regs) {
  if (!diag_terms.is_diagonal())
    throw std::invalid_argument("diagonal evolution: non-diagonal term");
  if (regs.total() == 0) regs = Registers{diag_terms.n_qubits(), 0, 0};
  QuantumCircuit c(regs);
  std::vector<PauliTerm> nontrivial;
  for (const auto& t : diag_terms.terms()) {
    if (t.z_mask == 0)
      ledger.phase += -t.coefficient.real() * dt;
    else
      nontrivial.push_back(t);
  }
  append_diagonal(c, nontrivial, dt);
  return peephole_optimize(c);
}

QuantumCircuit potential_evolution(int nq, double theta,
                                   PotentialVariant variant,
                                   PhaseLedger& ledger) {
  if (nq < 3 && variant != PotentialVariant::gray_code)
    throw std::invalid_argument("ancilla construction needs nq >= 3");
  if (variant == PotentialVariant::gray_code) {
    // V = theta/dt * |+...+><+...+|; conjugate by Hadamards and evolve the
    // uniform-coefficient full diagonal family.
    QuantumCircuit c(Registers{nq, 0, 0});
    for (int q = 0; q < nq; ++q) c.h(q);
    const double coeff = theta / double(uint64_t(1) << nq);
    ledger.phase += -coeff;  // identity term, dt folded into theta
    std::vector<PauliTerm> terms;
    for (uint64_t z = 1; z < (uint64_t(1) << nq); ++z)
      terms.push_back({0, z, Complex{coeff, 0.0}});
    append_diagonal(c, terms, 1.0);
    for (int q = 0; q < nq; ++q) c.h(q);
    return c;
  }
  const int n_bits = nq - 2;
  QuantumCircuit c(Registers{nq, nq - 2, 0},
                   variant == PotentialVariant::mcu_feedforward ? n_bits : 0);
  for (int q = 0; q < nq; ++q) c.h(q);
  std::vector<int> controls;
  for (int q = 1; q < nq; ++q) controls.push_back(q);
  for (int q : controls) c.x(q);
  int next_bit = 0;
  append_mcu_zero_phase(c, controls, 0, theta, variant, nq, &next_bit, ledger);
  ledger.kinetic_shift = true;
  for (int q : controls) c.x(q);
  for (int q = 0; q < nq; ++q) c.h(q);
  return c;
}

QuantumCircuit relative_phase_toffoli() {
  QuantumCircuit c(Registers{3, 0, 0});
  c.h(2);
  c.tdg(2);
  c.cnot(0, 2);
  c.t(2);
  c.cnot(1, 2);
  c.tdg(2);
  c.cnot(0, 2);
  c.t(2);
  c.h(2);
  return c;
}

QuantumCircuit controlled_phase_cU(double theta) {
  QuantumCircuit c(Registers{2, 0, 0});
  append_cu(c, theta, 0, 1);
  return c;
}

QuantumCircuit hamming_weight_phasing(int n, double theta, PhaseLedger& ledger,
                                      HwpReport* report) {
  if (n < 2) throw std::invalid_argument("hamming weight phasing needs n >= 2");
  QuantumCircuit c(Registers{n, n - 1, 0}, n - 1);
  int next_aux = n;

  struct Op {
    bool is_and;  // otherwise CNOT
    int a, b, t;
  };
  std::vector<Op> trace;
  auto cnot = [&](int a, int b) {
    c.cnot(a, b);
    trace.push_back({false, a, b, -1});
  };
  auto land = [&](int a, int b) {
    int t = next_aux++;
    append_and_compute(c, a, b, t, true);
    trace.push_back({true, a, b, t});
    return t;
  };

  std::vector<int> level;
  for (int q = 0; q < n; ++q) level.push_back(q);
  std::vector<int> weight_bits;
  while (!level.empty()) {
    std::vector<int> carries;
    while (level.size() >= 2) {
      if (level.size() == 2) {
        int a = level[0], b = level[1];
        carries.push_back(land(a, b));
        cnot(a, b);
        level = {b};
      } else if (level.size() == 3) {
        // Two half adders; the carries are exclusive, so one CNOT merges
        // them into a single next-level operand.
        int a = level[0], b = level[1], d = level[2];
        int t1 = land(a, b);
        cnot(a, b);
        int t2 = land(b, d);
        cnot(b, d);
        cnot(t1, t2);
        carries.push_back(t2);
        level = {d};
      } else {
        // Single-AND full adder: carry = maj(a,b,d) on a fresh ancilla,
        // sum replaces b, a holds a^d garbage until uncompute.
        int a = level[0], b = level[1], d = level[2];
        cnot(d, a);
        cnot(d, b);
        int t = land(a, b);
        cnot(d, t);
        cnot(a, b);
        cnot(d, b);
        carries.push_back(t);
        std::vector<int> rest = {b};
        rest.insert(rest.end(), level.begin() + 3, level.end());
        level = rest;
      }
    }
    weight_bits.push_back(level[0]);
    level = carries;
  }

  double angle_sum = 0.0;
  for (std::size_t k = 0; k < weight_bits.size(); ++k) {
    double lambda = theta * double(uint64_t(1) << k);
    c.rz(lambda, weight_bits[k]);
    angle_sum += lambda;
  }
  ledger.phase += angle_sum / 2.0 - n * theta / 2.0;

  int bit = 0;
  for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
    if (it->is_and) {
      append_and_uncompute_measured(c, it->a, it->b, it->t, bit++);
    } else {
      c.cnot(it->a, it->b);
    }
  }
  if (report) {
    report->rotations = static_cast<int>(weight_bits.size());
    report->ancillas = next_aux - n;
    report->t_gates = 4 * (next_aux - n);
  }
  return c;
}

QuantumCircuit trotter_step(const LatticeConfig& cfg, const TrotterConfig& tc,
                            double dt, PhaseLedger& ledger) {
  tc.validate();
  const int nq = cfg.n_qubits();
  const bool gray = tc.potential_variant == PotentialVariant::gray_code;
  Registers regs{nq, gray ? 0 : nq - 2, 0};
  auto kin = [&](double step_dt) {
    return kinetic_evolution(cfg, step_dt, ledger, regs);
  };
  auto pot = [&](double step_dt) {
    // potential_evolution's register shape matches `regs` for every variant.
    return potential_evolution(nq, cfg.v0 * step_dt, tc.potential_variant,
                               ledger);
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

QuantumCircuit full_evolution(const LatticeConfig& cfg, const TrotterConfig& tc,
                              PhaseLedger& ledger) {
  tc.validate();
  const int nq = cfg.n_qubits();
  const bool gray = tc.potential_variant == PotentialVariant::gray_code;
  Registers regs{nq, gray ? 0 : nq - 2, 0};
  QuantumCircuit out(regs);
  if (tc.steps == 0) return out;
  const double dt = tc.dt();
  if (tc.order == 1) {
    for (int r = 0; r < tc.steps; ++r)
      out = out.compose(trotter_step(cfg, tc, dt, ledger));
    return out;
  }
  // Order 2 with merged interior half-steps: A(dt/2) [B(dt) A(dt)]^{r-1}
  // B(dt) A(dt/2), where (A,B) = (T,V) for T_V_T and (V,T) for V_T_V.
  const bool tvt = tc.operator_order == OperatorOrder::T_V_T;
  auto a_half = [&](double step_dt) {
    if (tvt) return kinetic_evolution(cfg, step_dt, ledger, regs);
    return potential_evolution(nq, cfg.v0 * step_dt, tc.potential_variant,
                               ledger);
  };
  auto b_full = [&](double step_dt) {
    if (!tvt) return kinetic_evolution(cfg, step_dt, ledger, regs);
    return potential_evolution(nq, cfg.v0 * step_dt, tc.potential_variant,
                               ledger);
  };
  out = out.compose(a_half(dt / 2));
  for (int r = 0; r < tc.steps; ++r) {
    out = out.compose(b_full(dt));
    out = out.compose(r + 1 < tc.steps ? a_half(dt) : a_half(dt / 2));
  }
  return out;
}

QuantumCircuit axis_coupled_evolution(const LatticeConfig& cfg, AxisOp op,
                                      double param, double dt,
                                      PotentialVariant variant,
                                      double extra_const) {
  const int nq = cfg.n_qubits();
  const bool gray = variant == PotentialVariant::gray_code;
  Registers regs{nq, 1 + (gray ? 0 : nq - 2), 0};
  const int ancilla = nq;  // aux qubit 0
  QuantumCircuit c(regs, gray ? 0 : nq - 2);
  // Y_a = (S H) Z (S H)^dagger on the ancilla.
  c.sdg(ancilla);
  c.h(ancilla);
  if (op == AxisOp::kinetic_minus_e0) {
    double constant = -param + extra_const;
    for (const auto& blk : kinetic_blocks(cfg)) {
      constant += blk.identity;
      PauliSum block_sum(nq);
      for (const auto& t : blk.terms) block_sum.add(t);
      std::vector<std::pair<uint64_t, double>> ordered;
      for (const auto& t : gray_code_order(block_sum))
        ordered.emplace_back(t.z_mask, t.coefficient.real());
      append_family_times_za(c, ordered, ancilla, dt);
    }
    c.rz(2.0 * constant * dt, ancilla);
  } else if (gray) {
    const double theta = cfg.v0 * dt;
    const double coeff = theta / double(uint64_t(1) << nq);
    for (int q = 0; q < nq; ++q) c.h(q);
    std::vector<std::pair<uint64_t, double>> ordered;
    for (uint64_t j = 0; j < (uint64_t(1) << nq); ++j)
      ordered.emplace_back(j ^ (j >> 1), coeff / dt);
    if (extra_const != 0.0) ordered.front().second += extra_const;
    append_family_times_za(c, ordered, ancilla, dt);
    for (int q = 0; q < nq; ++q) c.h(q);
  } else {
    // MCU potential with the three theta rotations direction-controlled by
    // the ancilla. The branch phases e^{+-i theta/4} equal
    // exp(-i(-V0/4) Z_a dt), so +V0/4 on Z_a restores exp(-i V (x) Z_a dt).
    PhaseLedger scratch;
    QuantumCircuit pot = potential_evolution(nq, cfg.v0 * dt, variant, scratch);
    for (const auto& g : pot.gates()) {
      Gate shifted = g;
      if (shifted.q0 >= nq) shifted.q0 += 1;  // AND ancillas sit above the Y ancilla
      if (shifted.is_two_qubit() && shifted.q1 >= nq) shifted.q1 += 1;
      if (shifted.kind == GateKind::RZ) {
        c.cnot(ancilla, shifted.q0);
        c.append(shifted);
        c.cnot(ancilla, shifted.q0);
      } else {
        c.append(shifted);
      }
    }
    const double constant = cfg.v0 / 4.0 + extra_const;
    if (constant != 0.0) c.rz(2.0 * constant * dt, ancilla);
  }
  c.h(ancilla);
  c.s(ancilla);
  return c;
}

QuantumCircuit directional_control_wrap(const QuantumCircuit& step,
                                        PhaseLedger& ledger, int control) {
  if (step.has_measurement() &&
      step.registers().qpe > 0)  // nothing principled, just unsupported
    throw std::invalid_argument("unsupported step layout");
  Registers regs = step.registers();
  if (control >= regs.total()) regs.qpe += control + 1 - regs.total();
  QuantumCircuit out(regs, step.classical_bits());
  for (const auto& g : step.gates()) {
    if (g.kind == GateKind::RZ) {
      out.cnot(control, g.q0);
      out.append(g);
      out.cnot(control, g.q0);
    } else {
      out.append(g);
    }
  }
  // Constant terms: exp(i phi) on branch 0, exp(-i phi) on branch 1.
  out.rz(-2.0 * ledger.phase, control);
  ledger.phase = 0.0;
  return out;
}

QuantumCircuit many_body_potential_evolution(int a_particles, int sites,
                                             double theta,
                                             PhaseLedger& ledger) {
  if (a_particles < 2)
    throw std::invalid_argument("need at least two particles");
  const auto usites = static_cast<unsigned>(sites);
  if (sites < 2 || (usites & (usites - 1)) != 0)
    throw std::invalid_argument("sites must be a power of 2");
  const int m = std::countr_zero(usites);
  const int n_sys = a_particles * m;
  const int n_aux = std::max(0, m - 2);
  QuantumCircuit c(Registers{n_sys, n_aux, 0});
  int next_bit = 0;
  for (int i = 0; i < a_particles; ++i) {
    for (int j = i + 1; j < a_particles; ++j) {
      // XOR block i into block j; a coincident pair leaves block j at zero.
      for (int b = 0; b < m; ++b) c.cnot(i * m + b, j * m + b);
      std::vector<int> controls;
      for (int b = 1; b < m; ++b) controls.push_back(j * m + b);
      for (int q : controls) c.x(q);
      append_mcu_zero_phase(c, controls, j * m, theta,
                            PotentialVariant::mcu_ladder, n_sys, &next_bit,
                            ledger);
      for (int q : controls) c.x(q);
      for (int b = 0; b < m; ++b) c.cnot(i * m + b, j * m + b);
    }
  }
  return c;
}

QuantumCircuit pauli_evolution(const PauliSum& sum, double dt,
                               PhaseLedger& ledger, Registers regs) {
  if (regs.total() == 0) regs = Registers{sum.n_qubits(), 0, 0};
  QuantumCircuit c(regs);
  std::vector<PauliTerm> terms;
  for (const auto& t : sum.terms()) {
    if (std::abs(t.coefficient.imag()) > 1e-9)
      throw std::invalid_argument("pauli evolution needs Hermitian input");
    if (t.x_mask == 0 && t.z_mask == 0)
      ledger.phase += -t.coefficient.real() * dt;
    else
      terms.push_back(t);
  }
  // Group equal basis changes together, Gray-ish within a group, so the
  // peephole pass can cancel shared conjugation gates and ladder segments.
  std::sort(terms.begin(), terms.end(),
            [](const PauliTerm& a, const PauliTerm& b) {
              uint64_t ba = a.x_mask | (a.x_mask & a.z_mask) << 32;
              uint64_t bb = b.x_mask | (b.x_mask & b.z_mask) << 32;
              if (ba != bb) return gray_rank(ba) < gray_rank(bb);
              return gray_rank(a.z_mask) < gray_rank(b.z_mask);
            });
  for (const auto& t : terms) {
    const uint64_t support = t.x_mask | t.z_mask;
    auto bits = mask_bits(support);
    auto basis_in = [&] {
      for (int b : bits) {
        const bool x = t.x_mask >> b & 1, z = t.z_mask >> b & 1;
        if (x && z) {
          c.sdg(b);
          c.h(b);
        } else if (x) {
          c.h(b);
        }
      }
    };
    auto basis_out = [&] {
      for (int b : bits) {
        const bool x = t.x_mask >> b & 1, z = t.z_mask >> b & 1;
        if (x && z) {
          c.h(b);
          c.s(b);
        } else if (x) {
          c.h(b);
        }
      }
    };
    basis_in();
    const int target = bits.front();
    for (std::size_t i = bits.size(); i-- > 1;) c.cnot(bits[i], target);
    c.rz(2.0 * t.coefficient.real() * dt, target);
    for (std::size_t i = 1; i < bits.size(); ++i) c.cnot(bits[i], target);
    basis_out();
  }
  return peephole_optimize(c);
}

QuantumCircuit peephole_optimize(const QuantumCircuit& c) {
  auto inverse_pair = [](const Gate& a, const Gate& b) {
    auto same_targets = [&] {
      return a.q0 == b.q0 && a.q1 == b.q1;
    };
    switch (a.kind) {
      case GateKind::H:
      case GateKind::X:
      case GateKind::Z:
        return b.kind == a.kind && a.q0 == b.q0;
      case GateKind::CNOT:
        return b.kind == GateKind::CNOT && same_targets();
      case GateKind::CZ:
        return b.kind == GateKind::CZ &&
               ((a.q0 == b.q0 && a.q1 == b.q1) ||
                (a.q0 == b.q1 && a.q1 == b.q0));
      case GateKind::S: return b.kind == GateKind::Sdg && a.q0 == b.q0;
      case GateKind::Sdg: return b.kind == GateKind::S && a.q0 == b.q0;
      case GateKind::T: return b.kind == GateKind::Tdg && a.q0 == b.q0;
      case GateKind::Tdg: return b.kind == GateKind::T && a.q0 == b.q0;
      default: return false;
    }
  };
  std::vector<Gate> stack;
  for (const auto& g : c.gates()) {
    if (!stack.empty() && inverse_pair(stack.back(), g))
      stack.pop_back();
    else
      stack.push_back(g);
  }
  QuantumCircuit out(c.registers(), c.classical_bits());
  out.add_global_phase(c.global_phase());
  for (const auto& g : stack) out.append(g);
  return out;
}

}  // namespace qlat
