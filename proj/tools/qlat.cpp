// Command-line driver: model inspection, circuit synthesis, state
// preparation scans, response runs, noise sweeps, and self-verification.
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qlat/lattice.hpp"
#include "qlat/pauli.hpp"
#include "qlat/response.hpp"
#include "qlat/simulator.hpp"
#include "qlat/state_prep.hpp"
#include "qlat/synthesis.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using nlohmann::json;
using namespace qlat;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::string mode = "amplitude";
  uint64_t seed = 1;
  int threads = 0;
  long shots = 4096;
  int trajectories = 10;
};

const std::vector<std::string> kKnownKeys = {
    "model.n_x",          "model.n_y",           "model.n_z",
    "model.spacing_a",    "model.v0",            "model.hbar_c",
    "model.mass",         "trotter.order",       "trotter.ordering",
    "trotter.variant",    "trotter.steps",       "trotter.time",
    "qpe.w",              "qpe.alpha",           "qpe.beta",
    "qpe.steps_per_unit", "qpe.transition_steps", "qpe.momentum_units",
    "qpe.gate_budget",    "noise.p",             "noise.trajectories",
};

std::map<std::string, std::string> load_config(const std::string& path) {
  if (path.empty()) return {};
  auto kv = parse_config_file(path);
  for (const auto& [key, value] : kv) {
    (void)value;
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) ==
        kKnownKeys.end())
      throw ConfigError("unknown config key: " + key);
  }
  return kv;
}

std::string get_or(const std::map<std::string, std::string>& kv,
                   const std::string& key, const std::string& fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

TrotterConfig trotter_from(const std::map<std::string, std::string>& kv) {
  TrotterConfig tc;
  tc.order = std::stoi(get_or(kv, "trotter.order", "2"));
  tc.operator_order =
      operator_order_from(get_or(kv, "trotter.ordering",
                                 tc.order == 2 ? "T_V_T" : "V_then_T"));
  tc.potential_variant =
      potential_variant_from(get_or(kv, "trotter.variant", "gray_code"));
  tc.steps = std::stoi(get_or(kv, "trotter.steps", "40"));
  tc.total_time = std::stod(get_or(kv, "trotter.time", "0"));
  return tc;
}

QpeConfig qpe_from(const std::map<std::string, std::string>& kv) {
  QpeConfig qc;
  qc.w = std::stoi(get_or(kv, "qpe.w", "6"));
  qc.alpha = std::stod(get_or(kv, "qpe.alpha", "1"));
  qc.beta = std::stod(get_or(kv, "qpe.beta", "0"));
  qc.trotter_steps_per_unit = std::stoi(get_or(kv, "qpe.steps_per_unit", "1"));
  qc.transition_steps = std::stoi(get_or(kv, "qpe.transition_steps", "30"));
  qc.momentum_units = std::stoi(get_or(kv, "qpe.momentum_units", "1"));
  qc.gate_budget = std::stol(get_or(kv, "qpe.gate_budget", "0"));
  TrotterConfig tc = trotter_from(kv);
  qc.trotter_order = tc.order;
  qc.operator_order = tc.operator_order;
  qc.potential_variant = tc.potential_variant;
  qc.validate();
  return qc;
}

uint64_t fnv1a(const std::string& data, uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

class Manifest {
 public:
  Manifest(const std::string& command, const Options& opt,
           const std::map<std::string, std::string>& kv)
      : start_(std::chrono::steady_clock::now()), opt_(opt) {
    doc_["command"] = command;
    doc_["seed"] = opt.seed;
    doc_["mode"] = opt.mode;
    json cfg = json::object();
    std::string flat;
    for (const auto& [k, v] : kv) {
      cfg[k] = v;
      flat += k + "=" + v + "\n";
    }
    doc_["config"] = cfg;
    doc_["input_hash"] =
        fnv1a(command + "|" + std::to_string(opt.seed) + "|" + flat);
    doc_["outputs"] = json::array();
    command_ = command;
  }

  std::string write_text(const std::string& name, const std::string& text) {
    std::filesystem::create_directories(opt_.out_dir);
    std::string path = (std::filesystem::path(opt_.out_dir) / name).string();
    std::ofstream out(path);
    out << text;
    doc_["outputs"].push_back(path);
    return path;
  }

  void finish() {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      start_)
            .count();
    doc_["wall_time_s"] = secs;
    write_text("manifest_" + command_ + ".json", doc_.dump(2) + "\n");
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point start_;
  Options opt_;
  std::string command_;
};

std::string format6(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

int cmd_model(const Options& opt, const std::map<std::string, std::string>& kv) {
  Manifest manifest("model", opt, kv);
  LatticeConfig cfg = lattice_config_from(kv);
  TwoBodyBasis basis(cfg);
  Eigen::MatrixXd h = build_hamiltonian(basis);
  SpectralData spectrum = diagonalize(h);

  PauliSum kinetic = map_diagonal(
      [&] {
        Eigen::VectorXd t(basis.size());
        for (int i = 0; i < basis.size(); ++i) t(i) = basis.kinetic(i);
        return t;
      }(),
      1e-9);
  const std::size_t kinetic_terms = kinetic.terms().size();
  const std::size_t potential_terms =
      std::size_t(1) << cfg.n_qubits();  // uniform projector: full {I,X} set

  std::ostringstream spec_csv;
  spec_csv.precision(6);
  spec_csv << "index,energy_mev\n";
  for (int i = 0; i < spectrum.eigenvalues.size(); ++i)
    spec_csv << i << ',' << spectrum.eigenvalues(i) << '\n';
  manifest.write_text("spectrum.csv", spec_csv.str());

  std::ostringstream pauli_csv;
  pauli_csv.precision(6);
  pauli_csv << "x_mask,z_mask,coefficient_mev\n";
  for (const auto& t : kinetic.terms())
    pauli_csv << t.x_mask << ',' << t.z_mask << ','
              << t.coefficient.real() << '\n';
  const double v_coeff = cfg.v0 / basis.size();
  for (uint64_t x = 0; x < (uint64_t(1) << cfg.n_qubits()); ++x)
    pauli_csv << x << ",0," << v_coeff << '\n';
  manifest.write_text("pauli_terms.csv", pauli_csv.str());

  Eigen::VectorXcd psi_i = zero_momentum_state(basis.size());
  const double e_psi = (psi_i.adjoint() * h.cast<Complex>() * psi_i)(0).real();
  const double overlap =
      std::norm((spectrum.eigenvectors.col(0).adjoint() * psi_i)(0));
  std::cout << "E0 = " << format6(spectrum.ground_energy()) << " MeV\n"
            << "gap = " << format6(spectrum.gap()) << " MeV\n"
            << "spectral_width = " << format6(spectrum.spectral_width())
            << " MeV\n"
            << "<psi_i|H|psi_i> = " << format6(e_psi) << " MeV\n"
            << "|<psi_i|Psi_0>|^2 = " << format6(overlap) << "\n"
            << "kinetic_terms = " << kinetic_terms << "\n"
            << "potential_terms = " << potential_terms << "\n"
            << "total_terms = "
            << kinetic_terms + potential_terms -
                   1  // shared identity string counted once
            << "\n";
  manifest.finish();
  return kExitOk;
}

int cmd_synth(const Options& opt, const std::map<std::string, std::string>& kv,
              int steps_override) {
  Manifest manifest("synth", opt, kv);
  LatticeConfig cfg = lattice_config_from(kv);
  TrotterConfig tc = trotter_from(kv);
  if (steps_override >= 0) tc.steps = steps_override;
  const bool gray = tc.potential_variant == PotentialVariant::gray_code;
  Registers regs{cfg.n_qubits(), gray ? 0 : cfg.n_qubits() - 2, 0};
  QuantumCircuit c(regs);
  PhaseLedger ledger;
  if (tc.steps > 0) {
    if (tc.total_time <= 0.0) tc.total_time = tc.steps * 1e-3;
    c = full_evolution(cfg, tc, ledger);
  }
  manifest.write_text("circuit.txt", c.to_text());
  manifest.write_text("gate_counts.csv", c.count_gates().to_csv());
  std::cout << c.count_gates().to_csv();
  manifest.finish();
  return kExitOk;
}

int cmd_prep(const Options& opt, const std::map<std::string, std::string>& kv,
             const std::vector<int>& steps_list) {
  Manifest manifest("prep", opt, kv);
  LatticeConfig cfg = lattice_config_from(kv);
  std::vector<std::pair<int, OperatorOrder>> orderings = {
      {1, OperatorOrder::V_then_T},
      {1, OperatorOrder::T_then_V},
      {2, OperatorOrder::T_V_T},
      {2, OperatorOrder::V_T_V},
  };
  std::vector<int> steps = steps_list;
  if (steps.empty()) steps = {5, 10, 20, 30, 40, 50, 60};
  auto rows = filter_convergence_scan(
      cfg, orderings, steps, 0.0,
      trotter_from(kv).potential_variant);
  manifest.write_text("prep_scan.csv", scan_to_csv(rows));
  std::cout << scan_to_csv(rows);
  manifest.finish();
  return kExitOk;
}

int cmd_response(const Options& opt,
                 const std::map<std::string, std::string>& kv) {
  Manifest manifest("response", opt, kv);
  LatticeConfig cfg = lattice_config_from(kv);
  QpeConfig qc = qpe_from(kv);
  TwoBodyBasis basis(cfg);
  SpectralData spectrum = diagonalize(build_hamiltonian(basis));
  ScaledHamiltonian scale = scaled_hamiltonian(spectrum);
  const double e_cm = cm_recoil_energy(cfg, qc.momentum_units);

  std::vector<double> p;
  GateCounts gates;
  if (opt.mode == "amplitude") {
    p = run_qpe_amplitudes(cfg, qc, opt.seed, nullptr, &gates);
  } else if (opt.mode == "shots") {
    std::vector<long> counts = run_qpe_shots(cfg, qc, opt.shots, opt.seed);
    p.resize(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
      p[i] = double(counts[i]) / double(opt.shots);
  } else {
    throw ConfigError("mode must be amplitude or shots");
  }
  ResponseDataset data = extract_response(p, qc, scale, e_cm);
  data.seed = opt.seed;
  data.gates = gates;
  manifest.write_text("response.csv", data.to_csv());

  std::vector<double> ref = exact_qpe_reference(
      spectrum, transition_operator_matrix(cfg, qc.momentum_units),
      spectrum.eigenvectors.col(0), qc);
  ResponseDataset exact = extract_response(ref, qc, scale, e_cm);
  manifest.write_text("response_exact.csv", exact.to_csv());

  json meta;
  meta["w"] = qc.w;
  meta["alpha"] = qc.alpha;
  meta["beta"] = qc.beta;
  meta["trotter_steps_total"] = qc.total_trotter_steps();
  meta["e0_mev"] = scale.e0;
  meta["delta_h_mev"] = scale.delta_h;
  meta["e_cm_mev"] = e_cm;
  meta["qe_peak_omega_bar"] = qe_peak_omega_bar(cfg, scale, qc.momentum_units);
  meta["gate_counts_csv"] = gates.to_csv();
  meta["total_evolution_time_inv_mev"] = data.total_evolution_time;
  manifest.write_text("response_meta.json", meta.dump(2) + "\n");
  std::cout << data.to_csv();
  manifest.finish();
  return kExitOk;
}

int cmd_noise_sweep(const Options& opt,
                    const std::map<std::string, std::string>& kv,
                    std::vector<double> p_values) {
  Manifest manifest("noise_sweep", opt, kv);
  if (p_values.empty()) {
    std::istringstream in(get_or(kv, "noise.p", ""));
    std::string tok;
    while (std::getline(in, tok, ',')) p_values.push_back(std::stod(tok));
  }
  if (p_values.empty()) throw ConfigError("noise sweep needs a p list");
  int trajectories = opt.trajectories;
  if (kv.count("noise.trajectories"))
    trajectories = std::stoi(kv.at("noise.trajectories"));
  LatticeConfig cfg = lattice_config_from(kv);
  QpeConfig qc = qpe_from(kv);
  auto points = noise_sweep(cfg, qc, p_values, trajectories, opt.seed);
  std::ostringstream csv;
  csv.precision(6);
  csv << "p,a,mean_probability,variance\n";
  for (const auto& pt : points)
    for (std::size_t a = 0; a < pt.mean.size(); ++a)
      csv << pt.p << ',' << a << ',' << pt.mean[a] << ',' << pt.variance[a]
          << '\n';
  manifest.write_text("noise_sweep.csv", csv.str());
  std::cout << csv.str();
  manifest.finish();
  return kExitOk;
}

struct CheckReport {
  int failures = 0;
  void check(const std::string& name, bool ok) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
    if (!ok) ++failures;
  }
};

int cmd_verify(const Options& opt, const std::map<std::string, std::string>& kv,
               const std::string& level) {
  Manifest manifest("verify", opt, kv);
  CheckReport report;
  std::mt19937_64 prng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  {  // Pauli round-trip: random Hermitian sums survive matrix round-trips.
    bool ok = true;
    for (int nq = 1; nq <= 4 && ok; ++nq) {
      PauliSum sum(nq);
      for (uint64_t x = 0; x < (uint64_t(1) << nq); ++x)
        for (uint64_t z = 0; z < (uint64_t(1) << nq); ++z)
          if (unif(prng) > 0.3) sum.add(x, z, unif(prng));
      Eigen::MatrixXcd m = matrix_of(sum);
      ok = ok && (m - m.adjoint()).norm() < 1e-12;
      const double dim = double(1 << nq);
      for (const auto& t : sum.terms()) {
        PauliSum unit(nq);
        unit.add(t.x_mask, t.z_mask, 1.0);
        Complex c = (matrix_of(unit).adjoint() * m).trace() / dim;
        ok = ok && std::abs(c - t.coefficient) < 1e-10;
      }
    }
    report.check("pauli_roundtrip", ok);
  }
  {  // Gray-code adjacency of ordered diagonal families.
    bool ok = true;
    for (int trial = 0; trial < 5; ++trial) {
      PauliSum diag(5);
      for (uint64_t z = 1; z < 32; ++z) diag.add(0, z, unif(prng) + 2.0);
      auto ordered = gray_code_order(diag);
      ok = ok && ordered.size() == 31;
      for (std::size_t i = 1; i < ordered.size(); ++i) {
        const uint64_t changed = ordered[i].z_mask ^ ordered[i - 1].z_mask;
        ok = ok && std::popcount(changed) == 1;
      }
    }
    report.check("gray_code_ordering", ok);
  }
  {  // Unitary equivalence of synthesized evolutions at n_q = 6.
    LatticeConfig cfg;
    cfg.n_x = cfg.n_y = cfg.n_z = 4;
    TwoBodyBasis basis(cfg);
    Eigen::MatrixXd h = build_hamiltonian(basis);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const double dt = 2e-3;
    Eigen::MatrixXcd want =
        es.eigenvectors().cast<Complex>() *
        (-Complex(0, 1) * dt * es.eigenvalues().cast<Complex>().array())
            .exp()
            .matrix()
            .asDiagonal() *
        es.eigenvectors().transpose().cast<Complex>();
    bool ok = true;
    for (auto variant :
         {PotentialVariant::gray_code, PotentialVariant::mcu_ladder}) {
      TrotterConfig tc;
      tc.order = 2;
      tc.operator_order = OperatorOrder::T_V_T;
      tc.potential_variant = variant;
      tc.steps = 60;
      tc.total_time = dt;
      PhaseLedger ledger;
      QuantumCircuit c = full_evolution(cfg, tc, ledger);
      UnitaryWithPhase u = unitary_of(c);
      Eigen::MatrixXcd got =
          std::exp(Complex(0, u.phase + ledger.phase)) *
          u.matrix.topLeftCorner(h.rows(), h.cols());
      ok = ok && (got - want).cwiseAbs().maxCoeff() < 5e-4;
    }
    report.check("trotter_unitary_equivalence", ok);
  }
  {  // Determinism and norm preservation under a fixed seed.
    QuantumCircuit c(Registers{4, 0, 0}, 4);
    for (int q = 0; q < 4; ++q) c.h(q);
    for (int q = 0; q < 3; ++q) c.cnot(q, q + 1);
    for (int q = 0; q < 4; ++q) c.measure(q, q);
    NoiseModel noise{2e-3};
    RunResult a = run(c, StateVector(4), 400, noise, 13);
    RunResult b = run(c, StateVector(4), 400, noise, 13);
    report.check("determinism_fixed_seed", a.histogram == b.histogram);
    StateVector sv(4);
    SplitMix64 rng(5);
    apply_circuit(sv, c, &rng, &noise);
    double norm = 0.0;
    for (uint64_t i = 0; i < sv.dim(); ++i) norm += std::norm(sv[i]);
    report.check("norm_preservation", std::abs(norm - 1.0) < 1e-10);
  }
  {  // Depolarizing trajectory convergence against the analytic channel.
    const double p = 0.3;
    QuantumCircuit c(Registers{2, 0, 0}, 2);
    c.h(0);
    c.cnot(0, 1);
    c.measure(0, 0);
    c.measure(1, 1);
    RunResult r = run(c, StateVector(2), 60000, NoiseModel{p}, 17);
    // Depolarizing after the CNOT: diagonal (3/4 - p/4? ) computed exactly:
    // rho = (1-p)|Bell><Bell| + p/15 sum_P P|Bell><Bell|P.
    Eigen::VectorXcd bell(4);
    bell << 1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0);
    Eigen::MatrixXcd rho = (1 - p) * bell * bell.adjoint();
    for (uint64_t x = 0; x < 4; ++x)
      for (uint64_t z = 0; z < 4; ++z) {
        if (x == 0 && z == 0) continue;
        PauliSum term(2);
        term.add(x, z, 1.0);
        Eigen::MatrixXcd pm = matrix_of(term);
        rho += (p / 15.0) * pm * bell * bell.adjoint() * pm.adjoint();
      }
    bool ok = true;
    for (uint64_t k = 0; k < 4; ++k) {
      const double freq =
          r.histogram.count(k) ? double(r.histogram.at(k)) / 60000.0 : 0.0;
      ok = ok && std::abs(freq - rho(int(k), int(k)).real()) < 0.02;
    }
    report.check("depolarizing_trajectory_convergence", ok);
  }
  if (level == "full") {
    LatticeConfig cfg = lattice_config_from(kv);
    {  // Count regressions at the reference size.
      PhaseLedger lg;
      GateCounts kin = kinetic_evolution(cfg, 1e-3, lg).count_gates();
      GateCounts pot =
          potential_evolution(cfg.n_qubits(), cfg.v0 * 1e-3,
                              PotentialVariant::gray_code, lg)
              .count_gates();
      GateCounts ff =
          potential_evolution(cfg.n_qubits(), cfg.v0 * 1e-3,
                              PotentialVariant::mcu_feedforward, lg)
              .count_gates();
      report.check("count_kinetic_18_18", kin.cnot == 18 && kin.rz == 18);
      report.check("count_gray_510_511", pot.cnot == 510 && pot.rz == 511);
      report.check("count_feedforward_23_7_28",
                   ff.cnot == 23 && ff.conditioned_cz == 7 && ff.t == 28);
    }
    {  // 22-qubit response stack smoke test.
      SpectralData spectrum = diagonalize(build_hamiltonian(TwoBodyBasis(cfg)));
      ScaledHamiltonian scale = scaled_hamiltonian(spectrum);
      QpeConfig qc;
      qc.w = 6;
      qc.potential_variant = PotentialVariant::mcu_feedforward;
      QuantumCircuit big = qpe_circuit(cfg, qc, scale);
      report.check("qpe_circuit_22_qubits", big.n_qubits() == 22);
      QpeConfig small = qc;
      small.w = 2;
      small.transition_steps = 5;
      std::vector<double> p = run_qpe_amplitudes(cfg, small, opt.seed);
      double total = 0.0;
      for (double v : p) total += v;
      report.check("qpe_smoke_probability_sum", std::abs(total - 1.0) < 1e-9);
    }
  }
  manifest.write_text("verify_report.txt",
                      report.failures == 0 ? "all checks passed\n"
                                           : "failures detected\n");
  manifest.finish();
  return report.failures == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Two-body lattice response toolkit"};
  app.require_subcommand(1);
  app.add_option("--config", opt.config_path, "flat key=value config file");
  app.add_option("--seed", opt.seed, "base RNG seed");
  app.add_option("--threads", opt.threads, "OpenMP thread cap (0 = default)");
  app.add_option("--out-dir", opt.out_dir, "output directory");
  app.add_option("--mode", opt.mode, "amplitude|shots")
      ->check(CLI::IsMember({"amplitude", "shots"}));
  app.add_option("--shots", opt.shots, "shot count for shots mode");
  app.add_option("--trajectories", opt.trajectories,
                 "noise-sweep trajectories");

  auto* model = app.add_subcommand("model", "spectrum and Pauli-sum dump");
  int synth_steps = -1;
  auto* synth = app.add_subcommand("synth", "Trotter circuit synthesis");
  synth->add_option("--steps", synth_steps, "step count override");
  std::vector<int> steps_list;
  auto* prep = app.add_subcommand("prep", "filter convergence scan");
  prep->add_option("--steps-list", steps_list, "Trotter step counts");
  auto* response = app.add_subcommand("response", "QPE response run");
  std::vector<double> p_values;
  auto* sweep = app.add_subcommand("noise-sweep", "depolarizing sweep");
  sweep->add_option("--p-list", p_values, "depolarizing probabilities");
  std::string verify_level = "quick";
  auto* verify = app.add_subcommand("verify", "self-check suite");
  verify->add_option("level", verify_level, "quick|full")
      ->check(CLI::IsMember({"quick", "full"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

#ifdef _OPENMP
  if (opt.threads > 0) omp_set_num_threads(opt.threads);
#endif

  try {
    const auto kv = load_config(opt.config_path);
    if (model->parsed()) return cmd_model(opt, kv);
    if (synth->parsed()) return cmd_synth(opt, kv, synth_steps);
    if (prep->parsed()) return cmd_prep(opt, kv, steps_list);
    if (response->parsed()) return cmd_response(opt, kv);
    if (sweep->parsed()) return cmd_noise_sweep(opt, kv, p_values);
    if (verify->parsed()) return cmd_verify(opt, kv, verify_level);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
