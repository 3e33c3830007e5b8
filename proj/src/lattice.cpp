#include "qlat/lattice.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace qlat {

namespace {

bool is_even_power_of_two(int n) {
  return n >= 2 && (static_cast<unsigned>(n) & (static_cast<unsigned>(n) - 1)) == 0;
}

int log2_int(int n) { return std::countr_zero(static_cast<unsigned>(n)); }

}  // namespace

int LatticeConfig::n_qubits() const {
  return log2_int(n_x) + log2_int(n_y) + log2_int(n_z);
}

void LatticeConfig::validate() const {
  if (!is_even_power_of_two(n_x) || !is_even_power_of_two(n_y) ||
      !is_even_power_of_two(n_z))
    throw std::invalid_argument("lattice sides must be even powers of 2");
  if (spacing_a <= 0.0) throw std::invalid_argument("spacing must be positive");
  if (mass <= 0.0) throw std::invalid_argument("mass must be positive");
  if (hbar_c <= 0.0) throw std::invalid_argument("hbar_c must be positive");
}

int TwoBodyBasis::momentum_integer(int j, int n) {
  // Axis ordering 0, +1, ..., +(n/2-1), -n/2, ..., -1.
  return j < n / 2 ? j : j - n;
}

int TwoBodyBasis::value_index(int k_int, int n) {
  return ((k_int % n) + n) % n;
}

TwoBodyBasis::TwoBodyBasis(const LatticeConfig& config) : config_(config) {
  config_.validate();
  n_qubits_ = config_.n_qubits();
  momenta_.reserve(static_cast<std::size_t>(config_.total_sites()));
  const double ux = 2.0 * std::numbers::pi / config_.length_x();
  const double uy = 2.0 * std::numbers::pi / config_.length_y();
  const double uz = 2.0 * std::numbers::pi / config_.length_z();
  // z index varies fastest, then y, then x.
  for (int jx = 0; jx < config_.n_x; ++jx)
    for (int jy = 0; jy < config_.n_y; ++jy)
      for (int jz = 0; jz < config_.n_z; ++jz)
        momenta_.push_back(MomentumVector{
            ux * momentum_integer(jx, config_.n_x),
            uy * momentum_integer(jy, config_.n_y),
            uz * momentum_integer(jz, config_.n_z)});
}

double TwoBodyBasis::kinetic(int index) const {
  const auto& k = momenta_[static_cast<std::size_t>(index)];
  return config_.hbar_c * config_.hbar_c * k.squared() / config_.mass;
}

Eigen::VectorXd TwoBodyBasis::axis_kinetic_diagonal(int n, double spacing_a,
                                                    double hbar_c, double mass) {
  const double u = 2.0 * std::numbers::pi / (n * spacing_a);
  Eigen::VectorXd d(n);
  for (int j = 0; j < n; ++j) {
    double k = u * momentum_integer(j, n);
    d(j) = hbar_c * hbar_c * k * k / mass;
  }
  return d;
}

Eigen::MatrixXd build_hamiltonian(const TwoBodyBasis& basis) {
  const int n = basis.size();
  const double v = basis.config().v0 / n;
  Eigen::MatrixXd h = Eigen::MatrixXd::Constant(n, n, v);
  for (int i = 0; i < n; ++i) h(i, i) += basis.kinetic(i);
  return h;
}

SpectralData diagonalize(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("diagonalization failed");
  SpectralData out;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors().cast<std::complex<double>>();
  return out;
}

Eigen::VectorXcd zero_momentum_state(int dim) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  v(0) = 1.0;
  return v;
}

Eigen::VectorXcd uniform_state(int dim) {
  return Eigen::VectorXcd::Constant(dim, 1.0 / std::sqrt(double(dim)));
}

ExactResponse exact_response(const SpectralData& spectrum,
                             const Eigen::MatrixXcd& transition_op,
                             const Eigen::VectorXcd& initial_state) {
  const auto n = spectrum.eigenvalues.size();
  Eigen::VectorXcd transformed = transition_op * initial_state;
  ExactResponse out;
  out.frequencies.resize(n);
  out.weights.resize(n);
  for (Eigen::Index nu = 0; nu < n; ++nu) {
    out.frequencies(nu) = spectrum.eigenvalues(nu) - spectrum.eigenvalues(0);
    std::complex<double> amp = spectrum.eigenvectors.col(nu).dot(transformed);
    out.weights(nu) = std::norm(amp);
  }
  return out;
}

FilterResult exact_filtered_state(const Eigen::MatrixXd& h,
                                  const SpectralData& spectrum, double e0,
                                  double t, const Eigen::VectorXcd& psi) {
  Eigen::VectorXcd in_eigen = spectrum.eigenvectors.adjoint() * psi;
  for (Eigen::Index nu = 0; nu < in_eigen.size(); ++nu)
    in_eigen(nu) *= std::cos((spectrum.eigenvalues(nu) - e0) * t);
  FilterResult out;
  Eigen::VectorXcd filtered = spectrum.eigenvectors * in_eigen;
  out.probability = filtered.squaredNorm();
  if (out.probability < 1e-14)
    throw std::runtime_error("filter projection probability below 1e-14");
  out.state = filtered / std::sqrt(out.probability);
  out.energy = std::real(out.state.dot(h.cast<std::complex<double>>() * out.state));
  return out;
}

Eigen::MatrixXd momentum_shift_z(const TwoBodyBasis& basis) {
  const auto& cfg = basis.config();
  const int n = basis.size();
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(n, n);
  const int nz = cfg.n_z;
  for (int i = 0; i < n; ++i) {
    int jz = i % nz;
    int rest = i - jz;
    int k_int = TwoBodyBasis::momentum_integer(jz, nz);
    int jz_out = TwoBodyBasis::value_index(k_int + 1, nz);
    op(rest + jz_out, i) = 1.0;
  }
  return op;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = value;
  }
  return kv;
}

LatticeConfig lattice_config_from(const std::map<std::string, std::string>& kv) {
  LatticeConfig cfg;
  auto get = [&kv](const std::string& key, auto& field) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    if constexpr (std::is_same_v<std::decay_t<decltype(field)>, int>)
      field = std::stoi(it->second);
    else
      field = std::stod(it->second);
  };
  get("model.n_x", cfg.n_x);
  get("model.n_y", cfg.n_y);
  get("model.n_z", cfg.n_z);
  get("model.spacing_a", cfg.spacing_a);
  get("model.v0", cfg.v0);
  get("model.hbar_c", cfg.hbar_c);
  get("model.mass", cfg.mass);
  cfg.validate();
  return cfg;
}

}  // namespace qlat
