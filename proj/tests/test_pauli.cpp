#include <doctest.h>

#include <bit>
#include <random>

#include "qlat/lattice.hpp"
#include "qlat/pauli.hpp"

using namespace qlat;

namespace {

Eigen::MatrixXcd random_hermitian(int dim, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = Complex{gauss(rng), gauss(rng)};
  return 0.5 * (m + m.adjoint().eval());
}

/// Full {I,Z}x{I,X} expansion of the reference-config Hamiltonian.
PauliSum reference_hamiltonian_terms() {
  LatticeConfig cfg;  // defaults are the reference config
  TwoBodyBasis basis(cfg);
  Eigen::VectorXd kin(basis.size());
  for (int i = 0; i < basis.size(); ++i) kin(i) = basis.kinetic(i);
  PauliSum sum = map_diagonal(kin);
  // Constant all-to-all coupling V0/N = (V0/N) * sum over all X-masks.
  const double v = cfg.v0 / basis.size();
  PauliSum pot(basis.n_qubits());
  for (uint64_t x = 0; x < (1ull << basis.n_qubits()); ++x)
    pot.add(x, 0, Complex{v, 0.0});
  sum += pot;
  return sum;
}

}  // namespace

TEST_CASE("projector_mapping_matches_known_expansions") {
  // |0><0| = (I + Z)/2
  PauliSum p00 = map_projector(0, 0, 1);
  CHECK(p00.size() == 2);
  CHECK(p00.coefficient_of(0, 0).real() == doctest::Approx(0.5));
  CHECK(p00.coefficient_of(0, 1).real() == doctest::Approx(0.5));

  // |1><0| = (X - iY)/2
  PauliSum p10 = map_projector(1, 0, 1);
  CHECK(p10.coefficient_of(1, 0).real() == doctest::Approx(0.5));
  CHECK(p10.coefficient_of(1, 1).imag() == doctest::Approx(-0.5));

  // |00><00| = (II + IZ + ZI + ZZ)/4
  PauliSum p0000 = map_projector(0, 0, 2);
  CHECK(p0000.size() == 4);
  for (uint64_t z = 0; z < 4; ++z)
    CHECK(p0000.coefficient_of(0, z).real() == doctest::Approx(0.25));
}

TEST_CASE("map_matrix_round_trips_random_hermitian") {
  for (int n_q = 1; n_q <= 4; ++n_q) {
    Eigen::MatrixXcd m = random_hermitian(1 << n_q, 1234u + unsigned(n_q));
    PauliSum s = map_matrix(m);
    Eigen::MatrixXcd back = matrix_of(s);
    CHECK((back - m).cwiseAbs().maxCoeff() < 1e-12);
    // Hermitian input yields real coefficients.
    for (const auto& t : s.terms()) CHECK(std::abs(t.coefficient.imag()) < 1e-12);
  }
}

TEST_CASE("map_diagonal_matches_map_matrix") {
  Eigen::VectorXd d(8);
  d << 0, 1, 4, 9, 16, 9, 4, 1;
  PauliSum s = map_diagonal(d);
  PauliSum full = map_matrix(d.cast<Complex>().asDiagonal().toDenseMatrix());
  CHECK(s.size() == full.size());
  for (const auto& t : s.terms()) {
    CHECK(t.is_diagonal());
    CHECK(std::abs(t.coefficient - full.coefficient_of(0, t.z_mask)) < 1e-12);
  }
}

TEST_CASE("reference_kinetic_expansion_has_19_terms_with_expected_angles") {
  LatticeConfig cfg;
  TwoBodyBasis basis(cfg);
  Eigen::VectorXd kin(basis.size());
  for (int i = 0; i < basis.size(); ++i) kin(i) = basis.kinetic(i);
  PauliSum s = map_diagonal(kin);
  CHECK(s.size() == 19);
  // Per-axis Walsh coefficients of C*[0,1,4,9,16,9,4,1].
  const double c = cfg.hbar_c * cfg.hbar_c *
                   std::pow(2.0 * 3.14159265358979323846 / cfg.length_x(), 2) /
                   cfg.mass;
  CHECK(s.coefficient_of(0, 0).real() == doctest::Approx(16.5 * c).epsilon(1e-12));
  CHECK(16.5 * c == doctest::Approx(422.093).epsilon(2.5e-6));
  // The four rotation magnitudes on the z-axis bits (qubits 0..2).
  CHECK(s.coefficient_of(0, 0b001).real() == doctest::Approx(12.791).epsilon(1e-4));
  CHECK(s.coefficient_of(0, 0b010).real() == doctest::Approx(25.581).epsilon(1e-4));
  CHECK(s.coefficient_of(0, 0b100).real() == doctest::Approx(-51.163).epsilon(1e-4));
  CHECK(s.coefficient_of(0, 0b110).real() == doctest::Approx(-102.326).epsilon(1e-4));
  CHECK(std::abs(s.coefficient_of(0, 0b111)) < 1e-12);
  // All-Z masks within each axis triple replicate across axes.
  CHECK(s.coefficient_of(0, 0b001'000).real() == doctest::Approx(12.791).epsilon(1e-4));
  CHECK(s.coefficient_of(0, 0b001'000'000).real() == doctest::Approx(12.791).epsilon(1e-4));
}

TEST_CASE("reference_hamiltonian_expansion_counts") {
  PauliSum s = reference_hamiltonian_terms();
  s.prune();
  int n_ix = 0, n_iz = 0;
  for (const auto& t : s.terms()) {
    if (t.z_mask == 0 && t.x_mask != 0) ++n_ix;
    if (t.x_mask == 0) ++n_iz;
  }
  // All-I carries kinetic constant + V0/N, counted in the {I,Z} family.
  CHECK(n_ix == 511);
  CHECK(n_iz == 19);
  CHECK(s.size() == 530);
  CHECK(s.coefficient_of(1, 0).real() == doctest::Approx(-235.0 / 512.0));
}

TEST_CASE("gray_code_order_gives_single_bit_steps") {
  Eigen::VectorXd d(16);
  for (int i = 0; i < 16; ++i) d(i) = std::cos(0.7 * i) + 2.0;
  PauliSum s = map_diagonal(d);
  auto ordered = gray_code_order(s);
  REQUIRE(ordered.size() == s.size());
  for (std::size_t i = 1; i < ordered.size(); ++i)
    CHECK(std::popcount(ordered[i - 1].z_mask ^ ordered[i].z_mask) == 1);
}

TEST_CASE("gray_code_order_handles_gapped_mask_sets") {
  // Six of seven nonzero 3-bit masks; rank-contiguity fails but a path exists.
  PauliSum s(3);
  for (uint64_t z : {1, 2, 3, 4, 5, 6}) s.add(0, z, Complex{1.0, 0.0});
  auto ordered = gray_code_order(s);
  REQUIRE(ordered.size() == 6);
  for (std::size_t i = 1; i < ordered.size(); ++i)
    CHECK(std::popcount(ordered[i - 1].z_mask ^ ordered[i].z_mask) == 1);
}

TEST_CASE("gray_code_order_rejects_non_diagonal_and_impossible_sets") {
  PauliSum bad(2);
  bad.add(1, 0, Complex{1.0, 0.0});
  CHECK_THROWS(gray_code_order(bad));

  PauliSum gapped(3);
  gapped.add(0, 0b001, Complex{1.0, 0.0});
  gapped.add(0, 0b110, Complex{1.0, 0.0});
  CHECK_THROWS(gray_code_order(gapped));
}

TEST_CASE("commutation_families") {
  PauliSum s = reference_hamiltonian_terms();
  PauliSum zs(s.n_qubits()), xs(s.n_qubits());
  for (const auto& t : s.terms())
    (t.x_mask == 0 ? zs : xs).add(t);
  CHECK(zs.all_terms_commute());
  CHECK(xs.all_terms_commute());
  // X and Y on the same qubit anticommute.
  PauliTerm x{1, 0, 1.0}, y{1, 1, 1.0}, z{0, 1, 1.0};
  CHECK_FALSE(x.commutes_with(y));
  CHECK_FALSE(x.commutes_with(z));
  CHECK(x.commutes_with(x));
}

TEST_CASE("text_round_trip") {
  Eigen::MatrixXcd m = random_hermitian(8, 99u);
  PauliSum s = map_matrix(m);
  std::string text = map_matrix(m).to_text();
  PauliSum back = PauliSum::from_text(text, 3);
  CHECK(back.size() == s.size());
  for (const auto& t : s.terms())
    CHECK(std::abs(back.coefficient_of(t.x_mask, t.z_mask) - t.coefficient) < 1e-5);
  // Complex coefficients survive dump/load too.
  PauliSum c(2);
  c.add(1, 2, Complex{0.25, -0.5});
  PauliSum cb = PauliSum::from_text(c.to_text(), 2);
  CHECK(std::abs(cb.coefficient_of(1, 2) - Complex{0.25, -0.5}) < 1e-5);
}

TEST_CASE("prune_drops_small_terms") {
  PauliSum s(2);
  s.add(0, 1, Complex{1e-15, 0.0});
  s.add(0, 2, Complex{1.0, 0.0});
  s.prune();
  CHECK(s.size() == 1);
}
