#include <doctest.h>

#include <cmath>
#include <complex>

#include <nlohmann/json.hpp>

#include "embz/embezzlement.hpp"
#include "embz/errors.hpp"
#include "embz/models.hpp"
#include "embz/oracle.hpp"
#include "support.hpp"

using namespace embz;
using namespace embz::oracle;
using doctest::Approx;

namespace {

Eigen::MatrixXcd random_amplitudes(Eigen::Index a, Eigen::Index b, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(a, b);
  for (Eigen::Index i = 0; i < a; ++i) {
    for (Eigen::Index j = 0; j < b; ++j) m(i, j) = {g(rng), g(rng)};
  }
  return m / m.norm();
}

Eigen::MatrixXcd random_density(Eigen::Index d, Eigen::Index rank, std::mt19937_64& rng) {
  const Eigen::MatrixXcd g = random_amplitudes(d, rank, rng);
  return g * g.adjoint();
}

// Squared singular values through the Hermitian Gram matrix, independent of
// the oracle's SVD path.
std::vector<double> gram_spectrum(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m * m.adjoint());
  std::vector<double> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(std::max(0.0, es.eigenvalues()[i]));
  return ref::sorted_desc(out);
}

std::vector<double> eigen_spectrum(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return ref::sorted_desc(out);
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("dense states are validated") {
    CHECK_THROWS_AS(DenseState::pure(Eigen::MatrixXcd::Ones(2, 2)), ConfigError);
    CHECK_THROWS_AS(DenseState::mixed(Eigen::MatrixXcd::Identity(2, 3) * 0.5), ConfigError);
    Eigen::MatrixXcd neg = Eigen::MatrixXcd::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    CHECK_THROWS_AS(DenseState::mixed(neg), ConfigError);
  }

  TEST_CASE("Schmidt spectra") {
    Eigen::MatrixXcd product = Eigen::MatrixXcd::Zero(2, 2);
    product(0, 0) = 1.0;
    CHECK(schmidt_spectrum(DenseState::pure(product)).weights() == std::vector<double>{1.0});

    const Eigen::MatrixXcd bell = Eigen::MatrixXcd::Identity(2, 2) / std::sqrt(2.0);
    CHECK(ref::max_abs_diff(schmidt_spectrum(DenseState::pure(bell)).weights(), {0.5, 0.5}) < 1e-15);

    std::mt19937_64 rng(53);
    for (int t = 0; t < 20; ++t) {
      const Eigen::MatrixXcd m = random_amplitudes(4, 4, rng);
      const Spectrum s = schmidt_spectrum(DenseState::pure(m));
      CHECK(ref::mass(s) == Approx(1.0).epsilon(1e-10));
      CHECK(s.exact());
      CHECK(ref::max_abs_diff(s.weights(), gram_spectrum(m)) < 1e-12);
    }
  }

  TEST_CASE("vector error under local unitaries") {
    std::mt19937_64 rng(59);
    const Eigen::MatrixXcd m = random_amplitudes(3, 3, rng);
    CHECK(min_vector_error_local_unitaries(DenseState::pure(m), DenseState::pure(m)) < 1e-6);

    Eigen::MatrixXcd product = Eigen::MatrixXcd::Zero(2, 2);
    product(1, 0) = 1.0;
    const Eigen::MatrixXcd bell = Eigen::MatrixXcd::Identity(2, 2) / std::sqrt(2.0);
    CHECK(min_vector_error_local_unitaries(DenseState::pure(product), DenseState::pure(bell)) ==
          Approx(std::sqrt(2 - std::sqrt(2.0))).epsilon(1e-8));

    for (int t = 0; t < 10; ++t) {
      const Eigen::MatrixXcd a = random_amplitudes(3, 4, rng);
      const Eigen::MatrixXcd b = random_amplitudes(3, 4, rng);
      const double f = ref::fidelity(gram_spectrum(a), gram_spectrum(b));
      const double v = min_vector_error_local_unitaries(DenseState::pure(a), DenseState::pure(b));
      CHECK(v == Approx(std::sqrt(std::max(0.0, 2 - 2 * f))).epsilon(1e-6));
    }

    CHECK_THROWS_AS(min_vector_error_local_unitaries(DenseState::pure(m), DenseState::pure(bell)), ConfigError);
    SearchOptions few;
    few.restarts = 2;
    CHECK_THROWS_AS(min_vector_error_local_unitaries(DenseState::pure(m), DenseState::pure(m), few), ConfigError);
  }

  TEST_CASE("trace distance over the unitary orbit") {
    std::mt19937_64 rng(61);
    const Eigen::MatrixXcd rho = random_density(4, 4, rng);
    CHECK(min_trace_distance_unitary_orbit(DenseState::mixed(rho), DenseState::mixed(rho)) < 1e-12);

    Eigen::MatrixXcd pure = Eigen::MatrixXcd::Zero(2, 2);
    pure(0, 0) = 1.0;
    const Eigen::MatrixXcd flat = Eigen::MatrixXcd::Identity(2, 2) * 0.5;
    CHECK(min_trace_distance_unitary_orbit(DenseState::mixed(pure), DenseState::mixed(flat)) ==
          Approx(1.0).epsilon(1e-12));

    for (int t = 0; t < 10; ++t) {
      const Eigen::MatrixXcd a = random_density(5, 1 + t % 5, rng);
      const Eigen::MatrixXcd b = random_density(5, 5, rng);
      const double l1 = ref::l1(eigen_spectrum(a), eigen_spectrum(b));
      CHECK(min_trace_distance_unitary_orbit(DenseState::mixed(a), DenseState::mixed(b)) ==
            Approx(l1).epsilon(1e-6));
    }

    const Eigen::MatrixXcd diff = Eigen::Vector3cd(0.5, -0.25, 0.0).asDiagonal();
    CHECK(trace_norm(diff) == Approx(0.75).epsilon(1e-14));
  }

  TEST_CASE("exact diagonalization of the XY chain") {
    CHECK(ref::max_abs_diff(exact_diag_xy(2, 0.0, 0.0).weights(), {0.5, 0.5}) < 1e-10);
    const Spectrum polarized = exact_diag_xy(2, 0.0, 10.0);
    CHECK(polarized.max_weight() == Approx(1.0).epsilon(1e-6));
    for (unsigned L : {4u, 8u}) {
      const Spectrum ed = exact_diag_xy(L, 0.0, 0.0);
      CHECK(ref::mass(ed) == Approx(1.0).epsilon(1e-12));
      CHECK(ref::max_abs_diff(ed.weights(), xy_half_chain_spectrum(L, 0.0, 0.0, 4096).weights()) < 1e-8);
    }
    // Transverse-field Ising pair: closed-form ground state of a 4x4 matrix.
    const Spectrum ising = exact_diag_xy(2, 1.0, 0.5);
    CHECK(ising.atom_count() == 2);
    CHECK(ref::mass(ising) == Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(exact_diag_xy(14, 0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(exact_diag_xy(3, 0.0, 0.0), ConfigError);
  }

  TEST_CASE("monopartite to bipartite implication") {
    const auto same = make_target_pair(std::vector<double>{0.7, 0.3}, std::vector<double>{0.7, 0.3}, 2);
    const ImplicationReport r0 = monopartite_to_bipartite_check(Spectrum{}, same);
    CHECK(r0.vector_error < 1e-6);
    CHECK(r0.trace_error < 1e-10);
    CHECK(r0.pass);

    const auto bell = make_target_pair(std::vector<double>{1.0}, std::vector<double>{0.5, 0.5}, 2);
    const ImplicationReport r1 = monopartite_to_bipartite_check(Spectrum::uniform(2), bell);
    CHECK(r1.pass);
    CHECK(r1.trace_error == Approx(monopartite_error(Spectrum::uniform(2), bell).lo).epsilon(1e-6));
    CHECK(r1.vector_error <= std::sqrt(r1.trace_error) + 1e-6);
  }

  TEST_CASE("certification suites, reduced size") {
    const OracleReport pure = certify_pure_pairs(12, 3, 1e-6, 1);
    CHECK(pure.pass);
    CHECK(pure.instances == 12);
    CHECK(pure.max_abs_deviation <= 1e-6);

    const OracleReport mixed = certify_mixed_pairs(12, 3, 1e-6, 1);
    CHECK(mixed.pass);
    CHECK(mixed.max_abs_deviation <= 1e-6);

    const OracleReport imp = certify_implication(6, 3, 1e-6, 1);
    CHECK(imp.pass);

    const OracleReport again = certify_mixed_pairs(12, 3, 1e-6, 2);
    CHECK(again.max_abs_deviation == mixed.max_abs_deviation);

    const nlohmann::json j = pure;
    CHECK(j.at("op").is_string());
    CHECK(j.at("seed") == 3);
    CHECK(j.at("instances") == 12);
    CHECK(j.at("pass") == true);
  }
}
