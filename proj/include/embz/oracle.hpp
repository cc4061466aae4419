#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "embz/embezzlement.hpp"
#include "embz/spectrum.hpp"

namespace embz::oracle {

/// Explicit small state: a pure bipartite amplitude matrix (dA×dB, unit
/// Frobenius norm) or a mixed monopartite density matrix (unit trace, PSD).
class DenseState {
 public:
  static DenseState pure(Eigen::MatrixXcd amplitudes);
  static DenseState mixed(Eigen::MatrixXcd rho);

  [[nodiscard]] bool is_pure() const noexcept { return pure_; }
  [[nodiscard]] const Eigen::MatrixXcd& matrix() const noexcept { return m_; }
  [[nodiscard]] Eigen::Index dim_a() const noexcept { return m_.rows(); }
  [[nodiscard]] Eigen::Index dim_b() const noexcept { return m_.cols(); }

 private:
  DenseState(Eigen::MatrixXcd m, bool pure) : m_(std::move(m)), pure_(pure) {}
  Eigen::MatrixXcd m_;
  bool pure_ = true;
};

/// Squared singular values of the amplitude matrix.
Spectrum schmidt_spectrum(const DenseState& state);

struct SearchOptions {
  unsigned restarts = 8;
  double tol = 1e-14;
  std::uint64_t seed = 7;
  std::size_t scout_sweeps = 200;  // per restart; the best restart then runs to convergence
  std::size_t max_sweeps = 20000;
};

/// min over (u_A, u_B) of ‖(u_A⊗u_B)s1 − s2‖ by alternating polar maximization.
double min_vector_error_local_unitaries(const DenseState& s1, const DenseState& s2, const SearchOptions& options = {});

/// min over u of ‖uAu* − B‖₁; seeded geodesic search around eigenbasis alignment.
double min_trace_distance_unitary_orbit(const DenseState& a, const DenseState& b, const SearchOptions& options = {});

/// Trace norm of a Hermitian matrix.
double trace_norm(const Eigen::MatrixXcd& hermitian);

/// Half-chain spectrum of the open-chain ground state, by dense diagonalization
/// per symmetry sector (particle number for gamma = 0, parity otherwise).
Spectrum exact_diag_xy(unsigned L, double gamma, double h);

struct ImplicationReport {
  double vector_error = 0.0;
  double trace_error = 0.0;
  bool pass = false;
};

/// Dense purifications of omega⊗phi and omega⊗psi under random local unitaries;
/// checks vector_error ≤ sqrt(trace_error) + tol.
ImplicationReport monopartite_to_bipartite_check(const Spectrum& omega, const TargetPair& pair, double tol = 1e-6,
                                                 std::uint64_t seed = 7);

struct OracleReport {
  std::string op;
  std::uint64_t seed = 0;
  std::size_t instances = 0;
  double max_abs_deviation = 0.0;
  bool pass = false;
};

void to_json(nlohmann::json& j, const OracleReport& r);

constexpr std::uint64_t kDefaultSeed = 7;

/// Random pure pairs with dims in [2, 4] per side, oracle vs sqrt(2 − 2F).
OracleReport certify_pure_pairs(std::size_t instances = 200, std::uint64_t seed = kDefaultSeed, double tol = 1e-6,
                                unsigned threads = 0);
/// Random density pairs with d in [2, 6], oracle vs l1_sorted.
OracleReport certify_mixed_pairs(std::size_t instances = 200, std::uint64_t seed = kDefaultSeed, double tol = 1e-6,
                                 unsigned threads = 0);
/// Random (omega, phi, psi) with per-side dimension r·d ≤ 8; deviation is the
/// largest excess of vector_error over sqrt(trace_error).
OracleReport certify_implication(std::size_t instances = 100, std::uint64_t seed = kDefaultSeed, double tol = 1e-6,
                                 unsigned threads = 0);

}  // namespace embz::oracle
