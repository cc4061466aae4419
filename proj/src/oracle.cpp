#include "embz/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "embz/errors.hpp"
#include "embz/numeric.hpp"

namespace embz::oracle {

namespace {

using Matrix = Eigen::MatrixXcd;
using cd = std::complex<double>;

constexpr double kStateTolerance = 1e-10;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cd(n(rng), n(rng));
  }
  return m;
}

// Haar unitary: QR of a Ginibre matrix with the diagonal phases of R removed.
Matrix haar_unitary(Eigen::Index d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(d, d, rng));
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR();
  for (Eigen::Index k = 0; k < d; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

Matrix random_hermitian(Eigen::Index d, std::mt19937_64& rng) {
  const Matrix g = gaussian(d, d, rng);
  Matrix h = 0.5 * (g + g.adjoint());
  return h / h.norm();
}

// exp(i·t·H) for Hermitian H.
Matrix unitary_exp(const Matrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Eigen::VectorXcd phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k) phases[k] = std::polar(1.0, t * es.eigenvalues()[k]);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// Unitary U maximizing Re tr(U X): with X = W Σ V†, U = V W†.
Matrix polar_maximizer(const Matrix& x) {
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixV() * svd.matrixU().adjoint();
}

Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("Hermitian eigensolver failed");
  return es.eigenvalues();
}

// Eigenvalues of a normalized state; rounding negatives are clamped.
Spectrum spectrum_from_values(std::vector<double> values) {
  for (double& v : values) {
    if (v < -kStateTolerance) throw NumericError("negative eigenvalue " + std::to_string(v));
    v = std::max(v, 0.0);
  }
  return exact_spectrum(values, kStateTolerance);
}

Matrix diagonal_state(const std::vector<double>& w) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(w.size()), static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = w[i];
  return m;
}

std::vector<double> random_simplex(std::size_t d, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(d);
  double total = 0.0;
  for (double& x : w) total += (x = e(rng));
  for (double& x : w) x /= total;
  return w;
}

std::vector<double> kron(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() * b.size());
  for (double x : a) {
    for (double y : b) out.push_back(x * y);
  }
  return out;
}

std::vector<double> padded_weights(const Spectrum& s, std::size_t d) {
  std::vector<double> w = s.weights();
  w.resize(d, 0.0);
  return w;
}

}  // namespace

DenseState DenseState::pure(Eigen::MatrixXcd amplitudes) {
  if (amplitudes.size() == 0) throw ConfigError("empty amplitude matrix");
  if (!amplitudes.allFinite()) throw ConfigError("amplitudes must be finite");
  if (std::abs(amplitudes.squaredNorm() - 1.0) > kStateTolerance) throw ConfigError("amplitudes must have unit norm");
  return DenseState(std::move(amplitudes), true);
}

DenseState DenseState::mixed(Eigen::MatrixXcd rho) {
  if (rho.size() == 0 || rho.rows() != rho.cols()) throw ConfigError("density matrix must be square and nonempty");
  if (!rho.allFinite()) throw ConfigError("density matrix must be finite");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kStateTolerance) throw ConfigError("density matrix not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > kStateTolerance) throw ConfigError("density matrix must have unit trace");
  if (hermitian_eigenvalues(rho).minCoeff() < -kStateTolerance) throw ConfigError("density matrix not PSD");
  return DenseState(std::move(rho), false);
}

Spectrum schmidt_spectrum(const DenseState& state) {
  if (!state.is_pure()) throw ConfigError("schmidt_spectrum needs a pure state");
  Eigen::JacobiSVD<Matrix> svd(state.matrix());
  if (svd.info() != Eigen::Success) throw NumericError("singular value decomposition failed");
  std::vector<double> w;
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
    const double s = svd.singularValues()[k];
    w.push_back(s * s);
  }
  return spectrum_from_values(std::move(w));
}

double min_vector_error_local_unitaries(const DenseState& s1, const DenseState& s2, const SearchOptions& options) {
  if (!s1.is_pure() || !s2.is_pure()) throw ConfigError("vector error needs pure states");
  if (s1.dim_a() != s2.dim_a() || s1.dim_b() != s2.dim_b()) throw ConfigError("state dimensions differ");
  if (s1.dim_a() > 12 || s1.dim_b() > 12) throw ConfigError("vector error oracle limited to 12 per side");
  if (options.restarts < 8) throw ConfigError("vector error oracle needs >= 8 restarts");
  const Matrix& a = s1.matrix();
  const Matrix& b = s2.matrix();
  struct Run {
    Matrix ub;
    double overlap;
    bool converged;
  };
  // Overlap Re tr(S2† uA S1 uBᵀ), maximized alternately over uA and uB.
  auto sweeps = [&](Run& run, std::size_t budget) {
    for (std::size_t k = 0; k < budget && !run.converged; ++k) {
      const Matrix ua = polar_maximizer(a * run.ub.transpose() * b.adjoint());
      run.ub = polar_maximizer(b.adjoint() * ua * a).transpose();
      const double next = (b.adjoint() * ua * a * run.ub.transpose()).trace().real();
      if (next < run.overlap - 1e-12) throw NumericError("alternating maximization decreased the overlap");
      run.converged = next - run.overlap < options.tol;
      run.overlap = std::max(run.overlap, next);
    }
  };
  std::mt19937_64 rng(options.seed);
  std::vector<Run> runs;
  for (unsigned r = 0; r < options.restarts; ++r) {
    Matrix ub = r == 0 ? Matrix::Identity(a.cols(), a.cols()) : haar_unitary(a.cols(), rng);
    runs.push_back({std::move(ub), -std::numeric_limits<double>::infinity(), false});
    sweeps(runs.back(), std::min(options.scout_sweeps, options.max_sweeps));
  }
  auto best = std::max_element(runs.begin(), runs.end(),
                               [](const Run& x, const Run& y) { return x.overlap < y.overlap; });
  sweeps(*best, options.max_sweeps);
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * best->overlap));
}

double trace_norm(const Eigen::MatrixXcd& hermitian) { return hermitian_eigenvalues(hermitian).cwiseAbs().sum(); }

double min_trace_distance_unitary_orbit(const DenseState& a, const DenseState& b, const SearchOptions& options) {
  if (a.is_pure() || b.is_pure()) throw ConfigError("orbit distance needs mixed states");
  if (a.dim_a() != b.dim_a()) throw ConfigError("state dimensions differ");
  if (a.dim_a() > 16) throw ConfigError("orbit distance oracle limited to d <= 16");
  const Matrix& ra = a.matrix();
  const Matrix& rb = b.matrix();
  const Eigen::Index d = ra.rows();

  // Both eigensolvers sort ascending, so V_B V_A† maps the k-th eigenvector of A onto that of B.
  Eigen::SelfAdjointEigenSolver<Matrix> ea(ra);
  Eigen::SelfAdjointEigenSolver<Matrix> eb(rb);
  const Matrix aligned = eb.eigenvectors() * ea.eigenvectors().adjoint();
  auto value = [&](const Matrix& u) { return trace_norm(u * ra * u.adjoint() - rb); };

  double best = value(aligned);
  std::mt19937_64 rng(options.seed);
  for (unsigned r = 0; r < options.restarts; ++r) {
    Matrix u = r == 0 ? aligned : Matrix(unitary_exp(random_hermitian(d, rng), 0.5) * aligned);
    double current = value(u);
    double step = 0.5;
    for (int s = 0; s < 64; ++s) {
      const Matrix trial = unitary_exp(random_hermitian(d, rng), step) * u;
      const double v = value(trial);
      if (v < current) {
        u = trial;
        current = v;
      } else {
        step *= 0.5;
      }
    }
    best = std::min(best, current);
  }
  return best;
}

Spectrum exact_diag_xy(unsigned L, double gamma, double h) {
  if (L < 2 || L > 12 || L % 2 != 0) throw ConfigError("exact_diag_xy needs even L in [2, 12]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!std::isfinite(h)) throw ConfigError("h must be finite");
  constexpr double kBreaking = 1e-8;
  const std::uint32_t states = 1u << L;

  // Bit b of a state is site L-1-b, so site 0 is the most significant bit; bit 0 means spin up.
  auto site_bit = [L](unsigned site) { return 1u << (L - 1 - site); };
  auto sector_of = [&](std::uint32_t s) -> unsigned {
    const unsigned n = static_cast<unsigned>(std::popcount(s));
    return gamma == 0.0 ? n : n % 2;
  };
  const unsigned sectors = gamma == 0.0 ? L + 1 : 2;

  struct Candidate {
    double energy;
    unsigned sector;
  };
  std::vector<Candidate> lowest;
  Eigen::VectorXd ground;
  double ground_energy = std::numeric_limits<double>::infinity();
  std::vector<std::uint32_t> ground_basis;

  for (unsigned sector = 0; sector < sectors; ++sector) {
    std::vector<std::uint32_t> basis;
    std::vector<std::int64_t> index(states, -1);
    for (std::uint32_t s = 0; s < states; ++s) {
      if (sector_of(s) == sector) {
        index[s] = static_cast<std::int64_t>(basis.size());
        basis.push_back(s);
      }
    }
    const auto n = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd hm = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const std::uint32_t s = basis[static_cast<std::size_t>(k)];
      double diag = 0.0;
      for (unsigned j = 0; j < L; ++j) {
        const double z = (s & site_bit(j)) ? -1.0 : 1.0;
        diag += (kBreaking - h) * z;
      }
      hm(k, k) = diag;
      for (unsigned j = 0; j + 1 < L; ++j) {
        const std::uint32_t flip = site_bit(j) | site_bit(j + 1);
        const bool equal = ((s & site_bit(j)) != 0) == ((s & site_bit(j + 1)) != 0);
        // σxσx flips both spins with +1; σyσy flips with −1 on equal spins and +1 otherwise.
        const double amp = -(0.5 * (1.0 + gamma) + 0.5 * (1.0 - gamma) * (equal ? -1.0 : 1.0));
        hm(index[s ^ flip], k) += amp;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hm);
    if (es.info() != Eigen::Success) throw NumericError("dense eigensolver failed in sector " + std::to_string(sector));
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(2, n); ++k) lowest.push_back({es.eigenvalues()[k], sector});
    if (es.eigenvalues()[0] < ground_energy) {
      ground_energy = es.eigenvalues()[0];
      ground = es.eigenvectors().col(0);
      ground_basis = basis;
    }
  }
  std::sort(lowest.begin(), lowest.end(), [](const Candidate& x, const Candidate& y) { return x.energy < y.energy; });
  if (lowest.size() > 1 && lowest[1].energy - lowest[0].energy < 1e-12) {
    throw NumericError("ground state degenerate within 1e-12 after symmetry breaking");
  }

  const unsigned half = L / 2;
  const auto side = static_cast<Eigen::Index>(1u << half);
  Eigen::MatrixXd amp = Eigen::MatrixXd::Zero(side, side);
  for (std::size_t k = 0; k < ground_basis.size(); ++k) {
    const std::uint32_t s = ground_basis[k];
    amp(s >> half, s & ((1u << half) - 1)) = ground[static_cast<Eigen::Index>(k)];
  }
  const Eigen::MatrixXd rho = amp * amp.transpose();
  if (std::abs(rho.trace() - 1.0) > 1e-12) throw NumericError("partial trace lost normalization");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("reduced-state eigensolver failed");
  std::vector<double> w(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return spectrum_from_values(std::move(w));
}

ImplicationReport monopartite_to_bipartite_check(const Spectrum& omega, const TargetPair& pair, double tol,
                                                 std::uint64_t seed) {
  if (!omega.exact()) throw ConfigError("implication check needs an exact omega");
  const std::size_t r = omega.atom_count();
  const std::size_t d = pair.d;
  const std::size_t n = r * d;
  if (n > 12) throw ConfigError("implication check limited to 12 levels per side");
  const std::vector<double> a = kron(omega.weights(), padded_weights(pair.phi, d));
  const std::vector<double> b = kron(omega.weights(), padded_weights(pair.psi, d));
  const auto dim = static_cast<Eigen::Index>(n);

  std::mt19937_64 rng(seed);
  const Matrix u1 = haar_unitary(dim, rng);
  const Matrix u2 = haar_unitary(dim, rng);
  const DenseState rho_a = DenseState::mixed(u1 * diagonal_state(a) * u1.adjoint());
  const DenseState rho_b = DenseState::mixed(u2 * diagonal_state(b) * u2.adjoint());

  // Purifications Σ√p_k e_k⊗e_k under independent local unitaries on each side.
  auto purification = [&](const std::vector<double>& p) {
    Matrix m = Matrix::Zero(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) m(k, k) = std::sqrt(p[static_cast<std::size_t>(k)]);
    const Matrix left = haar_unitary(dim, rng);
    const Matrix right = haar_unitary(dim, rng);
    Matrix s = left * m * right.transpose();
    s /= s.norm();
    return DenseState::pure(std::move(s));
  };
  const DenseState psi_a = purification(a);
  const DenseState psi_b = purification(b);

  const SearchOptions options{8, 1e-15, splitmix(seed), 50, 2000};
  ImplicationReport out;
  out.trace_error = min_trace_distance_unitary_orbit(rho_a, rho_b, options);
  out.vector_error = min_vector_error_local_unitaries(psi_a, psi_b, options);
  out.pass = out.vector_error <= std::sqrt(out.trace_error) + tol;
  return out;
}

void to_json(nlohmann::json& j, const OracleReport& r) {
  j = nlohmann::json{{"op", r.op},
                     {"seed", r.seed},
                     {"instances", r.instances},
                     {"max_abs_deviation", r.max_abs_deviation},
                     {"pass", r.pass}};
}

namespace {

OracleReport run_suite(std::string op, std::size_t instances, std::uint64_t seed, double tol, unsigned threads,
                       const std::function<double(std::mt19937_64&, std::uint64_t)>& instance) {
  std::vector<double> deviation(instances, 0.0);
  parallel_for(instances, threads, [&](std::size_t i) {
    const std::uint64_t s = splitmix(seed ^ splitmix(i));
    std::mt19937_64 rng(s);
    deviation[i] = instance(rng, splitmix(s));
  });
  OracleReport report{std::move(op), seed, instances, 0.0, true};
  for (double v : deviation) report.max_abs_deviation = std::max(report.max_abs_deviation, v);
  report.pass = report.max_abs_deviation <= tol;
  return report;
}

}  // namespace

OracleReport certify_pure_pairs(std::size_t instances, std::uint64_t seed, double tol, unsigned threads) {
  return run_suite("min_vector_error_local_unitaries", instances, seed, tol, threads,
                   [](std::mt19937_64& rng, std::uint64_t sub) {
                     std::uniform_int_distribution<int> dim(2, 4);
                     const int da = dim(rng);
                     const int db = dim(rng);
                     Matrix m1 = gaussian(da, db, rng);
                     Matrix m2 = gaussian(da, db, rng);
                     const DenseState s1 = DenseState::pure(m1 / m1.norm());
                     const DenseState s2 = DenseState::pure(m2 / m2.norm());
                     const double oracle = min_vector_error_local_unitaries(s1, s2, {8, 1e-14, sub});
                     const double f = fidelity_sorted(schmidt_spectrum(s1), schmidt_spectrum(s2)).lo;
                     return std::abs(oracle - std::sqrt(std::max(0.0, 2.0 - 2.0 * f)));
                   });
}

OracleReport certify_mixed_pairs(std::size_t instances, std::uint64_t seed, double tol, unsigned threads) {
  return run_suite("min_trace_distance_unitary_orbit", instances, seed, tol, threads,
                   [](std::mt19937_64& rng, std::uint64_t sub) {
                     std::uniform_int_distribution<int> dim(2, 6);
                     const int d = dim(rng);
                     auto random_rho = [&] {
                       std::uniform_int_distribution<int> rank(1, d);
                       const Matrix g = gaussian(d, rank(rng), rng);
                       Matrix rho = g * g.adjoint();
                       rho /= rho.trace().real();
                       return DenseState::mixed(0.5 * (rho + rho.adjoint()));
                     };
                     const DenseState a = random_rho();
                     const DenseState b = random_rho();
                     const double oracle = min_trace_distance_unitary_orbit(a, b, {8, 1e-14, sub});
                     auto eig = [](const DenseState& s) {
                       const Eigen::VectorXd e = hermitian_eigenvalues(s.matrix());
                       return spectrum_from_values(std::vector<double>(e.data(), e.data() + e.size()));
                     };
                     return std::abs(oracle - l1_sorted(eig(a), eig(b)).lo);
                   });
}

OracleReport certify_implication(std::size_t instances, std::uint64_t seed, double tol, unsigned threads) {
  return run_suite("monopartite_to_bipartite_check", instances, seed, tol, threads,
                   [tol](std::mt19937_64& rng, std::uint64_t sub) {
                     std::uniform_int_distribution<int> rdist(1, 3);
                     std::uniform_int_distribution<int> ddist(2, 4);
                     int r = rdist(rng);
                     const int d = ddist(rng);
                     while (r * d > 8) --r;
                     const Spectrum omega = exact_spectrum(random_simplex(static_cast<std::size_t>(r), rng));
                     const TargetPair pair = make_target_pair(random_simplex(static_cast<std::size_t>(d), rng),
                                                              random_simplex(static_cast<std::size_t>(d), rng),
                                                              static_cast<unsigned>(d));
                     const ImplicationReport rep = monopartite_to_bipartite_check(omega, pair, tol, sub);
                     return std::max(0.0, rep.vector_error - std::sqrt(rep.trace_error));
                   });
}

}  // namespace embz::oracle
