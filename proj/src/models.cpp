#include "embz/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "embz/errors.hpp"
#include "embz/numeric.hpp"

namespace embz {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
}

// Σ_{k=1}^{n} cos(k x)
double dirichlet_cos_sum(unsigned n, double x) {
  const double half = 0.5 * x;
  const double s = std::sin(half);
  if (std::abs(s) < 1e-300) return static_cast<double>(n);
  return std::sin(n * half) * std::cos((n + 1) * half) / s;
}

Eigen::MatrixXd open_chain_hopping_correlations(unsigned L, double h) {
  const double a = std::numbers::pi / (L + 1);
  unsigned filled = 0;
  for (unsigned k = 1; k <= L; ++k) {
    if (std::cos(a * k) > h) ++filled;
  }
  Eigen::MatrixXd c(L, L);
  const double norm = 1.0 / (L + 1);
  for (unsigned i = 1; i <= L; ++i) {
    for (unsigned j = i; j <= L; ++j) {
      const double diff = i == j ? static_cast<double>(filled)
                                 : dirichlet_cos_sum(filled, a * static_cast<double>(j - i));
      const double v = norm * (diff - dirichlet_cos_sum(filled, a * static_cast<double>(i + j)));
      c(i - 1, j - 1) = v;
      c(j - 1, i - 1) = v;
    }
  }
  return c;
}

// Fourier coefficients g_l, |l| < L, of (cos φ − h − iγ sin φ)/|·| by the
// trapezoid rule, doubling nodes until the coefficients settle.
std::vector<double> bogoliubov_coefficients(unsigned L, double gamma, double h) {
  const int span = static_cast<int>(L) - 1;
  auto evaluate = [&](std::size_t nodes) {
    std::vector<double> g(2 * L - 1, 0.0);
    for (std::size_t n = 0; n < nodes; ++n) {
      const double phi = 2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(nodes);
      const double re = std::cos(phi) - h;
      const double im = -gamma * std::sin(phi);
      const double mod = std::hypot(re, im);
      if (mod < 1e-300) continue;
      for (int l = -span; l <= span; ++l) {
        g[l + span] += std::cos(l * phi) * re / mod + std::sin(l * phi) * im / mod;
      }
    }
    for (double& x : g) x /= static_cast<double>(nodes);
    return g;
  };
  std::size_t nodes = 4096;
  std::vector<double> prev = evaluate(nodes);
  for (int round = 0; round < 10; ++round) {
    nodes *= 2;
    std::vector<double> next = evaluate(nodes);
    double change = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) change = std::max(change, std::abs(next[i] - prev[i]));
    if (change < 1e-12) return next;
    prev = std::move(next);
  }
  throw NumericError("Bogoliubov symbol quadrature did not converge (gamma=" + std::to_string(gamma) +
                     ", h=" + std::to_string(h) + ")");
}

}  // namespace

void validate(const EmbezzlerFamily& family) {
  std::visit(Overloaded{
                 [](const VanDamHayden& f) {
                   if (f.n < 1) throw ConfigError("van Dam-Hayden family needs n >= 1");
                 },
                 [](const Geometric& f) {
                   check_lambda(f.lambda);
                   if (f.sites < 1) throw ConfigError("geometric family needs at least one site");
                 },
                 [](const ArakiWoods& f) {
                   if (f.lambdas.empty()) throw ConfigError("Araki-Woods family needs a nonempty lambda list");
                   for (double l : f.lambdas) check_lambda(l);
                 },
                 [](const XYChain& f) {
                   if (f.L < 2 || f.L % 2 != 0 || f.L > 4096) throw ConfigError("XY chain needs even L in [2, 4096]");
                   if (!(f.gamma >= 0.0 && f.gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
                   if (!std::isfinite(f.h)) throw ConfigError("h must be finite");
                 },
             },
             family);
}

std::string family_name(const EmbezzlerFamily& family) {
  return std::visit(Overloaded{
                        [](const VanDamHayden&) { return std::string("vdh"); },
                        [](const Geometric&) { return std::string("geometric"); },
                        [](const ArakiWoods&) { return std::string("araki-woods"); },
                        [](const XYChain&) { return std::string("xy"); },
                    },
                    family);
}

EmbezzlerFamily with_size(const EmbezzlerFamily& family, std::uint64_t size) {
  return std::visit(Overloaded{
                        [&](VanDamHayden f) -> EmbezzlerFamily {
                          f.n = size;
                          return f;
                        },
                        [&](Geometric f) -> EmbezzlerFamily {
                          f.sites = static_cast<unsigned>(size);
                          return f;
                        },
                        [&](const ArakiWoods& f) -> EmbezzlerFamily {
                          ArakiWoods out;
                          if (f.lambdas.empty()) return out;
                          for (std::uint64_t i = 0; i < size; ++i) out.lambdas.push_back(f.lambdas[i % f.lambdas.size()]);
                          return out;
                        },
                        [&](XYChain f) -> EmbezzlerFamily {
                          f.L = static_cast<unsigned>(size);
                          return f;
                        },
                    },
                    family);
}

std::uint64_t family_size(const EmbezzlerFamily& family) {
  return std::visit(Overloaded{
                        [](const VanDamHayden& f) -> std::uint64_t { return f.n; },
                        [](const Geometric& f) -> std::uint64_t { return f.sites; },
                        [](const ArakiWoods& f) -> std::uint64_t { return f.lambdas.size(); },
                        [](const XYChain& f) -> std::uint64_t { return f.L; },
                    },
                    family);
}

Spectrum family_spectrum(const EmbezzlerFamily& family, std::size_t max_levels) {
  validate(family);
  return std::visit(Overloaded{
                        [&](const VanDamHayden& f) { return truncate(van_dam_hayden_spectrum(f.n), max_levels); },
                        [&](const Geometric& f) { return tensor_power(geometric_site(f.lambda), f.sites, max_levels); },
                        [&](const ArakiWoods& f) { return araki_woods_spectrum(f.lambdas, max_levels); },
                        [&](const XYChain& f) { return xy_half_chain_spectrum(f.L, f.gamma, f.h, max_levels); },
                    },
                    family);
}

Spectrum van_dam_hayden_spectrum(std::uint64_t n) {
  if (n < 1) throw ConfigError("van Dam-Hayden spectrum needs n >= 1");
  CompensatedSum harmonic;
  for (std::uint64_t j = n; j >= 1; --j) harmonic += 1.0 / static_cast<double>(j);
  const double hn = harmonic.value();
  std::vector<Level> levels;
  levels.reserve(n);
  for (std::uint64_t j = 1; j <= n; ++j) levels.push_back({1.0 / (static_cast<double>(j) * hn), 1});
  return Spectrum::from_levels(std::move(levels), 0.0, 0.0);
}

Spectrum geometric_site(double lambda) {
  check_lambda(lambda);
  if (lambda == 0.0) return Spectrum{};
  if (lambda == 1.0) return Spectrum::uniform(2);
  const double top = 1.0 / (1.0 + lambda);
  return Spectrum::from_levels({{top, 1}, {1.0 - top, 1}}, 0.0, 0.0);
}

Spectrum araki_woods_spectrum(std::span<const double> lambdas, std::size_t max_levels) {
  if (max_levels == 0) throw ConfigError("truncation budget must be >= 1");
  for (double l : lambdas) check_lambda(l);
  const std::size_t inner = max_levels * kOversampling;
  Spectrum acc;
  for (double l : lambdas) {
    if (l == 0.0) continue;
    acc = tensor(acc, geometric_site(l), inner);
  }
  return truncate(acc, max_levels);
}

Eigen::MatrixXd xy_correlation_matrix(unsigned L, double gamma, double h) {
  validate(XYChain{L, gamma, h});
  if (gamma == 0.0) return open_chain_hopping_correlations(L, h);

  const std::vector<double> g = bogoliubov_coefficients(L, gamma, h);
  const int span = static_cast<int>(L) - 1;
  auto coeff = [&](int l) { return g[l + span]; };
  Eigen::MatrixXd gamma_matrix = Eigen::MatrixXd::Zero(2 * L, 2 * L);
  for (int i = 0; i < static_cast<int>(L); ++i) {
    for (int j = 0; j < static_cast<int>(L); ++j) {
      const int l = i - j;
      gamma_matrix(2 * i, 2 * j + 1) = coeff(l);
      gamma_matrix(2 * i + 1, 2 * j) = -coeff(-l);
    }
  }
  return gamma_matrix;
}

ModeOccupations half_chain_occupations(const Eigen::MatrixXd& correlations, unsigned L) {
  if (L < 2 || L % 2 != 0) throw ConfigError("half-chain cut needs even L >= 2");
  constexpr double tol = 1e-8;
  const unsigned half = L / 2;
  ModeOccupations out;
  if (correlations.rows() == L && correlations.cols() == L) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(correlations.topLeftCorner(half, half),
                                                          Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericError("correlation-matrix eigensolver failed");
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
      const double v = solver.eigenvalues()[k];
      if (v < -tol || v > 1.0 + tol) throw NumericError("mode occupation outside [0, 1]: " + std::to_string(v));
      out.nu.push_back(std::clamp(v, 0.0, 1.0));
    }
    return out;
  }
  if (correlations.rows() == 2 * L && correlations.cols() == 2 * L) {
    const Eigen::MatrixXd block = correlations.topLeftCorner(L, L);
    const Eigen::MatrixXd sq = block.transpose() * block;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sq, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericError("Majorana covariance eigensolver failed");
    std::vector<double> s2(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
    std::sort(s2.begin(), s2.end(), std::greater<>());
    for (std::size_t k = 0; k < s2.size(); k += 2) {
      const double s = std::sqrt(std::max(0.0, s2[k]));
      if (s > 1.0 + tol) throw NumericError("Majorana covariance eigenvalue exceeds 1");
      out.nu.push_back(0.5 * (1.0 + std::min(s, 1.0)));
    }
    return out;
  }
  throw ConfigError("correlation matrix has wrong shape for L=" + std::to_string(L));
}

Spectrum occupations_to_spectrum(const ModeOccupations& modes, std::size_t max_levels) {
  if (max_levels == 0) throw ConfigError("truncation budget must be >= 1");
  std::vector<double> minority;
  for (double nu : modes.nu) {
    const double m = std::min(nu, 1.0 - nu);
    if (m >= kModeDropThreshold) minority.push_back(m);
  }
  std::sort(minority.begin(), minority.end(), std::greater<>());
  const std::size_t inner = max_levels * kOversampling;
  Spectrum acc;
  for (double m : minority) {
    const Spectrum factor = m == 0.5 ? Spectrum::uniform(2) : Spectrum::from_levels({{1.0 - m, 1}, {m, 1}}, 0.0, 0.0);
    acc = tensor(acc, factor, inner);
  }
  return truncate(acc, max_levels);
}

Spectrum xy_half_chain_spectrum(unsigned L, double gamma, double h, std::size_t max_levels) {
  return occupations_to_spectrum(half_chain_occupations(xy_correlation_matrix(L, gamma, h), L), max_levels);
}

}  // namespace embz
