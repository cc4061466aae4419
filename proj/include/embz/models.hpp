#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "embz/spectrum.hpp"

namespace embz {

/// Squared Schmidt coefficients ∝ 1/j, j = 1..n.
struct VanDamHayden {
  std::uint64_t n = 2;
};

/// Constant-λ product chain on `sites` sites.
struct Geometric {
  double lambda = 0.5;
  unsigned sites = 1;
};

/// Product chain with per-site λ_j. Sizes longer than the list cycle through it.
struct ArakiWoods {
  std::vector<double> lambdas;
};

/// Open XY chain of L sites, cut at the midpoint.
struct XYChain {
  unsigned L = 2;
  double gamma = 0.0;
  double h = 0.0;
};

using EmbezzlerFamily = std::variant<VanDamHayden, Geometric, ArakiWoods, XYChain>;

void validate(const EmbezzlerFamily& family);
std::string family_name(const EmbezzlerFamily& family);

/// Same family with its size parameter replaced (n, sites, list length, or L).
EmbezzlerFamily with_size(const EmbezzlerFamily& family, std::uint64_t size);
std::uint64_t family_size(const EmbezzlerFamily& family);

Spectrum family_spectrum(const EmbezzlerFamily& family, std::size_t max_levels);

Spectrum van_dam_hayden_spectrum(std::uint64_t n);

/// (1/(1+λ), λ/(1+λ)); λ = 0 gives the pure spectrum.
Spectrum geometric_site(double lambda);

Spectrum araki_woods_spectrum(std::span<const double> lambdas, std::size_t max_levels);

/// Ground-state correlations. gamma == 0: L×L matrix ⟨c†_i c_j⟩ of the open
/// chain. gamma > 0: 2L×2L Majorana covariance of an L-site window of the
/// infinite chain.
Eigen::MatrixXd xy_correlation_matrix(unsigned L, double gamma, double h);

struct ModeOccupations {
  std::vector<double> nu;
};

ModeOccupations half_chain_occupations(const Eigen::MatrixXd& correlations, unsigned L);

/// Modes with min(ν, 1−ν) below this are treated as exact factors of 1.
inline constexpr double kModeDropThreshold = 1e-12;

Spectrum occupations_to_spectrum(const ModeOccupations& modes, std::size_t max_levels);

Spectrum xy_half_chain_spectrum(unsigned L, double gamma, double h, std::size_t max_levels);

}  // namespace embz
