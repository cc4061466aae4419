#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace embz {

/// A run of `count` equal atoms of size `weight`.
struct Level {
  double weight = 0.0;
  std::uint64_t count = 1;

  friend bool operator==(const Level&, const Level&) = default;
};

/// Value with certified lower and upper bounds.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] double width() const noexcept { return hi - lo; }
  [[nodiscard]] double mid() const noexcept { return 0.5 * (lo + hi); }
  [[nodiscard]] bool contains(double x, double slack = 0.0) const noexcept {
    return x >= lo - slack && x <= hi + slack;
  }
};

Interval make_interval(double lo, double hi);

/// Sorted probability spectrum (squared Schmidt coefficients or density
/// eigenvalues) with certified truncation tail.
///
/// Atoms are stored as nonincreasing runs. Mass that was discarded by
/// truncation is tracked in tail_mass; no discarded atom exceeds
/// tail_atom_bound, and tail_atom_bound never exceeds the smallest kept atom,
/// so the kept runs are always a prefix of the true sorted spectrum.
class Spectrum {
 public:
  /// The pure state, a single atom of weight 1.
  Spectrum();

  /// Validates and adopts runs. Throws NumericError if invariants fail.
  static Spectrum from_levels(std::vector<Level> levels, double tail_mass, double tail_atom_bound);
  static Spectrum uniform(std::uint64_t n);

  [[nodiscard]] std::span<const Level> levels() const noexcept { return levels_; }
  [[nodiscard]] std::size_t level_count() const noexcept { return levels_.size(); }
  [[nodiscard]] std::uint64_t atom_count() const noexcept { return atoms_; }
  [[nodiscard]] double tail_mass() const noexcept { return tail_mass_; }
  [[nodiscard]] double tail_atom_bound() const noexcept { return tail_atom_bound_; }
  [[nodiscard]] double kept_mass() const noexcept { return kept_mass_; }
  [[nodiscard]] double max_weight() const noexcept { return levels_.empty() ? 0.0 : levels_.front().weight; }
  [[nodiscard]] double min_weight() const noexcept { return levels_.empty() ? 0.0 : levels_.back().weight; }
  [[nodiscard]] bool exact() const noexcept { return tail_mass_ == 0.0; }

  /// Expanded weight sequence. Throws ConfigError above max_atoms.
  [[nodiscard]] std::vector<double> weights(std::uint64_t max_atoms = std::uint64_t{1} << 26) const;

  friend bool operator==(const Spectrum&, const Spectrum&) = default;

 private:
  std::vector<Level> levels_;
  double tail_mass_ = 0.0;
  double tail_atom_bound_ = 0.0;
  double kept_mass_ = 0.0;
  std::uint64_t atoms_ = 0;
};

/// Mass-invariant tolerance enforced by Spectrum::from_levels.
inline constexpr double kMassTolerance = 1e-10;
/// Relative gap below which adjacent products are merged into one run.
inline constexpr double kCoalesceTolerance = 1e-13;
/// Oversampling factor for intermediate truncations.
inline constexpr std::size_t kOversampling = 4;

Spectrum make_spectrum(std::span<const double> raw, double tol = 1e-9);

/// Exact (zero-tail) spectrum from a finite distribution: zeros dropped,
/// entries rescaled to unit mass. For targets and dense-state eigenvalues.
Spectrum exact_spectrum(std::span<const double> raw, double tol = 1e-9);

/// Keeps the first `max_levels` runs.
Spectrum truncate(const Spectrum& p, std::size_t max_levels);

/// Largest K runs of p⊗q, by best-first search over the product grid.
Spectrum tensor(const Spectrum& p, const Spectrum& q, std::size_t max_levels);

/// p^{⊗m} by iterated tensor, intermediate results kept at kOversampling·K runs.
Spectrum tensor_power(const Spectrum& p, unsigned m, std::size_t max_levels);

/// Σ|p↓ − q↓| with zero padding; widened by both tails and clamped to [0, 2].
Interval l1_sorted(const Spectrum& p, const Spectrum& q);

/// Σ√(p↓ q↓); the upper end carries the Cauchy–Schwarz tail allowance.
Interval fidelity_sorted(const Spectrum& p, const Spectrum& q);

/// Σ(√p↓ − √q↓)² over kept atoms (zero padded), evaluated termwise as
/// |p−q|·|√p−√q|/(√p+√q) so each term is bounded by |p−q| in floating point.
double hellinger_sq_sorted(const Spectrum& p, const Spectrum& q);

/// Plain Σ|p↓ − q↓| over kept atoms, same summation order as hellinger_sq_sorted.
double l1_kept(const Spectrum& p, const Spectrum& q);

void to_json(nlohmann::json& j, const Spectrum& s);
void from_json(const nlohmann::json& j, Spectrum& s);
void to_json(nlohmann::json& j, const Interval& v);

}  // namespace embz
