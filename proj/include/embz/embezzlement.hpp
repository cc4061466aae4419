#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "embz/models.hpp"
#include "embz/spectrum.hpp"

namespace embz {

/// Resource spectrum phi and target spectrum psi on a d-dimensional system.
struct TargetPair {
  Spectrum phi;
  Spectrum psi;
  unsigned d = 1;
};

TargetPair make_target_pair(Spectrum phi, Spectrum psi, unsigned d);
TargetPair make_target_pair(std::span<const double> phi, std::span<const double> psi, unsigned d);

/// Truncation budget for composite spectra ω⊗φ, ω⊗ψ.
struct ErrorBudget {
  std::size_t max_levels = std::size_t{1} << 16;
  double tail_cap = 1e-4;
};

/// inf_u ‖u(ω⊗φ)u* − ω⊗ψ‖₁ via eigenvalue alignment.
Interval monopartite_error(const Spectrum& omega, const TargetPair& pair, const ErrorBudget& budget = {});

/// min over local unitaries of ‖u_A u_B |Ω⟩|Φ⟩ − |Ω⟩|Ψ⟩‖ = sqrt(2 − 2F).
Interval bipartite_error(const Spectrum& omega, const TargetPair& pair, const ErrorBudget& budget = {});

/// 4 log d / log n.
double vdh_bound(std::uint64_t n, std::uint64_t d);

/// 2(1 − √λ)/(1 + √λ), the worst-case error on a type III_λ factor.
double type_iii_kappa_max(double lambda);

struct SearchConfig {
  unsigned mesh = 8;                  // coarse grid resolution per barycentric coordinate
  std::size_t max_grid_points = 512;  // per side; the mesh is halved until the grid fits
  double min_step = 1e-4;             // pattern search stops below this step
  unsigned refine_starts = 4;         // best grid pairs refined by pattern search
  unsigned random_starts = 2;         // extra seeded starts
  std::uint64_t max_evals = 2'000'000;
  std::uint64_t seed = 7;
  unsigned threads = 0;
};

struct KappaEstimate {
  Interval value;
  unsigned d = 0;
  std::size_t truncation_K = 0;
  TargetPair argmax_pair;
  std::uint64_t search_evals = 0;
};

/// sup over (φ, ψ) on C^d of monopartite_error, estimated by grid plus pattern search.
/// A warm start (padded to d) is always among the refined candidates.
KappaEstimate kappa_estimate(const Spectrum& omega, unsigned d, const SearchConfig& search = {},
                             const ErrorBudget& budget = {}, const TargetPair* warm_start = nullptr);

/// φ pure, ψ uniform on d levels; error ≥ 2(1 − r/d) for an r-atom omega.
TargetPair witness_maximal_error(const Spectrum& omega, unsigned d);

enum class StudyObjective {
  kappa,                  // kappa_estimate at each d
  max_entangled_extraction  // bipartite_error for φ pure, ψ uniform_d
};

struct StudyConfig {
  std::vector<unsigned> d_list;
  std::vector<std::uint64_t> size_list;
  std::vector<std::size_t> k_schedule;  // one per size; the last entry repeats
  double tail_cap = 1e-4;
  SearchConfig search;
  StudyObjective objective = StudyObjective::kappa;
};

struct StudyRow {
  std::uint64_t size = 0;
  unsigned d = 0;
  Interval value;
  std::vector<double> argmax_phi;
  std::vector<double> argmax_psi;
  std::size_t truncation_K = 0;
  std::uint64_t search_evals = 0;
  double runtime_ms = 0.0;
  bool nonmonotone = false;  // step against the sequence trend by more than the interval slack
};

std::vector<StudyRow> convergence_study(const EmbezzlerFamily& family, const StudyConfig& config);

}  // namespace embz
