#include "embz/embezzlement.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "embz/errors.hpp"
#include "embz/numeric.hpp"

namespace embz {

namespace {

void check_tail(const Spectrum& s, const ErrorBudget& budget, const char* what) {
  if (s.tail_mass() > budget.tail_cap) {
    throw BudgetError(std::string(what) + " tail mass " + std::to_string(s.tail_mass()) + " exceeds cap " +
                      std::to_string(budget.tail_cap) + " at K=" + std::to_string(budget.max_levels));
  }
}

std::pair<Spectrum, Spectrum> composites(const Spectrum& omega, const TargetPair& pair, const ErrorBudget& budget) {
  check_tail(omega, budget, "embezzler");
  Spectrum a = tensor(omega, pair.phi, budget.max_levels);
  check_tail(a, budget, "omega (x) phi");
  Spectrum b = tensor(omega, pair.psi, budget.max_levels);
  check_tail(b, budget, "omega (x) psi");
  return {std::move(a), std::move(b)};
}

// Sorted chamber of the d-simplex: vertex k is uniform on the first k+1 levels.
std::vector<double> chamber_point(std::span<const double> bary) {
  const std::size_t d = bary.size();
  std::vector<double> x(d, 0.0);
  double acc = 0.0;
  for (std::size_t k = d; k-- > 0;) {
    acc += bary[k] / static_cast<double>(k + 1);
    x[k] = acc;
  }
  return x;
}

std::vector<double> to_barycentric(const Spectrum& s, unsigned d) {
  std::vector<double> x = s.weights();
  x.resize(d, 0.0);
  std::vector<double> bary(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    const double next = k + 1 < d ? x[k + 1] : 0.0;
    bary[k] = std::max(0.0, static_cast<double>(k + 1) * (x[k] - next));
  }
  const double total = std::accumulate(bary.begin(), bary.end(), 0.0);
  for (double& b : bary) b /= total;
  return bary;
}

Spectrum chamber_spectrum(std::span<const double> bary) {
  const std::vector<double> x = chamber_point(bary);
  return exact_spectrum(x);
}

double binomial_estimate(unsigned n, unsigned k) {
  double out = 1.0;
  for (unsigned i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

void compositions(unsigned total, unsigned parts, std::vector<unsigned>& current,
                  std::vector<std::vector<unsigned>>& out) {
  if (parts == 1) {
    current.push_back(total);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (unsigned first = total + 1; first-- > 0;) {
    current.push_back(first);
    compositions(total - first, parts - 1, current, out);
    current.pop_back();
  }
}

struct Candidate {
  std::vector<double> phi;
  std::vector<double> psi;
  double value = -1.0;
};

class Objective {
 public:
  Objective(const Spectrum& omega, const ErrorBudget& budget) : omega_(omega), budget_(budget) {}

  Spectrum side(std::span<const double> bary) const {
    Spectrum t = tensor(omega_, chamber_spectrum(bary), budget_.max_levels);
    check_tail(t, budget_, "omega (x) target");
    return t;
  }
  double value(const Spectrum& a, const Spectrum& b) const {
    evals_.fetch_add(1, std::memory_order_relaxed);
    return l1_sorted(a, b).lo;
  }
  std::uint64_t evals() const { return evals_.load(); }

 private:
  const Spectrum& omega_;
  ErrorBudget budget_;
  mutable std::atomic<std::uint64_t> evals_{0};
};

bool improves(double candidate, double incumbent) { return candidate > incumbent + 1e-14 * (1.0 + incumbent); }

Candidate pattern_search(const Objective& objective, Candidate start, double step, const SearchConfig& search) {
  std::array<std::vector<double>*, 2> sides{&start.phi, &start.psi};
  std::array<Spectrum, 2> composite{objective.side(start.phi), objective.side(start.psi)};
  start.value = objective.value(composite[0], composite[1]);
  const std::size_t d = start.phi.size();
  while (step >= search.min_step && objective.evals() < search.max_evals) {
    bool improved = false;
    for (int s = 0; s < 2; ++s) {
      std::vector<double>& x = *sides[s];
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          if (i == j || x[i] <= 0.0) continue;
          const double t = std::min(step, x[i]);
          std::vector<double> y = x;
          y[i] -= t;
          if (y[i] < 1e-15) y[i] = 0.0;
          y[j] += t;
          Spectrum trial = objective.side(y);
          const double v = s == 0 ? objective.value(trial, composite[1]) : objective.value(composite[0], trial);
          if (improves(v, start.value)) {
            x = std::move(y);
            composite[s] = std::move(trial);
            start.value = v;
            improved = true;
          }
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return start;
}

}  // namespace

TargetPair make_target_pair(Spectrum phi, Spectrum psi, unsigned d) {
  if (d < 1) throw ConfigError("target dimension must be >= 1");
  if (!phi.exact() || !psi.exact()) throw ConfigError("target spectra must be exact (zero tail)");
  if (phi.atom_count() > d || psi.atom_count() > d) throw ConfigError("target spectrum has more atoms than d");
  return {std::move(phi), std::move(psi), d};
}

TargetPair make_target_pair(std::span<const double> phi, std::span<const double> psi, unsigned d) {
  return make_target_pair(exact_spectrum(phi), exact_spectrum(psi), d);
}

Interval monopartite_error(const Spectrum& omega, const TargetPair& pair, const ErrorBudget& budget) {
  const auto [a, b] = composites(omega, pair, budget);
  return l1_sorted(a, b);
}

Interval bipartite_error(const Spectrum& omega, const TargetPair& pair, const ErrorBudget& budget) {
  const auto [a, b] = composites(omega, pair, budget);
  const Interval fidelity = fidelity_sorted(a, b);
  // 2 − 2F_lo = Σ(√a − √b)² over kept atoms plus both tails.
  const double hi_sq = hellinger_sq_sorted(a, b) + a.tail_mass() + b.tail_mass();
  const double lo_sq = std::max(0.0, hi_sq - 2.0 * (fidelity.hi - fidelity.lo));
  return make_interval(std::min(std::sqrt(lo_sq), 2.0), std::min(std::sqrt(hi_sq), 2.0));
}

double vdh_bound(std::uint64_t n, std::uint64_t d) {
  if (n < 2 || d < 2) throw ConfigError("vdh_bound needs n >= 2 and d >= 2");
  return 4.0 * std::log(static_cast<double>(d)) / std::log(static_cast<double>(n));
}

double type_iii_kappa_max(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  const double r = std::sqrt(lambda);
  return 2.0 * (1.0 - r) / (1.0 + r);
}

KappaEstimate kappa_estimate(const Spectrum& omega, unsigned d, const SearchConfig& search, const ErrorBudget& budget,
                             const TargetPair* warm_start) {
  if (d < 2) throw ConfigError("kappa_estimate needs d >= 2");
  if (search.mesh < 1) throw ConfigError("search mesh must be >= 1");
  check_tail(omega, budget, "embezzler");
  const Objective objective(omega, budget);

  unsigned mesh = search.mesh;
  while (mesh > 1 && binomial_estimate(mesh + d - 1, d - 1) > static_cast<double>(search.max_grid_points)) mesh /= 2;
  std::vector<std::vector<unsigned>> grid;
  std::vector<unsigned> scratch;
  compositions(mesh, d, scratch, grid);

  std::vector<std::vector<double>> points(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    points[g].resize(d);
    for (unsigned k = 0; k < d; ++k) points[g][k] = static_cast<double>(grid[g][k]) / mesh;
  }
  std::vector<Spectrum> sides(grid.size());
  parallel_for(grid.size(), search.threads, [&](std::size_t g) { sides[g] = objective.side(points[g]); });

  const std::size_t n = grid.size();
  std::vector<double> values(n * n);
  parallel_for(n, search.threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) values[i * n + j] = objective.value(sides[i], sides[j]);
  });

  std::vector<std::size_t> order(n * n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t top = std::min<std::size_t>(search.refine_starts, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                    [&](std::size_t a, std::size_t b) { return values[a] != values[b] ? values[a] > values[b] : a < b; });

  std::vector<Candidate> starts;
  for (std::size_t r = 0; r < top; ++r) {
    starts.push_back({points[order[r] / n], points[order[r] % n], values[order[r]]});
  }
  if (warm_start != nullptr) {
    if (warm_start->d > d) throw ConfigError("warm start dimension exceeds d");
    starts.push_back({to_barycentric(warm_start->phi, d), to_barycentric(warm_start->psi, d), -1.0});
  }
  std::mt19937_64 rng(search.seed ^ (0x9e3779b97f4a7c15ULL * d));
  std::exponential_distribution<double> expo(1.0);
  for (unsigned r = 0; r < search.random_starts; ++r) {
    Candidate c;
    for (auto* side : {&c.phi, &c.psi}) {
      side->resize(d);
      for (double& x : *side) x = expo(rng);
      const double total = std::accumulate(side->begin(), side->end(), 0.0);
      for (double& x : *side) x /= total;
    }
    starts.push_back(std::move(c));
  }

  const double step0 = 1.0 / std::max(mesh, 2u);
  std::vector<Candidate> refined(starts.size());
  parallel_for(starts.size(), search.threads,
               [&](std::size_t s) { refined[s] = pattern_search(objective, starts[s], step0, search); });

  std::size_t best = 0;
  for (std::size_t s = 1; s < refined.size(); ++s) {
    if (refined[s].value > refined[best].value) best = s;
  }
  const std::vector<double> phi = chamber_point(refined[best].phi);
  const std::vector<double> psi = chamber_point(refined[best].psi);
  KappaEstimate out;
  out.argmax_pair = make_target_pair(phi, psi, d);
  out.value = monopartite_error(omega, out.argmax_pair, budget);
  out.d = d;
  out.truncation_K = budget.max_levels;
  out.search_evals = objective.evals() + 1;
  return out;
}

TargetPair witness_maximal_error(const Spectrum& omega, unsigned d) {
  if (!omega.exact()) throw ConfigError("witness needs an exact (untruncated) embezzler spectrum");
  if (d <= omega.atom_count()) {
    throw ConfigError("witness needs d > atom count (" + std::to_string(omega.atom_count()) + ")");
  }
  return make_target_pair(Spectrum{}, Spectrum::uniform(d), d);
}

std::vector<StudyRow> convergence_study(const EmbezzlerFamily& family, const StudyConfig& config) {
  auto strictly_increasing = [](const auto& v) {
    return !v.empty() && std::adjacent_find(v.begin(), v.end(), [](auto a, auto b) { return a >= b; }) == v.end();
  };
  if (!strictly_increasing(config.d_list)) throw ConfigError("d_list must be nonempty and strictly increasing");
  if (!strictly_increasing(config.size_list)) throw ConfigError("size_list must be nonempty and strictly increasing");
  if (config.k_schedule.empty()) throw ConfigError("K schedule must be nonempty");
  if (config.d_list.front() < 2) throw ConfigError("d must be >= 2");

  std::vector<StudyRow> rows;
  for (std::size_t si = 0; si < config.size_list.size(); ++si) {
    const std::uint64_t size = config.size_list[si];
    const std::size_t k = config.k_schedule[std::min(si, config.k_schedule.size() - 1)];
    const ErrorBudget budget{k, config.tail_cap};
    const Spectrum omega = family_spectrum(with_size(family, size), k);
    std::optional<TargetPair> warm;
    for (unsigned d : config.d_list) {
      const auto start = std::chrono::steady_clock::now();
      StudyRow row;
      row.size = size;
      row.d = d;
      row.truncation_K = k;
      if (config.objective == StudyObjective::kappa) {
        const KappaEstimate est = kappa_estimate(omega, d, config.search, budget, warm ? &*warm : nullptr);
        row.value = est.value;
        row.argmax_phi = est.argmax_pair.phi.weights();
        row.argmax_psi = est.argmax_pair.psi.weights();
        row.search_evals = est.search_evals;
        warm = est.argmax_pair;
      } else {
        const TargetPair pair = make_target_pair(Spectrum{}, Spectrum::uniform(d), d);
        row.value = bipartite_error(omega, pair, budget);
        row.argmax_phi = pair.phi.weights();
        row.argmax_psi = pair.psi.weights();
        row.search_evals = 1;
      }
      row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      rows.push_back(std::move(row));
    }
  }

  const std::size_t nd = config.d_list.size();
  const std::size_t ns = config.size_list.size();
  for (std::size_t di = 0; di < nd; ++di) {
    const double first = rows[di].value.mid();
    const double last = rows[(ns - 1) * nd + di].value.mid();
    const double trend = last > first ? 1.0 : (last < first ? -1.0 : 0.0);
    if (trend == 0.0) continue;
    for (std::size_t si = 1; si < ns; ++si) {
      const StudyRow& prev = rows[(si - 1) * nd + di];
      StudyRow& cur = rows[si * nd + di];
      const double slack = prev.value.width() + cur.value.width() + 1e-12;
      if (trend * (cur.value.mid() - prev.value.mid()) < -slack) cur.nonmonotone = true;
    }
  }
  return rows;
}

}  // namespace embz
