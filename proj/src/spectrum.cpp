#include "embz/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include <nlohmann/json.hpp>

#include "embz/errors.hpp"
#include "embz/numeric.hpp"

namespace embz {

namespace {

// Equal consecutive weights of a sorted sequence merged into runs.
std::vector<Level> runs_of(const std::vector<double>& sorted) {
  std::vector<Level> levels;
  for (double x : sorted) {
    if (!levels.empty() && levels.back().weight == x) {
      ++levels.back().count;
    } else {
      levels.push_back({x, 1});
    }
  }
  return levels;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw NumericError("spectrum atom count overflows 64 bits");
  return out;
}

// Walks two sorted spectra position by position (zero padded), calling
// fn(a, b, count) for each maximal segment where both sides are constant.
template <typename Fn>
void for_each_aligned(const Spectrum& p, const Spectrum& q, Fn&& fn) {
  const auto lp = p.levels();
  const auto lq = q.levels();
  std::size_t i = 0, j = 0;
  std::uint64_t left_p = lp.empty() ? 0 : lp[0].count;
  std::uint64_t left_q = lq.empty() ? 0 : lq[0].count;
  while (i < lp.size() || j < lq.size()) {
    if (i == lp.size()) {
      fn(0.0, lq[j].weight, left_q);
      if (++j < lq.size()) left_q = lq[j].count;
      continue;
    }
    if (j == lq.size()) {
      fn(lp[i].weight, 0.0, left_p);
      if (++i < lp.size()) left_p = lp[i].count;
      continue;
    }
    const std::uint64_t c = std::min(left_p, left_q);
    fn(lp[i].weight, lq[j].weight, c);
    left_p -= c;
    left_q -= c;
    if (left_p == 0 && ++i < lp.size()) left_p = lp[i].count;
    if (left_q == 0 && ++j < lq.size()) left_q = lq[j].count;
  }
}

// Accumulates runs in nonincreasing order, merging values within
// kCoalesceTolerance of the current run's first value.
class RunBuilder {
 public:
  bool merges(double w) const noexcept {
    return has_run_ && anchor_ - w <= kCoalesceTolerance * anchor_;
  }
  void push(double w, std::uint64_t count) {
    if (!merges(w)) {
      flush();
      has_run_ = true;
      anchor_ = w;
    }
    run_count_ += count;
    run_mass_ += static_cast<double>(count) * w;
  }
  std::size_t size() const noexcept { return out_.size() + (has_run_ ? 1 : 0); }
  std::vector<Level> finish() {
    flush();
    return std::move(out_);
  }

 private:
  void flush() {
    if (!has_run_) return;
    double w = run_mass_ / static_cast<double>(run_count_);
    if (!out_.empty()) w = std::min(w, out_.back().weight);
    out_.push_back({w, run_count_});
    has_run_ = false;
    run_count_ = 0;
    run_mass_ = 0.0;
  }

  std::vector<Level> out_;
  bool has_run_ = false;
  double anchor_ = 0.0;
  std::uint64_t run_count_ = 0;
  double run_mass_ = 0.0;
};

}  // namespace

Interval make_interval(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
    throw NumericError("invalid interval [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return {lo, hi};
}

Spectrum::Spectrum() : levels_{{1.0, 1}}, kept_mass_(1.0), atoms_(1) {}

Spectrum Spectrum::from_levels(std::vector<Level> levels, double tail_mass, double tail_atom_bound) {
  Spectrum s;
  s.levels_ = std::move(levels);
  if (!std::isfinite(tail_mass) || tail_mass < 0.0) throw NumericError("tail_mass must be finite and >= 0");
  if (!std::isfinite(tail_atom_bound) || tail_atom_bound < 0.0) {
    throw NumericError("tail_atom_bound must be finite and >= 0");
  }
  CompensatedSum mass;
  std::uint64_t atoms = 0;
  double prev = std::numeric_limits<double>::infinity();
  for (const Level& l : s.levels_) {
    if (!(l.weight > 0.0) || !std::isfinite(l.weight)) throw NumericError("spectrum weights must be positive");
    if (l.count == 0) throw NumericError("spectrum run with zero multiplicity");
    if (l.weight > prev) throw NumericError("spectrum weights must be nonincreasing");
    prev = l.weight;
    mass += static_cast<double>(l.count) * l.weight;
    if (__builtin_add_overflow(atoms, l.count, &atoms)) throw NumericError("spectrum atom count overflows 64 bits");
  }
  s.kept_mass_ = mass.value();
  s.atoms_ = atoms;
  if (std::abs(s.kept_mass_ + tail_mass - 1.0) > kMassTolerance) {
    throw NumericError("spectrum mass " + std::to_string(s.kept_mass_) + " + tail " + std::to_string(tail_mass) +
                       " differs from 1");
  }
  s.tail_mass_ = tail_mass;
  if (tail_mass == 0.0) {
    s.tail_atom_bound_ = 0.0;
  } else {
    if (!s.levels_.empty()) {
      const double floor = s.levels_.back().weight;
      if (tail_atom_bound > floor * (1.0 + 1e-9)) {
        throw NumericError("tail_atom_bound exceeds the smallest kept weight");
      }
      tail_atom_bound = std::min(tail_atom_bound, floor);
    }
    s.tail_atom_bound_ = std::min(tail_atom_bound, tail_mass);
  }
  return s;
}

Spectrum Spectrum::uniform(std::uint64_t n) {
  if (n == 0) throw ConfigError("uniform spectrum needs at least one atom");
  return from_levels({{1.0 / static_cast<double>(n), n}}, 0.0, 0.0);
}

std::vector<double> Spectrum::weights(std::uint64_t max_atoms) const {
  if (atoms_ > max_atoms) {
    throw ConfigError("spectrum has " + std::to_string(atoms_) + " atoms; refusing to expand");
  }
  std::vector<double> out;
  out.reserve(atoms_);
  for (const Level& l : levels_) out.insert(out.end(), l.count, l.weight);
  return out;
}

Spectrum make_spectrum(std::span<const double> raw, double tol) {
  if (!(tol >= 0.0)) throw ConfigError("tolerance must be >= 0");
  CompensatedSum total;
  for (double x : raw) {
    if (!std::isfinite(x)) throw ConfigError("spectrum entries must be finite");
    if (x < -tol) throw ConfigError("spectrum entry " + std::to_string(x) + " is negative beyond tolerance");
    total += x;
  }
  if (std::abs(total.value() - 1.0) > tol) {
    throw ConfigError("spectrum entries sum to " + std::to_string(total.value()) + ", not 1");
  }
  std::vector<double> kept;
  double dropped_max = 0.0;
  for (double x : raw) {
    if (x > tol) {
      kept.push_back(x);
    } else {
      dropped_max = std::max(dropped_max, x);
    }
  }
  std::sort(kept.begin(), kept.end(), std::greater<>());
  CompensatedSum kept_sum;
  for (double x : kept) kept_sum += x;
  double tail = 1.0 - kept_sum.value();
  if (tail < 0.0) {
    const double scale = 1.0 / kept_sum.value();
    for (double& x : kept) x *= scale;
    tail = 0.0;
  }
  std::vector<Level> levels = runs_of(kept);
  if (tail <= 0.0) return Spectrum::from_levels(std::move(levels), 0.0, 0.0);
  double bound = std::max(dropped_max, tail);
  if (!levels.empty()) bound = std::min(bound, levels.back().weight);
  return Spectrum::from_levels(std::move(levels), tail, bound);
}

Spectrum exact_spectrum(std::span<const double> raw, double tol) {
  if (!(tol >= 0.0)) throw ConfigError("tolerance must be >= 0");
  std::vector<double> kept;
  CompensatedSum total;
  for (double x : raw) {
    if (!std::isfinite(x)) throw ConfigError("spectrum entries must be finite");
    if (x < -tol) throw ConfigError("spectrum entry " + std::to_string(x) + " is negative beyond tolerance");
    if (x > 0.0) {
      kept.push_back(x);
      total += x;
    }
  }
  if (std::abs(total.value() - 1.0) > tol) {
    throw ConfigError("spectrum entries sum to " + std::to_string(total.value()) + ", not 1");
  }
  for (double& x : kept) x /= total.value();
  std::sort(kept.begin(), kept.end(), std::greater<>());
  return Spectrum::from_levels(runs_of(kept), 0.0, 0.0);
}

Spectrum truncate(const Spectrum& p, std::size_t max_levels) {
  if (max_levels == 0) throw ConfigError("truncation budget must be >= 1");
  if (p.level_count() <= max_levels) return p;
  const auto lv = p.levels();
  std::vector<Level> kept(lv.begin(), lv.begin() + static_cast<std::ptrdiff_t>(max_levels));
  CompensatedSum dropped;
  for (std::size_t i = max_levels; i < lv.size(); ++i) dropped += static_cast<double>(lv[i].count) * lv[i].weight;
  const double bound = std::max(p.tail_atom_bound(), lv[max_levels].weight);
  return Spectrum::from_levels(std::move(kept), p.tail_mass() + dropped.value(), bound);
}

Spectrum tensor(const Spectrum& p, const Spectrum& q, std::size_t max_levels) {
  if (max_levels == 0) throw ConfigError("truncation budget must be >= 1");
  const auto lp = p.levels();
  const auto lq = q.levels();

  // Nothing involving an input tail atom can exceed this; cells below it are
  // not kept, so the output stays a prefix of the true product spectrum.
  const double cross_bound = std::max({p.max_weight() * q.tail_atom_bound(), q.max_weight() * p.tail_atom_bound(),
                                       p.tail_atom_bound() * q.tail_atom_bound()});

  struct Cell {
    double value;
    std::uint32_t i;
    std::uint32_t j;
    bool operator<(const Cell& o) const noexcept {
      if (value != o.value) return value < o.value;
      if (i != o.i) return i > o.i;
      return j > o.j;
    }
  };
  if (lp.size() > std::numeric_limits<std::uint32_t>::max() || lq.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ConfigError("spectrum too long for tensor");
  }

  std::priority_queue<Cell> frontier;
  if (!lp.empty() && !lq.empty()) frontier.push({lp[0].weight * lq[0].weight, 0, 0});

  RunBuilder runs;
  CompensatedSum retained;
  while (!frontier.empty()) {
    const Cell top = frontier.top();
    if (top.value < cross_bound || top.value <= 0.0) break;
    if (runs.size() >= max_levels && !runs.merges(top.value)) break;
    frontier.pop();
    const std::uint64_t count = checked_mul(lp[top.i].count, lq[top.j].count);
    runs.push(top.value, count);
    retained += static_cast<double>(count) * top.value;
    if (top.j + 1 < lq.size()) frontier.push({lp[top.i].weight * lq[top.j + 1].weight, top.i, top.j + 1});
    if (top.j == 0 && top.i + 1 < lp.size()) frontier.push({lp[top.i + 1].weight * lq[0].weight, top.i + 1, 0});
  }

  const double sp = p.kept_mass();
  const double sq = q.kept_mass();
  const double tp = p.tail_mass();
  const double tq = q.tail_mass();
  const double grid_left = frontier.empty() ? 0.0 : std::max(0.0, sp * sq - retained.value());
  const double tail = grid_left + tp * sq + sp * tq + tp * tq;
  const double bound = std::max(cross_bound, frontier.empty() ? 0.0 : frontier.top().value);
  return Spectrum::from_levels(runs.finish(), tail, bound);
}

Spectrum tensor_power(const Spectrum& p, unsigned m, std::size_t max_levels) {
  if (m == 0) throw ConfigError("tensor power needs m >= 1");
  if (max_levels == 0) throw ConfigError("truncation budget must be >= 1");
  const std::size_t inner = max_levels * kOversampling;
  Spectrum acc = truncate(p, inner);
  for (unsigned k = 1; k < m; ++k) acc = tensor(acc, p, inner);
  return truncate(acc, max_levels);
}

Interval l1_sorted(const Spectrum& p, const Spectrum& q) {
  CompensatedSum sum;
  for_each_aligned(p, q, [&](double a, double b, std::uint64_t c) { sum += static_cast<double>(c) * std::abs(a - b); });
  const double v = std::clamp(sum.value(), 0.0, 2.0);
  const double slack = p.tail_mass() + q.tail_mass();
  return make_interval(std::clamp(v - slack, 0.0, 2.0), std::clamp(v + slack, 0.0, 2.0));
}

Interval fidelity_sorted(const Spectrum& p, const Spectrum& q) {
  CompensatedSum overlap;
  CompensatedSum beyond_p;  // p atoms at positions past the end of q
  CompensatedSum beyond_q;
  for_each_aligned(p, q, [&](double a, double b, std::uint64_t c) {
    const double n = static_cast<double>(c);
    if (a > 0.0 && b > 0.0) {
      overlap += n * std::sqrt(a) * std::sqrt(b);
    } else if (a > 0.0) {
      beyond_p += n * a;
    } else {
      beyond_q += n * b;
    }
  });
  const double tp = p.tail_mass();
  const double tq = q.tail_mass();
  const double lo = std::clamp(overlap.value(), 0.0, 1.0);
  const double hi = lo + std::sqrt(tp * (tq + beyond_q.value())) + std::sqrt(tq * (tp + beyond_p.value()));
  return make_interval(lo, std::clamp(hi, lo, 1.0));
}

double hellinger_sq_sorted(const Spectrum& p, const Spectrum& q) {
  double sum = 0.0;
  for_each_aligned(p, q, [&](double a, double b, std::uint64_t c) {
    const double ra = std::sqrt(a);
    const double rb = std::sqrt(b);
    const double ratio = std::abs(ra - rb) / (ra + rb);
    sum += static_cast<double>(c) * (std::abs(a - b) * ratio);
  });
  return sum;
}

double l1_kept(const Spectrum& p, const Spectrum& q) {
  double sum = 0.0;
  for_each_aligned(p, q, [&](double a, double b, std::uint64_t c) { sum += static_cast<double>(c) * std::abs(a - b); });
  return sum;
}

void to_json(nlohmann::json& j, const Spectrum& s) {
  const auto lv = s.levels();
  const bool runs = std::any_of(lv.begin(), lv.end(), [](const Level& l) { return l.count > 1; });
  nlohmann::json weights = nlohmann::json::array();
  for (const Level& l : lv) weights.push_back(l.weight);
  j = nlohmann::json{{"weights", std::move(weights)}, {"tail_mass", s.tail_mass()}, {"tail_atom_bound", s.tail_atom_bound()}};
  if (runs) {
    nlohmann::json counts = nlohmann::json::array();
    for (const Level& l : lv) counts.push_back(l.count);
    j["multiplicities"] = std::move(counts);
  }
}

void from_json(const nlohmann::json& j, Spectrum& s) {
  for (const auto& [key, value] : j.items()) {
    if (key != "weights" && key != "tail_mass" && key != "tail_atom_bound" && key != "multiplicities") {
      throw ConfigError("unknown spectrum key '" + key + "'");
    }
  }
  const auto weights = j.at("weights").get<std::vector<double>>();
  std::vector<std::uint64_t> counts(weights.size(), 1);
  if (j.contains("multiplicities")) {
    counts = j.at("multiplicities").get<std::vector<std::uint64_t>>();
    if (counts.size() != weights.size()) throw ConfigError("multiplicities and weights differ in length");
  }
  std::vector<Level> levels;
  levels.reserve(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) levels.push_back({weights[i], counts[i]});
  s = Spectrum::from_levels(std::move(levels), j.value("tail_mass", 0.0), j.value("tail_atom_bound", 0.0));
}

void to_json(nlohmann::json& j, const Interval& v) { j = nlohmann::json{{"lo", v.lo}, {"hi", v.hi}}; }

}  // namespace embz
